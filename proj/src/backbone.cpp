#include "tamperformer/backbone.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace tfm {

namespace {

Tensor image_to_tensor(const Image& img) {
  Tensor t({img.h, img.w, img.c});
  t.data = img.data;
  return t;
}

std::vector<std::string> split(const std::string& s, char delim) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, delim)) out.push_back(item);
  return out;
}

FeatureGrid run_stem(const Image& input, const StemParams& params, const ParamStore& store,
                     const std::string& prefix) {
  nn::Graph g;
  ParamBinder bind(g, store, /*train=*/false);
  nn::NodeId x = g.input(image_to_tensor(input));
  nn::NodeId out = build_stem(g, x, params, bind, prefix);
  const Tensor& v = g.val(out);
  FeatureGrid grid;
  grid.h = v.shape[0];
  grid.w = v.shape[1];
  grid.c = v.shape[2];
  grid.stride = stem_stride(params);
  grid.values = v;
  return grid;
}

}  // namespace

StemParams parse_stem_spec(const std::string& spec) {
  StemParams params;
  for (const auto& layer : split(spec, ';')) {
    if (layer.empty()) continue;
    auto fields = split(layer, ',');
    if (fields.size() != 4)
      throw std::invalid_argument("stem spec layer must be 'kernel,channels,stride,act': " + layer);
    StemLayerSpec l;
    l.kernel = std::stoi(fields[0]);
    l.out_channels = std::stoi(fields[1]);
    l.stride = std::stoi(fields[2]);
    if (fields[3] == "gelu")
      l.gelu = true;
    else if (fields[3] == "none")
      l.gelu = false;
    else
      throw std::invalid_argument("stem spec activation must be gelu|none: " + fields[3]);
    if (l.kernel < 1 || l.out_channels < 1 || l.stride < 1)
      throw std::invalid_argument("stem spec values must be positive: " + layer);
    params.push_back(l);
  }
  if (params.empty()) throw std::invalid_argument("stem spec is empty");
  return params;
}

std::string stem_spec_to_string(const StemParams& params) {
  std::string out;
  for (size_t i = 0; i < params.size(); ++i) {
    if (i) out += ";";
    out += std::to_string(params[i].kernel) + "," + std::to_string(params[i].out_channels) + "," +
           std::to_string(params[i].stride) + "," + (params[i].gelu ? "gelu" : "none");
  }
  return out;
}

int stem_stride(const StemParams& params) {
  int s = 1;
  for (const auto& l : params) s *= l.stride;
  return s;
}

void init_stem_weights(ParamStore& store, const std::string& prefix, const StemParams& params,
                       int in_channels, Rng& rng) {
  int ci = in_channels;
  for (size_t i = 0; i < params.size(); ++i) {
    const auto& l = params[i];
    Tensor w({l.kernel, l.kernel, ci, l.out_channels});
    for (auto& v : w.data) v = rng.normal(0.0, 0.02);
    store.add(prefix + "." + std::to_string(i) + ".weight", std::move(w));
    store.add(prefix + "." + std::to_string(i) + ".bias", Tensor({l.out_channels}));
    ci = l.out_channels;
  }
}

nn::NodeId build_stem(nn::Graph& g, nn::NodeId image_hwc, const StemParams& params,
                      ParamBinder& bind, const std::string& prefix) {
  nn::NodeId x = image_hwc;
  const int in_ch = g.val(image_hwc).shape[2];
  int ci = in_ch;
  for (size_t i = 0; i < params.size(); ++i) {
    const auto& l = params[i];
    nn::NodeId w = bind(prefix + "." + std::to_string(i) + ".weight");
    nn::NodeId b = bind(prefix + "." + std::to_string(i) + ".bias");
    if (g.val(w).shape[2] != ci)
      throw std::invalid_argument(prefix + ": weight channels do not match stem config");
    x = g.conv2d(x, w, b, l.stride, l.kernel / 2);
    if (l.gelu) x = g.gelu(x);
    ci = l.out_channels;
  }
  return x;
}

FeatureGrid extract_rgb_features(const Image& image, const StemParams& params,
                                 const ParamStore& store, const std::string& prefix) {
  if (image.c != 3) throw std::invalid_argument("extract_rgb_features: expected RGB image");
  return run_stem(image, params, store, prefix);
}

FeatureGrid extract_freq_features(const Image& xh, const StemParams& params,
                                  const ParamStore& store, const std::string& prefix) {
  if (xh.c != 1) throw std::invalid_argument("extract_freq_features: expected 1-channel input");
  return run_stem(xh, params, store, prefix);
}

Tensor patchify(const FeatureGrid& grid) {
  // HWC row-major storage already is (row*W+col, channel); only the shape changes.
  Tensor t({grid.h * grid.w, grid.c});
  t.data = grid.values.data;
  return t;
}

FeatureGrid unpatchify(const Tensor& tokens, int h, int w, int stride) {
  if (tokens.rank() != 2 || tokens.shape[0] != h * w)
    throw std::invalid_argument("unpatchify: token count does not match grid");
  FeatureGrid grid;
  grid.h = h;
  grid.w = w;
  grid.c = tokens.shape[1];
  grid.stride = stride;
  grid.values = Tensor({h, w, grid.c});
  grid.values.data = tokens.data;
  return grid;
}

Tensor sinusoidal_positions(int length, int width) {
  if (width % 2 != 0) throw std::invalid_argument("sinusoidal_positions: width must be even");
  if (length < 0) throw std::invalid_argument("sinusoidal_positions: negative length");
  Tensor pos({length, width});
  for (int t = 0; t < length; ++t) {
    for (int j = 0; 2 * j < width; ++j) {
      const double freq = std::pow(10000.0, 2.0 * j / width);
      pos.at(t, 2 * j) = std::sin(t / freq);
      pos.at(t, 2 * j + 1) = std::cos(t / freq);
    }
  }
  return pos;
}

PatchSequence build_multimodal_embedding(const FeatureGrid& gr, const FeatureGrid& gf) {
  if (gr.h != gf.h || gr.w != gf.w || gr.c != gf.c)
    throw std::invalid_argument("build_multimodal_embedding: modality grids differ in shape");
  const int l = gr.h * gr.w;
  const int c = gr.c;
  PatchSequence seq;
  seq.length_per_modality = l;
  seq.width = c;
  seq.tokens = Tensor({2 * l, c});
  Tensor pr = patchify(gr);
  Tensor pf = patchify(gf);
  Tensor pos = sinusoidal_positions(2 * l, c);
  for (int t = 0; t < l; ++t)
    for (int j = 0; j < c; ++j) {
      seq.tokens.at(t, j) = pr.at(t, j) + pos.at(t, j);
      seq.tokens.at(l + t, j) = pf.at(t, j) + pos.at(l + t, j);
    }
  return seq;
}

}  // namespace tfm
