#include "tamperformer/model.hpp"

#include <cmath>
#include <stdexcept>

namespace tfm {

namespace {

Tensor image_to_tensor(const Image& img) {
  Tensor t({img.h, img.w, img.c});
  t.data = img.data;
  return t;
}

void check_stage(const nn::Graph& g, nn::NodeId id, const char* stage) {
  if (!all_finite(g.val(id))) throw ModelFault(stage);
}

// Channel plan for the upsampling stack: halve per stage, floor at 8.
std::vector<int> loc_head_channels(int in_channels, int stages) {
  std::vector<int> ch;
  int c = in_channels;
  for (int s = 0; s < stages; ++s) {
    c = std::max(8, c / 2);
    ch.push_back(c);
  }
  return ch;
}

struct ForwardNodes {
  nn::NodeId score;     // {1,1}
  nn::NodeId mask;      // {H*W, 1}
  std::vector<std::vector<nn::NodeId>> affinity_heads;
};

// The whole network on one graph. Used for inference (train=false binder) and
// for the training/gradient path.
ForwardNodes build_forward(nn::Graph& g, const Image& image, ParamBinder& bind,
                           const ModelConfig& config) {
  const int hs = config.grid_h(), ws = config.grid_w();
  const int l = config.tokens_per_modality();
  const int c = config.channels();

  if (image.h != config.image_h || image.w != config.image_w || image.c != 3)
    throw std::invalid_argument("forward: image does not match configured size");

  nn::NodeId rgb_in = g.input(image_to_tensor(image));
  nn::NodeId gr = build_stem(g, rgb_in, config.stem, bind, "stem_rgb");
  check_stage(g, gr, "stem_rgb");

  nn::NodeId p_freq;
  if (config.use_hfe) {
    // High-frequency companion (fixed transform, not learned).
    Image xh = extract_high_frequency(image, HighPassSpec{config.alpha});
    Tensor xh_t = image_to_tensor(xh);
    if (!all_finite(xh_t)) throw ModelFault("hfe");
    nn::NodeId freq_in = g.input(std::move(xh_t));
    nn::NodeId gf = build_stem(g, freq_in, config.stem, bind, "stem_freq");
    check_stage(g, gf, "stem_freq");
    p_freq = g.reshape(gf, {l, c});
  } else {
    // HFE ablation: frequency tokens become a learned constant vector.
    p_freq = g.broadcast_row(bind("hfe_token"), l);
  }

  nn::NodeId p_rgb = g.reshape(gr, {l, c});
  nn::NodeId tokens = g.concat_rows(p_rgb, p_freq);
  nn::NodeId p = g.add(tokens, g.input(sinusoidal_positions(2 * l, c)));
  check_stage(g, p, "embedding");

  nn::NodeId o = bind("prototypes");
  ForwardNodes out;
  for (int i = 0; i < config.depth; ++i) {
    const std::string enc = "encoder." + std::to_string(i);
    const std::string dec = "decoder." + std::to_string(i);
    EncoderOut e = build_encoder_layer(g, o, p, bind, enc, config.heads);
    o = e.objects;
    check_stage(g, o, ("encoder[" + std::to_string(i) + "]").c_str());
    out.affinity_heads.push_back(e.affinity_heads);
    p = build_decoder_layer(g, p, o, bind, dec, config.heads,
                            config.use_bcim ? config.bcim_window : 0, hs, ws);
    check_stage(g, p, ("decoder[" + std::to_string(i) + "]").c_str());
  }

  // G_out: modality halves stacked channel-wise on the spatial grid.
  nn::NodeId rgb_half = g.slice_rows(p, 0, l);
  nn::NodeId freq_half = g.slice_rows(p, l, 2 * l);
  nn::NodeId g_out = g.reshape(g.concat_cols(rgb_half, freq_half), {hs, ws, 2 * c});

  // Detection head: GAP -> FC -> sigmoid.
  nn::NodeId pooled = g.gap(g_out);
  nn::NodeId logit = g.add(g.matmul(pooled, bind("cls.weight")), bind("cls.bias"));
  out.score = g.sigmoid(logit);
  check_stage(g, out.score, "cls_head");

  // Localization head: stages of (bilinear 2x up -> conv -> GELU), 1x1 conv, sigmoid.
  nn::NodeId x = g_out;
  const int stages = config.upsample_stages();
  for (int s = 0; s < stages; ++s) {
    const std::string ls = "loc." + std::to_string(s);
    x = g.bilinear_up2(x);
    x = g.gelu(g.conv2d(x, bind(ls + ".weight"), bind(ls + ".bias"), 1, 1));
  }
  nn::NodeId mask_logits = g.conv2d(x, bind("loc.final.weight"), bind("loc.final.bias"), 1, 0);
  nn::NodeId mask = g.sigmoid(g.reshape(mask_logits, {config.image_h * config.image_w, 1}));
  out.mask = mask;
  check_stage(g, out.mask, "loc_head");
  return out;
}

double bce_scalar(double target, double p) {
  p = std::clamp(p, kBceEps, 1.0 - kBceEps);
  return -(target * std::log(p) + (1.0 - target) * std::log(1.0 - p));
}

LossBreakdown run_loss(nn::Graph& g, const ForwardNodes& nodes, int label, const Tensor& mask,
                       const ModelConfig& config, nn::NodeId* total_node) {
  if (label != 0 && label != 1) throw std::invalid_argument("loss: label must be 0 or 1");
  if (mask.numel() != static_cast<int64_t>(config.image_h) * config.image_w)
    throw std::invalid_argument("loss: mask does not match image size");
  Tensor target_label({1, 1});
  target_label[0] = label;
  Tensor target_mask({config.image_h * config.image_w, 1});
  target_mask.data = mask.data;
  nn::NodeId cls = g.bce_mean(nodes.score, std::move(target_label), kBceEps);
  nn::NodeId seg = g.bce_mean(nodes.mask, std::move(target_mask), kBceEps);
  nn::NodeId total = g.add(g.reshape(cls, {1}), g.scale(g.reshape(seg, {1}), config.lambda));
  LossBreakdown out;
  out.cls = g.val(cls)[0];
  out.seg = g.val(seg)[0];
  out.total = g.val(total)[0];
  if (total_node) *total_node = total;
  return out;
}

}  // namespace

int ModelConfig::upsample_stages() const {
  int s = stride();
  int stages = 0;
  while (s > 1) {
    if (s % 2 != 0) throw std::invalid_argument("model: stem stride must be a power of two");
    s /= 2;
    ++stages;
  }
  return stages;
}

void ModelConfig::validate() const {
  if (image_h < 1 || image_w < 1) throw std::invalid_argument("model: bad image size");
  if (image_h % stride() != 0 || image_w % stride() != 0)
    throw std::invalid_argument("model: image size must be divisible by the stem stride");
  (void)upsample_stages();
  if (channels() % 2 != 0)
    throw std::invalid_argument("model: channel width must be even for sinusoidal positions");
  if (heads < 1 || channels() % heads != 0)
    throw std::invalid_argument("model: heads must divide channel width");
  if (prototypes < 1) throw std::invalid_argument("model: need at least one prototype");
  if (depth < 1) throw std::invalid_argument("model: depth must be >= 1");
  if (bcim_window < 1 || bcim_window % 2 == 0)
    throw std::invalid_argument("model: BCIM window must be odd");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("model: alpha must be in [0,1]");
  if (ffn_width < 1) throw std::invalid_argument("model: ffn width must be >= 1");
  if (lambda < 0.0) throw std::invalid_argument("model: lambda must be >= 0");
}

ModelConfig ModelConfig::tiny(uint64_t seed) {
  ModelConfig c;
  c.image_h = c.image_w = 32;
  c.stem = parse_stem_spec("3,8,2,gelu;3,8,2,none");
  c.prototypes = 2;
  c.heads = 1;
  c.depth = 1;
  c.bcim_window = 3;
  c.ffn_width = 16;
  c.seed = seed;
  return c;
}

ParamStore init_weights(const ModelConfig& config, Rng& rng) {
  config.validate();
  const int c = config.channels();
  ParamStore store;
  init_stem_weights(store, "stem_rgb", config.stem, 3, rng);
  init_stem_weights(store, "stem_freq", config.stem, 1, rng);

  Tensor proto({config.prototypes, c});
  for (auto& v : proto.data) v = rng.normal(0.0, 0.02);
  store.add("prototypes", std::move(proto));
  store.add("hfe_token", Tensor({1, c}));  // used only when HFE is ablated

  for (int i = 0; i < config.depth; ++i) {
    init_encoder_weights(store, "encoder." + std::to_string(i), c, config.prototypes,
                         config.ffn_width, rng);
    init_decoder_weights(store, "decoder." + std::to_string(i), c, config.ffn_width, rng);
  }

  Tensor cls_w({2 * c, 1});
  for (auto& v : cls_w.data) v = rng.normal(0.0, 0.02);
  store.add("cls.weight", std::move(cls_w));
  store.add("cls.bias", Tensor({1, 1}));

  const int stages = config.upsample_stages();
  const auto plan = loc_head_channels(2 * c, stages);
  int ci = 2 * c;
  for (int s = 0; s < stages; ++s) {
    Tensor w({3, 3, ci, plan[static_cast<size_t>(s)]});
    for (auto& v : w.data) v = rng.normal(0.0, 0.02);
    store.add("loc." + std::to_string(s) + ".weight", std::move(w));
    store.add("loc." + std::to_string(s) + ".bias", Tensor({plan[static_cast<size_t>(s)]}));
    ci = plan[static_cast<size_t>(s)];
  }
  Tensor wf({1, 1, ci, 1});
  for (auto& v : wf.data) v = rng.normal(0.0, 0.02);
  store.add("loc.final.weight", std::move(wf));
  store.add("loc.final.bias", Tensor({1}));
  return store;
}

ParamStore init_weights(const ModelConfig& config) {
  Rng rng(Rng::derive(config.seed, 0x1a17));
  return init_weights(config, rng);
}

PredictionOutput forward(const Image& image, const ParamStore& weights, const ModelConfig& config,
                         bool want_affinities) {
  config.validate();
  nn::Graph g;
  ParamBinder bind(g, weights, /*train=*/false);
  ForwardNodes nodes = build_forward(g, image, bind, config);
  PredictionOutput out;
  out.label_score = g.val(nodes.score)[0];
  out.mask = Tensor({config.image_h, config.image_w});
  out.mask.data = g.val(nodes.mask).data;
  if (want_affinities)
    for (const auto& heads : nodes.affinity_heads) out.affinities.push_back(collect_affinity(g, heads));
  return out;
}

double classification_head(const FeatureGrid& g_out, const ParamStore& weights) {
  nn::Graph g;
  nn::NodeId pooled = g.gap(g.input(g_out.values));
  nn::NodeId logit = g.add(g.matmul(pooled, g.input(weights.at("cls.weight"))),
                           g.input(weights.at("cls.bias")));
  return g.val(g.sigmoid(logit))[0];
}

Tensor localization_head(const FeatureGrid& g_out, const ParamStore& weights,
                         const ModelConfig& config) {
  nn::Graph g;
  nn::NodeId x = g.input(g_out.values);
  const int stages = config.upsample_stages();
  for (int s = 0; s < stages; ++s) {
    const std::string ls = "loc." + std::to_string(s);
    x = g.bilinear_up2(x);
    x = g.gelu(g.conv2d(x, g.input(weights.at(ls + ".weight")), g.input(weights.at(ls + ".bias")), 1, 1));
  }
  x = g.conv2d(x, g.input(weights.at("loc.final.weight")), g.input(weights.at("loc.final.bias")), 1, 0);
  x = g.sigmoid(x);
  const Tensor& v = g.val(x);
  Tensor out({v.shape[0], v.shape[1]});
  out.data = v.data;
  return out;
}

double loss(int label, double label_score, const Tensor& mask, const Tensor& mask_score,
            double lambda) {
  if (label != 0 && label != 1) throw std::invalid_argument("loss: label must be 0 or 1");
  if (!mask.same_shape(mask_score)) throw std::invalid_argument("loss: mask shape mismatch");
  double seg = 0.0;
  for (int64_t i = 0; i < mask.numel(); ++i) seg += bce_scalar(mask[i], mask_score[i]);
  seg /= static_cast<double>(mask.numel());
  return bce_scalar(label, label_score) + lambda * seg;
}

LossBreakdown gradients(const Image& image, int label, const Tensor& mask,
                        const ParamStore& weights, const ModelConfig& config, ParamStore& grads) {
  config.validate();
  nn::Graph g;
  ParamBinder bind(g, weights, /*train=*/true);
  ForwardNodes nodes = build_forward(g, image, bind, config);
  nn::NodeId total = -1;
  LossBreakdown breakdown = run_loss(g, nodes, label, mask, config, &total);
  g.backward(total);
  for (const auto& [name, id] : bind.bound()) {
    Tensor grad = g.grad_of(id);
    if (!all_finite(grad)) throw ModelFault("gradients/" + name);
    Tensor& acc = grads.at(name);
    for (int64_t i = 0; i < grad.numel(); ++i) acc[i] += grad[i];
  }
  return breakdown;
}

LossBreakdown loss_value(const Image& image, int label, const Tensor& mask,
                         const ParamStore& weights, const ModelConfig& config) {
  nn::Graph g;
  ParamBinder bind(g, weights, /*train=*/false);
  ForwardNodes nodes = build_forward(g, image, bind, config);
  return run_loss(g, nodes, label, mask, config, nullptr);
}

}  // namespace tfm
