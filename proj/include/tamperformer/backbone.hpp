#pragma once

#include <string>
#include <vector>

#include "tamperformer/image.hpp"
#include "tamperformer/params.hpp"
#include "tamperformer/rng.hpp"

namespace tfm {

// One convolution layer of a stem: square kernel, padding kernel/2.
struct StemLayerSpec {
  int kernel = 3;
  int out_channels = 8;
  int stride = 2;
  bool gelu = true;
};

using StemParams = std::vector<StemLayerSpec>;

// Layer list format: "k,ch,stride,act;..." with act in {gelu,none}.
StemParams parse_stem_spec(const std::string& spec);
std::string stem_spec_to_string(const StemParams& params);
int stem_stride(const StemParams& params);

struct FeatureGrid {
  int h = 0, w = 0, c = 0;
  int stride = 1;
  Tensor values;  // {h, w, c}
};

// Token matrix plus the bookkeeping needed to recover the two modalities.
struct PatchSequence {
  Tensor tokens;              // {2L, C}
  int length_per_modality = 0;
  int width = 0;
};

void init_stem_weights(ParamStore& store, const std::string& prefix, const StemParams& params,
                       int in_channels, Rng& rng);

// Graph-level builder shared by inference and training.
nn::NodeId build_stem(nn::Graph& g, nn::NodeId image_hwc, const StemParams& params,
                      ParamBinder& bind, const std::string& prefix);

FeatureGrid extract_rgb_features(const Image& image, const StemParams& params,
                                 const ParamStore& store, const std::string& prefix = "stem_rgb");
FeatureGrid extract_freq_features(const Image& xh, const StemParams& params,
                                  const ParamStore& store, const std::string& prefix = "stem_freq");

Tensor patchify(const FeatureGrid& grid);                    // {L, C}, row-major
FeatureGrid unpatchify(const Tensor& tokens, int h, int w, int stride);

Tensor sinusoidal_positions(int length, int width);

PatchSequence build_multimodal_embedding(const FeatureGrid& gr, const FeatureGrid& gf);

}  // namespace tfm
