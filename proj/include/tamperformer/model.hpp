#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tamperformer/backbone.hpp"
#include "tamperformer/decoder.hpp"
#include "tamperformer/encoder.hpp"
#include "tamperformer/frequency.hpp"

namespace tfm {

struct ModelConfig {
  int image_h = 256;
  int image_w = 256;
  StemParams stem = parse_stem_spec("3,16,2,gelu;3,32,2,gelu;3,48,2,gelu;3,64,2,none");
  int prototypes = 16;   // N
  int heads = 4;         // h
  int depth = 8;         // I
  int bcim_window = 3;   // k
  double alpha = 0.1;    // high-pass cutoff fraction
  int ffn_width = 256;   // C_ff
  double lambda = 1.0;   // segmentation loss weight
  bool use_hfe = true;
  bool use_bcim = true;
  uint64_t seed = 42;

  int stride() const { return stem_stride(stem); }
  int channels() const { return stem.back().out_channels; }  // C
  int grid_h() const { return image_h / stride(); }
  int grid_w() const { return image_w / stride(); }
  int tokens_per_modality() const { return grid_h() * grid_w(); }  // L
  int upsample_stages() const;  // log2(stride), validated

  void validate() const;

  static ModelConfig tiny(uint64_t seed = 42);
};

struct PredictionOutput {
  double label_score = 0.0;          // tamper probability in [0,1]
  Tensor mask;                       // {H, W} in [0,1]
  std::vector<AffinityMatrix> affinities;  // one per encoder layer
};

// Raised when a forward/backward pass produces non-finite values.
struct ModelFault : std::runtime_error {
  std::string stage;
  explicit ModelFault(const std::string& stage_)
      : std::runtime_error("non-finite values at stage: " + stage_), stage(stage_) {}
};

ParamStore init_weights(const ModelConfig& config, Rng& rng);
ParamStore init_weights(const ModelConfig& config);  // seeded from config.seed

PredictionOutput forward(const Image& image, const ParamStore& weights, const ModelConfig& config,
                         bool want_affinities = true);

double classification_head(const FeatureGrid& g_out, const ParamStore& weights);
Tensor localization_head(const FeatureGrid& g_out, const ParamStore& weights,
                         const ModelConfig& config);

// BCE(y, y_hat) + lambda * mean-pixel BCE(M, M_hat); probabilities clamped to
// [1e-7, 1-1e-7].
double loss(int label, double label_score, const Tensor& mask, const Tensor& mask_score,
            double lambda);

struct LossBreakdown {
  double total = 0.0;
  double cls = 0.0;
  double seg = 0.0;
};

// Loss and exact gradients for one sample; gradient tensors mirror `weights`.
LossBreakdown gradients(const Image& image, int label, const Tensor& mask,
                        const ParamStore& weights, const ModelConfig& config, ParamStore& grads);

// Forward-only loss used by finite-difference checks.
LossBreakdown loss_value(const Image& image, int label, const Tensor& mask,
                         const ParamStore& weights, const ModelConfig& config);

constexpr double kBceEps = 1e-7;

}  // namespace tfm
