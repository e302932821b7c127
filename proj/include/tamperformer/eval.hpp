#pragma once

#include <string>
#include <vector>

#include "tamperformer/checkpoint.hpp"
#include "tamperformer/model.hpp"
#include "tamperformer/synth.hpp"

namespace tfm {

struct MetricReport {
  double pixel_auc = 0.0;
  double image_auc = 0.0;
  double pixel_f1 = 0.0;
  double image_f1 = 0.0;
  double eer_threshold = 0.0;  // image-level threshold
  int64_t n_images = 0;
  int64_t n_pixels = 0;

  std::string to_json() const;
};

struct EvalOptions {
  // Pool pixels across images instead of averaging per-image AUC/F1.
  bool pixel_pooled = false;
  // Score with the ground truth instead of the model; harness self-check.
  bool oracle = false;
  uint64_t seed = 42;
};

struct Distortion {
  std::string kind;  // none | resize | gaussian_blur | gaussian_noise | jpeg
  double param = 0.0;
};

// The nine-row distortion grid, identity first.
std::vector<Distortion> distortion_grid();

Image apply_distortion(const Image& image, const Distortion& d, uint64_t seed);
Mask apply_distortion_mask(const Mask& mask, const Distortion& d);

struct ModelHandle {
  ModelConfig config;
  ParamStore weights;
};

MetricReport evaluate_manifest(const ModelHandle* model, const std::string& manifest_path,
                               const EvalOptions& opts, const Distortion* distortion = nullptr);

struct RobustnessRow {
  std::string kind;
  double param = 0.0;
  double pixel_auc = 0.0;
};

std::vector<RobustnessRow> robustness_suite(const ModelHandle* model,
                                            const std::string& manifest_path,
                                            const EvalOptions& opts);

std::string robustness_table(const std::vector<RobustnessRow>& rows);

// First-encoder-layer affinity rows (heads averaged, RGB half) as one PNG per
// prototype. Returns the written paths.
std::vector<std::string> export_affinity_maps(const ModelHandle& model, const Image& image,
                                              const std::string& out_dir);

// Resizes arbitrary input to the model size, predicts, and maps the mask back
// to the original dimensions.
PredictionOutput predict_image(const ModelHandle& model, const Image& image);

}  // namespace tfm
