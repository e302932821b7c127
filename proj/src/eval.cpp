#include "tamperformer/eval.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>

#include "tamperformer/metrics.hpp"

namespace fs = std::filesystem;

namespace tfm {

namespace {

// Deterministic mean regardless of accumulation order.
double sorted_mean(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

bool mask_has_both_classes(const Mask& m) {
  const int64_t a = m.area();
  return a > 0 && a < static_cast<int64_t>(m.data.size());
}

}  // namespace

std::string MetricReport::to_json() const {
  nlohmann::ordered_json j{{"pixel_auc", pixel_auc},   {"image_auc", image_auc},
                           {"pixel_f1", pixel_f1},     {"image_f1", image_f1},
                           {"eer_threshold", eer_threshold}, {"n_images", n_images},
                           {"n_pixels", n_pixels}};
  return j.dump(2) + "\n";
}

std::vector<Distortion> distortion_grid() {
  return {{"none", 0.0},           {"resize", 0.78},        {"resize", 0.25},
          {"gaussian_blur", 3.0},  {"gaussian_blur", 15.0}, {"gaussian_noise", 3.0},
          {"gaussian_noise", 15.0},{"jpeg", 100.0},         {"jpeg", 50.0}};
}

Image apply_distortion(const Image& image, const Distortion& d, uint64_t seed) {
  if (d.kind == "none") return image;
  if (d.kind == "resize") {
    const int nh = std::max(1, static_cast<int>(std::lround(image.h * d.param)));
    const int nw = std::max(1, static_cast<int>(std::lround(image.w * d.param)));
    Image small = resize(image, nh, nw, ResizeFilter::Bilinear);
    return resize(small, image.h, image.w, ResizeFilter::Bilinear);
  }
  if (d.kind == "gaussian_blur") {
    const int k = static_cast<int>(d.param);
    return gaussian_blur(image, k, k / 6.0);  // Table lists only the kernel size
  }
  if (d.kind == "gaussian_noise") {
    DegradationSpec spec{DegradationSpec::Kind::GaussianNoise, d.param};
    return degrade(image, spec, seed);
  }
  if (d.kind == "jpeg") {
    DegradationSpec spec{DegradationSpec::Kind::Jpeg, d.param};
    return degrade(image, spec, seed);
  }
  throw std::invalid_argument("unknown distortion: " + d.kind);
}

Mask apply_distortion_mask(const Mask& mask, const Distortion& d) {
  if (d.kind != "resize") return mask;  // only geometry changes touch the mask
  const int nh = std::max(1, static_cast<int>(std::lround(mask.h * d.param)));
  const int nw = std::max(1, static_cast<int>(std::lround(mask.w * d.param)));
  Mask small = resize_mask(mask, nh, nw);
  return resize_mask(small, mask.h, mask.w);
}

MetricReport evaluate_manifest(const ModelHandle* model, const std::string& manifest_path,
                               const EvalOptions& opts, const Distortion* distortion) {
  if (!opts.oracle && model == nullptr)
    throw std::invalid_argument("evaluate: need a model unless oracle mode is set");
  const auto records = read_manifest(manifest_path);
  if (records.empty()) throw std::runtime_error("evaluate: manifest is empty");
  const std::string root = manifest_dir(manifest_path);

  const int mh = model ? model->config.image_h : 0;
  const int mw = model ? model->config.image_w : 0;

  std::vector<double> image_scores;
  std::vector<int> image_labels;
  std::vector<double> per_image_auc, per_image_f1;
  std::vector<double> pooled_scores;
  std::vector<int> pooled_labels;
  int64_t n_pixels = 0, skipped = 0;

  for (size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    Image image;
    Mask mask;
    try {
      image = load_image((fs::path(root) / rec.image_path).string());
      mask = load_mask((fs::path(root) / rec.mask_path).string());
    } catch (const std::exception& e) {
      std::cerr << "warning: skipping unreadable sample " << rec.image_path << ": " << e.what()
                << "\n";
      ++skipped;
      continue;
    }
    if (distortion) {
      image = apply_distortion(image, *distortion, Rng::derive(opts.seed, i));
      mask = apply_distortion_mask(mask, *distortion);
    }
    const int th = model ? mh : image.h;
    const int tw = model ? mw : image.w;
    if (image.h != th || image.w != tw) image = resize(image, th, tw, ResizeFilter::Bilinear);
    if (mask.h != th || mask.w != tw) mask = resize_mask(mask, th, tw);

    double score;
    Tensor mask_scores;
    if (opts.oracle) {
      score = rec.label;
      mask_scores = mask_to_tensor(mask);
    } else {
      PredictionOutput pred = forward(image, model->weights, model->config, false);
      score = pred.label_score;
      mask_scores = std::move(pred.mask);
    }
    image_scores.push_back(score);
    image_labels.push_back(rec.label);

    if (mask_has_both_classes(mask)) {
      std::vector<double> ps(mask_scores.data.begin(), mask_scores.data.end());
      std::vector<int> pl(mask.data.begin(), mask.data.end());
      n_pixels += static_cast<int64_t>(ps.size());
      if (opts.pixel_pooled) {
        pooled_scores.insert(pooled_scores.end(), ps.begin(), ps.end());
        pooled_labels.insert(pooled_labels.end(), pl.begin(), pl.end());
      } else {
        per_image_auc.push_back(auc(ps, pl));
        per_image_f1.push_back(f1_at_threshold(ps, pl, eer_threshold(ps, pl)));
      }
    }
  }
  if (skipped) std::cerr << "warning: " << skipped << " samples were skipped\n";
  if (image_scores.empty()) throw std::runtime_error("evaluate: no readable samples");

  MetricReport report;
  report.n_images = static_cast<int64_t>(image_scores.size());
  report.n_pixels = n_pixels;
  report.image_auc = auc(image_scores, image_labels);
  report.eer_threshold = eer_threshold(image_scores, image_labels);
  report.image_f1 = f1_at_threshold(image_scores, image_labels, report.eer_threshold);
  if (opts.pixel_pooled) {
    report.pixel_auc = auc(pooled_scores, pooled_labels);
    report.pixel_f1 =
        f1_at_threshold(pooled_scores, pooled_labels, eer_threshold(pooled_scores, pooled_labels));
  } else {
    report.pixel_auc = sorted_mean(per_image_auc);
    report.pixel_f1 = sorted_mean(per_image_f1);
  }
  return report;
}

std::vector<RobustnessRow> robustness_suite(const ModelHandle* model,
                                            const std::string& manifest_path,
                                            const EvalOptions& opts) {
  std::vector<RobustnessRow> rows;
  for (const auto& d : distortion_grid()) {
    MetricReport report = evaluate_manifest(model, manifest_path, opts,
                                            d.kind == "none" ? nullptr : &d);
    rows.push_back({d.kind, d.param, report.pixel_auc});
  }
  return rows;
}

std::string robustness_table(const std::vector<RobustnessRow>& rows) {
  std::string out = "distortion\tparam\tpixel_auc\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%s\t%g\t%.6f\n", r.kind.c_str(), r.param, r.pixel_auc);
    out += buf;
  }
  return out;
}

std::vector<std::string> export_affinity_maps(const ModelHandle& model, const Image& image,
                                              const std::string& out_dir) {
  Image input = image;
  if (input.h != model.config.image_h || input.w != model.config.image_w)
    input = resize(input, model.config.image_h, model.config.image_w, ResizeFilter::Bilinear);
  PredictionOutput pred = forward(input, model.weights, model.config, true);
  const AffinityMatrix& a1 = pred.affinities.front();
  const int n = a1.objects;
  const int l = model.config.tokens_per_modality();
  const int hs = model.config.grid_h(), ws = model.config.grid_w();

  fs::create_directories(out_dir);
  std::vector<std::string> paths;
  for (int p = 0; p < n; ++p) {
    // Head-averaged affinity row restricted to the RGB token half.
    Tensor grid({hs, ws});
    for (int t = 0; t < l; ++t) {
      double v = 0.0;
      for (int h = 0; h < a1.heads; ++h)
        v += a1.weights[(static_cast<int64_t>(h) * n + p) * a1.keys + t];
      grid[t] = v / a1.heads;
    }
    char name[64];
    std::snprintf(name, sizeof(name), "prototype_%02d.png", p);
    const std::string path = (fs::path(out_dir) / name).string();
    save_gray_png(path, grid);
    paths.push_back(path);
  }
  return paths;
}

PredictionOutput predict_image(const ModelHandle& model, const Image& image) {
  Image input = image;
  if (input.h != model.config.image_h || input.w != model.config.image_w)
    input = resize(input, model.config.image_h, model.config.image_w, ResizeFilter::Bilinear);
  PredictionOutput pred = forward(input, model.weights, model.config, false);
  if (pred.mask.shape[0] != image.h || pred.mask.shape[1] != image.w) {
    Image soft(pred.mask.shape[0], pred.mask.shape[1], 1);
    soft.data = pred.mask.data;
    soft = resize(soft, image.h, image.w, ResizeFilter::Bilinear);
    pred.mask = Tensor({image.h, image.w});
    pred.mask.data = soft.data;
  }
  return pred;
}

}  // namespace tfm
