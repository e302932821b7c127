#include "tamperformer/commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>

#include "tamperformer/eval.hpp"
#include "tamperformer/gradcheck.hpp"
#include "tamperformer/train.hpp"

namespace fs = std::filesystem;

namespace tfm {

namespace {

ModelHandle load_model(const RunConfig& config) {
  const std::string path = config.resolve_data_path(config.get("data.checkpoint"));
  if (path.empty()) throw std::invalid_argument("data.checkpoint is required");
  Checkpoint ckpt = load_checkpoint(path);
  return ModelHandle{ckpt.config, std::move(ckpt.weights)};
}

std::string require_manifest(const RunConfig& config) {
  const std::string manifest = config.resolve_data_path(config.get("data.manifest"));
  if (manifest.empty()) throw std::invalid_argument("data.manifest is required");
  return manifest;
}

}  // namespace

int cmd_synth(const RunConfig& config) {
  config.write_effective(config.out_dir());
  GenConfig gen = config.gen_config();
  const std::string manifest = generate_dataset(gen);
  std::map<std::string, int> kind_counts;
  for (const auto& rec : read_manifest(manifest)) kind_counts[rec.kind]++;
  std::cout << "manifest: " << manifest << "\n";
  for (const auto& [kind, count] : kind_counts) std::cout << kind << ": " << count << "\n";
  return kExitOk;
}

int cmd_train(const RunConfig& config) {
  config.write_effective(config.out_dir());
  const TrainConfig tc = config.train_config();
  const std::string manifest = require_manifest(config);

  std::unique_ptr<Trainer> trainer;
  if (!tc.resume.empty()) {
    trainer = std::make_unique<Trainer>(load_checkpoint(config.resolve_data_path(tc.resume)), tc);
  } else {
    trainer = std::make_unique<Trainer>(config.model_config(), tc, config.seed());
  }
  Dataset data(manifest, trainer->model_config().image_h, trainer->model_config().image_w);
  const std::string ckpt = trainer->run(data, config.out_dir());
  std::cout << "checkpoint: " << ckpt << "\n";
  return kExitOk;
}

int cmd_eval(const RunConfig& config) {
  config.write_effective(config.out_dir());
  EvalOptions opts;
  opts.pixel_pooled = config.get_bool("eval.pixel_pooled");
  opts.oracle = config.get_bool("eval.oracle");
  opts.seed = config.seed();
  const std::string manifest = require_manifest(config);
  MetricReport report;
  if (opts.oracle) {
    report = evaluate_manifest(nullptr, manifest, opts);
  } else {
    ModelHandle model = load_model(config);
    report = evaluate_manifest(&model, manifest, opts);
  }
  const std::string path = (fs::path(config.out_dir()) / "metric_report.json").string();
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  out << report.to_json();
  std::cout << report.to_json();
  return kExitOk;
}

int cmd_robustness(const RunConfig& config) {
  config.write_effective(config.out_dir());
  EvalOptions opts;
  opts.pixel_pooled = config.get_bool("eval.pixel_pooled");
  opts.oracle = config.get_bool("eval.oracle");
  opts.seed = config.seed();
  const std::string manifest = require_manifest(config);
  std::vector<RobustnessRow> rows;
  if (opts.oracle) {
    rows = robustness_suite(nullptr, manifest, opts);
  } else {
    ModelHandle model = load_model(config);
    rows = robustness_suite(&model, manifest, opts);
  }
  const std::string table = robustness_table(rows);
  const std::string path = (fs::path(config.out_dir()) / "robustness.tsv").string();
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  out << table;
  std::cout << table;
  return kExitOk;
}

int cmd_predict(const RunConfig& config, const std::string& image_path,
                const std::string& affinity_dir) {
  config.write_effective(config.out_dir());
  ModelHandle model = load_model(config);
  Image image = load_image(config.resolve_data_path(image_path));
  PredictionOutput pred = predict_image(model, image);

  fs::create_directories(config.out_dir());
  Image soft(image.h, image.w, 1);
  soft.data = pred.mask.data;
  save_png((fs::path(config.out_dir()) / "mask_soft.png").string(), soft);
  Mask bin(image.h, image.w);
  for (int64_t i = 0; i < pred.mask.numel(); ++i) bin.data[static_cast<size_t>(i)] = pred.mask[i] > 0.5;
  save_mask_png((fs::path(config.out_dir()) / "mask_bin.png").string(), bin);
  if (!affinity_dir.empty()) export_affinity_maps(model, image, affinity_dir);
  std::printf("tamper_score: %.6f\n", pred.label_score);
  return kExitOk;
}

int cmd_gradcheck(const RunConfig& config, const std::string& corrupt_group) {
  config.write_effective(config.out_dir());
  ModelConfig mc = config.model_config();
  GradCheckReport report = gradcheck(mc, config.seed(), 1e-5, 1e-4, corrupt_group);

  fs::create_directories(config.out_dir());
  std::ofstream out((fs::path(config.out_dir()) / "gradcheck.txt").string(), std::ios::trunc);
  for (const auto& g : report.groups) {
    char line[256];
    std::snprintf(line, sizeof(line), "%-28s max_rel_err %.3e  %s\n", g.name.c_str(),
                  g.max_rel_err, g.passed ? "ok" : "FAIL");
    std::cout << line;
    out << line;
  }
  std::printf("worst: %.3e  %s\n", report.worst, report.passed ? "PASS" : "FAIL");
  out << "worst: " << report.worst << (report.passed ? " PASS" : " FAIL") << "\n";
  if (!report.passed) {
    for (const auto& g : report.groups)
      if (!g.passed) std::printf("failed group: %s\n", g.name.c_str());
    return kExitVerificationFailure;
  }
  return kExitOk;
}

int cmd_hfe(const RunConfig& config, const std::string& image_path) {
  config.write_effective(config.out_dir());
  Image image = load_image(config.resolve_data_path(image_path));
  Image xh = extract_high_frequency(image, HighPassSpec{config.get_double("model.alpha")});
  Tensor grid({xh.h, xh.w});
  grid.data = xh.data;
  fs::create_directories(config.out_dir());
  const std::string path = (fs::path(config.out_dir()) / "high_freq.png").string();
  save_gray_png(path, grid);
  std::cout << path << "\n";
  return kExitOk;
}

}  // namespace tfm
