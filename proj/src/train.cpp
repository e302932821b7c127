#include "tamperformer/train.hpp"

#include <json.hpp>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <thread>

namespace fs = std::filesystem;

namespace tfm {

namespace {
constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;
}  // namespace

Dataset::Dataset(const std::string& manifest_path, int image_h, int image_w)
    : h_(image_h), w_(image_w) {
  const auto records = read_manifest(manifest_path);
  if (records.empty()) throw std::runtime_error("dataset: manifest is empty");
  const std::string root = manifest_dir(manifest_path);
  for (const auto& rec : records) {
    Image img = load_image((fs::path(root) / rec.image_path).string());
    Mask mask = load_mask((fs::path(root) / rec.mask_path).string());
    if (img.h != h_ || img.w != w_) img = resize(img, h_, w_, ResizeFilter::Bilinear);
    if (mask.h != h_ || mask.w != w_) mask = resize_mask(mask, h_, w_);
    std::vector<uint8_t> bytes(img.data.size());
    for (size_t i = 0; i < bytes.size(); ++i)
      bytes[i] = static_cast<uint8_t>(std::lround(std::clamp(img.data[i], 0.0, 1.0) * 255.0));
    images_.push_back(std::move(bytes));
    masks_.push_back(std::move(mask));
    labels_.push_back(rec.label);
  }
}

TrainSample Dataset::sample(size_t i) const {
  TrainSample s;
  s.image = Image(h_, w_, 3);
  const auto& bytes = images_[i];
  for (size_t j = 0; j < bytes.size(); ++j) s.image.data[j] = bytes[j] / 255.0;
  s.mask = mask_to_tensor(masks_[i]);
  s.label = labels_[i];
  return s;
}

Trainer::Trainer(const ModelConfig& config, const TrainConfig& train_config, uint64_t seed)
    : config_(config),
      train_config_(train_config),
      weights_(init_weights(config)),
      m_(weights_.zeros_like()),
      v_(weights_.zeros_like()),
      shuffle_rng_(Rng::derive(seed, 0x5u)) {
  config_.validate();
}

Trainer::Trainer(const Checkpoint& checkpoint, const TrainConfig& train_config)
    : config_(checkpoint.config),
      train_config_(train_config),
      weights_(checkpoint.weights),
      m_(checkpoint.weights.zeros_like()),
      v_(checkpoint.weights.zeros_like()),
      shuffle_rng_(0) {
  if (!checkpoint.optimizer) throw std::invalid_argument("resume: checkpoint has no optimizer state");
  m_ = checkpoint.optimizer->m;
  v_ = checkpoint.optimizer->v;
  step_count_ = checkpoint.optimizer->step;
  epochs_done_ = checkpoint.optimizer->epoch;
  shuffle_rng_.set_state(checkpoint.optimizer->shuffle_rng);
}

double Trainer::current_lr() const {
  const int decays = train_config_.lr_step > 0 ? epochs_done_ / train_config_.lr_step : 0;
  return train_config_.lr / std::pow(train_config_.lr_decay, decays);
}

void Trainer::adam_update(const ParamStore& grads, double lr) {
  ++step_count_;
  const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(step_count_));
  const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(step_count_));
  for (const auto& name : weights_.names()) {
    Tensor& w = weights_.at(name);
    const Tensor& g = grads.at(name);
    Tensor& m = m_.at(name);
    Tensor& v = v_.at(name);
    for (int64_t i = 0; i < w.numel(); ++i) {
      m[i] = kAdamBeta1 * m[i] + (1.0 - kAdamBeta1) * g[i];
      v[i] = kAdamBeta2 * v[i] + (1.0 - kAdamBeta2) * g[i] * g[i];
      w[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + kAdamEps);
    }
  }
}

LossBreakdown Trainer::train_step(const Dataset& data, const std::vector<int>& indices) {
  if (indices.empty()) throw std::invalid_argument("train_step: empty batch");
  const size_t n = indices.size();
  const int threads = std::max(1, train_config_.threads);
  ParamStore acc = weights_.zeros_like();
  std::vector<LossBreakdown> losses(n);

  if (threads == 1) {
    for (size_t i = 0; i < n; ++i) {
      TrainSample s = data.sample(static_cast<size_t>(indices[i]));
      losses[i] = gradients(s.image, s.label, s.mask, weights_, config_, acc);
    }
  } else {
    // Workers fill per-sample gradient stores; the reduction below runs in
    // index order, so the result matches the serial path bit for bit.
    std::vector<ParamStore> per_sample(n);
    std::vector<std::thread> pool;
    std::atomic<size_t> next{0};
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
          per_sample[i] = weights_.zeros_like();
          TrainSample s = data.sample(static_cast<size_t>(indices[i]));
          losses[i] = gradients(s.image, s.label, s.mask, weights_, config_, per_sample[i]);
        }
      });
    for (auto& th : pool) th.join();
    for (size_t i = 0; i < n; ++i)
      for (const auto& name : acc.names()) {
        Tensor& a = acc.at(name);
        const Tensor& g = per_sample[i].at(name);
        for (int64_t j = 0; j < a.numel(); ++j) a[j] += g[j];
      }
  }

  const double inv = 1.0 / static_cast<double>(n);
  for (const auto& name : acc.names())
    for (auto& g : acc.at(name).data) g *= inv;
  adam_update(acc, current_lr());

  LossBreakdown mean;
  for (const auto& l : losses) {
    mean.total += l.total * inv;
    mean.cls += l.cls * inv;
    mean.seg += l.seg * inv;
  }
  return mean;
}

EpochStats Trainer::train_epoch(const Dataset& data) {
  std::vector<int> order(data.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  shuffle_rng_.shuffle(order);

  EpochStats stats;
  stats.lr = current_lr();
  const int batch = std::max(1, train_config_.batch);
  int steps = 0;
  for (size_t off = 0; off < order.size(); off += static_cast<size_t>(batch)) {
    std::vector<int> indices(order.begin() + static_cast<int64_t>(off),
                             order.begin() + static_cast<int64_t>(std::min(off + batch, order.size())));
    LossBreakdown l = train_step(data, indices);
    stats.loss += l.total;
    stats.loss_cls += l.cls;
    stats.loss_seg += l.seg;
    ++steps;
  }
  stats.loss /= steps;
  stats.loss_cls /= steps;
  stats.loss_seg /= steps;
  ++epochs_done_;
  stats.epoch = epochs_done_;
  return stats;
}

Checkpoint Trainer::make_checkpoint() const {
  Checkpoint ckpt;
  ckpt.config = config_;
  ckpt.weights = weights_;
  OptimizerState opt;
  opt.m = m_;
  opt.v = v_;
  opt.step = step_count_;
  opt.epoch = epochs_done_;
  opt.shuffle_rng = shuffle_rng_.state();
  ckpt.optimizer = std::move(opt);
  return ckpt;
}

std::string Trainer::run(const Dataset& data, const std::string& out_dir,
                         std::vector<EpochStats>* history) {
  fs::create_directories(out_dir);
  const std::string log_path = (fs::path(out_dir) / "metrics.jsonl").string();
  std::ofstream log(log_path, epochs_done_ > 0 ? std::ios::app : std::ios::trunc);
  if (!log) throw std::runtime_error("cannot write metrics log: " + log_path);
  const std::string latest = (fs::path(out_dir) / "checkpoint_latest.tfm").string();
  const std::string final_path = (fs::path(out_dir) / "checkpoint_final.tfm").string();

  while (epochs_done_ < train_config_.epochs) {
    EpochStats stats = train_epoch(data);
    nlohmann::ordered_json j{{"epoch", stats.epoch},
                             {"loss", stats.loss},
                             {"loss_cls", stats.loss_cls},
                             {"loss_seg", stats.loss_seg},
                             {"lr", stats.lr}};
    log << j.dump() << "\n";
    log.flush();
    if (history) history->push_back(stats);
    if (train_config_.checkpoint_every > 0 && stats.epoch % train_config_.checkpoint_every == 0)
      save_checkpoint(latest, make_checkpoint());
  }
  save_checkpoint(final_path, make_checkpoint());
  return final_path;
}

}  // namespace tfm
