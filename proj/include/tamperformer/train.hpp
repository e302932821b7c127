#pragma once

#include <string>
#include <vector>

#include "tamperformer/checkpoint.hpp"
#include "tamperformer/model.hpp"
#include "tamperformer/synth.hpp"

namespace tfm {

struct TrainConfig {
  double lr = 1e-4;
  int batch = 24;
  int epochs = 90;
  int lr_step = 30;        // epochs between decays
  double lr_decay = 10.0;  // divide the rate by this
  int checkpoint_every = 10;
  int threads = 1;
  std::string resume;  // checkpoint to continue from
};

struct TrainSample {
  Image image;
  Tensor mask;  // {H, W} binary
  int label = 0;
};

// In-memory dataset resized to the model input; pixels kept as bytes.
class Dataset {
 public:
  Dataset(const std::string& manifest_path, int image_h, int image_w);
  size_t size() const { return images_.size(); }
  TrainSample sample(size_t i) const;
  int label(size_t i) const { return labels_[i]; }

 private:
  int h_, w_;
  std::vector<std::vector<uint8_t>> images_;  // HWC RGB bytes
  std::vector<Mask> masks_;
  std::vector<int> labels_;
};

struct EpochStats {
  int epoch = 0;
  double loss = 0.0;
  double loss_cls = 0.0;
  double loss_seg = 0.0;
  double lr = 0.0;
};

// Adam over the full parameter set with a step-decay schedule. Shuffling,
// moments and step count are checkpointed so a resumed run stays bit-exact.
class Trainer {
 public:
  Trainer(const ModelConfig& config, const TrainConfig& train_config, uint64_t seed);
  Trainer(const Checkpoint& checkpoint, const TrainConfig& train_config);

  LossBreakdown train_step(const Dataset& data, const std::vector<int>& indices);
  EpochStats train_epoch(const Dataset& data);

  // Full run with per-epoch JSONL logging and periodic checkpoints; returns
  // the final checkpoint path.
  std::string run(const Dataset& data, const std::string& out_dir,
                  std::vector<EpochStats>* history = nullptr);

  const ParamStore& weights() const { return weights_; }
  const ModelConfig& model_config() const { return config_; }
  int epochs_done() const { return epochs_done_; }
  double current_lr() const;
  Checkpoint make_checkpoint() const;

 private:
  void adam_update(const ParamStore& grads, double lr);

  ModelConfig config_;
  TrainConfig train_config_;
  ParamStore weights_;
  ParamStore m_, v_;
  int64_t step_count_ = 0;
  int epochs_done_ = 0;
  Rng shuffle_rng_;
};

}  // namespace tfm
