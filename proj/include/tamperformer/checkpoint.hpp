#pragma once

#include <optional>
#include <string>

#include "tamperformer/model.hpp"

namespace tfm {

// Adam moments plus the bookkeeping needed to resume mid-run bit-exactly.
struct OptimizerState {
  ParamStore m;
  ParamStore v;
  int64_t step = 0;
  int epoch = 0;
  std::array<uint64_t, 4> shuffle_rng{};
};

struct Checkpoint {
  ModelConfig config;
  ParamStore weights;
  std::optional<OptimizerState> optimizer;
};

// Binary container: magic, little-endian JSON header (config + tensor table),
// then raw float64 payload. Round-trips weights losslessly.
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace tfm
