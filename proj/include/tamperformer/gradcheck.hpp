#pragma once

#include <string>
#include <vector>

#include "tamperformer/model.hpp"

namespace tfm {

struct GradCheckGroup {
  std::string name;
  double max_rel_err = 0.0;
  bool passed = true;
};

struct GradCheckReport {
  std::vector<GradCheckGroup> groups;
  double worst = 0.0;
  bool passed = true;
};

// Central finite differences against the analytic gradients for every
// parameter tensor, on a seeded random sample. `corrupt_group` perturbs one
// analytic gradient before comparison (fault-injection hook for tests).
GradCheckReport gradcheck(const ModelConfig& config, uint64_t seed, double step = 1e-5,
                          double tolerance = 1e-4, const std::string& corrupt_group = "");

}  // namespace tfm
