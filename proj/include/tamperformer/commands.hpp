#pragma once

#include <string>

#include "tamperformer/config.hpp"

namespace tfm {

// Exit codes shared by the CLI: 0 success, 1 verification/metric failure,
// 2 usage error, 3 I/O error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitVerificationFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;

int cmd_synth(const RunConfig& config);
int cmd_train(const RunConfig& config);
int cmd_eval(const RunConfig& config);
int cmd_robustness(const RunConfig& config);
int cmd_predict(const RunConfig& config, const std::string& image_path,
                const std::string& affinity_dir);
int cmd_gradcheck(const RunConfig& config, const std::string& corrupt_group);
int cmd_hfe(const RunConfig& config, const std::string& image_path);

}  // namespace tfm
