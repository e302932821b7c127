#pragma once

#include <map>
#include <string>
#include <vector>

#include "tamperformer/model.hpp"
#include "tamperformer/synth.hpp"
#include "tamperformer/train.hpp"

namespace tfm {

// Flat dotted-key configuration with a fixed key registry. Unknown keys are
// rejected everywhere (file, CLI overrides), so typos fail fast.
class RunConfig {
 public:
  RunConfig();

  void set(const std::string& key, const std::string& value);
  void load_file(const std::string& path);
  void apply_override(const std::string& key_equals_value);  // "key=value"
  void apply_tiny_preset();

  const std::string& get(const std::string& key) const;
  int get_int(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;

  // Canonical "key = value" text, one line per key in registry order.
  std::string serialize() const;
  void write_effective(const std::string& out_dir) const;

  ModelConfig model_config() const;
  TrainConfig train_config() const;
  GenConfig gen_config() const;
  uint64_t seed() const { return static_cast<uint64_t>(std::stoull(get("seed"))); }
  std::string out_dir() const { return get("out"); }

  // Resolves a path against data.root unless it is already absolute.
  std::string resolve_data_path(const std::string& path) const;

  static std::map<std::string, double> parse_mix(const std::string& text);

 private:
  std::vector<std::string> order_;
  std::map<std::string, std::string> values_;
  void define(const std::string& key, const std::string& default_value);
};

}  // namespace tfm
