#include "tamperformer/config.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace tfm {

RunConfig::RunConfig() {
  define("seed", "42");
  define("out", "out");
  define("model.image_size", "256");
  define("model.stem", "3,16,2,gelu;3,32,2,gelu;3,48,2,gelu;3,64,2,none");
  define("model.prototypes", "16");
  define("model.heads", "4");
  define("model.depth", "8");
  define("model.bcim_window", "3");
  define("model.alpha", "0.1");
  define("model.ffn_width", "256");
  define("model.lambda", "1.0");
  define("model.use_hfe", "true");
  define("model.use_bcim", "true");
  define("train.lr", "0.0001");
  define("train.batch", "24");
  define("train.epochs", "90");
  define("train.lr_step", "30");
  define("train.lr_decay", "10");
  define("train.checkpoint_every", "10");
  define("train.threads", "1");
  define("train.resume", "");
  define("synth.n", "1000");
  define("synth.image_size", "256");
  define("synth.mix", "pristine=0.25,copy_move=0.25,splice=0.25,removal=0.25");
  define("synth.source_dir", "");
  define("synth.degrade_prob", "0.25");
  define("synth.blend", "true");
  define("synth.area_min", "0.05");
  define("synth.area_max", "0.25");
  define("data.root", ".");
  define("data.manifest", "");
  define("data.checkpoint", "");
  define("eval.pixel_pooled", "false");
  define("eval.oracle", "false");
}

void RunConfig::define(const std::string& key, const std::string& default_value) {
  order_.push_back(key);
  values_[key] = default_value;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw std::invalid_argument("unknown config key: " + key);
  it->second = value;
}

const std::string& RunConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw std::invalid_argument("unknown config key: " + key);
  return it->second;
}

int RunConfig::get_int(const std::string& key) const {
  try {
    return std::stoi(get(key));
  } catch (const std::exception&) {
    throw std::invalid_argument("config key " + key + " is not an integer: " + get(key));
  }
}

double RunConfig::get_double(const std::string& key) const {
  try {
    return std::stod(get(key));
  } catch (const std::exception&) {
    throw std::invalid_argument("config key " + key + " is not a number: " + get(key));
  }
}

bool RunConfig::get_bool(const std::string& key) const {
  const std::string& v = get(key);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::invalid_argument("config key " + key + " is not a boolean: " + v);
}

void RunConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file: " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto strip = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    line = strip(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
    set(strip(line.substr(0, eq)), strip(line.substr(eq + 1)));
  }
}

void RunConfig::apply_override(const std::string& key_equals_value) {
  const auto eq = key_equals_value.find('=');
  if (eq == std::string::npos)
    throw std::invalid_argument("override must be key=value: " + key_equals_value);
  set(key_equals_value.substr(0, eq), key_equals_value.substr(eq + 1));
}

void RunConfig::apply_tiny_preset() {
  set("model.image_size", "32");
  set("model.stem", "3,8,2,gelu;3,8,2,none");
  set("model.prototypes", "2");
  set("model.heads", "1");
  set("model.depth", "1");
  set("model.bcim_window", "3");
  set("model.ffn_width", "16");
  set("train.lr", "0.001");
  set("train.batch", "8");
  set("train.epochs", "200");
  set("train.lr_step", "120");
  set("train.checkpoint_every", "50");
  set("synth.image_size", "32");
  set("synth.n", "32");
}

std::string RunConfig::serialize() const {
  std::string out;
  for (const auto& key : order_) out += key + " = " + values_.at(key) + "\n";
  return out;
}

void RunConfig::write_effective(const std::string& out_dir) const {
  fs::create_directories(out_dir);
  const std::string path = (fs::path(out_dir) / "effective.cfg").string();
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write effective config: " + path);
  out << serialize();
}

ModelConfig RunConfig::model_config() const {
  ModelConfig c;
  c.image_h = c.image_w = get_int("model.image_size");
  c.stem = parse_stem_spec(get("model.stem"));
  c.prototypes = get_int("model.prototypes");
  c.heads = get_int("model.heads");
  c.depth = get_int("model.depth");
  c.bcim_window = get_int("model.bcim_window");
  c.alpha = get_double("model.alpha");
  c.ffn_width = get_int("model.ffn_width");
  c.lambda = get_double("model.lambda");
  c.use_hfe = get_bool("model.use_hfe");
  c.use_bcim = get_bool("model.use_bcim");
  c.seed = seed();
  c.validate();
  return c;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig t;
  t.lr = get_double("train.lr");
  t.batch = get_int("train.batch");
  t.epochs = get_int("train.epochs");
  t.lr_step = get_int("train.lr_step");
  t.lr_decay = get_double("train.lr_decay");
  t.checkpoint_every = get_int("train.checkpoint_every");
  t.threads = get_int("train.threads");
  t.resume = get("train.resume");
  if (t.lr <= 0 || t.batch < 1 || t.epochs < 1 || t.lr_step < 1 || t.lr_decay <= 0)
    throw std::invalid_argument("invalid training hyperparameters");
  return t;
}

GenConfig RunConfig::gen_config() const {
  GenConfig g;
  g.n = get_int("synth.n");
  g.image_size = get_int("synth.image_size");
  g.mix = parse_mix(get("synth.mix"));
  g.source_dir = get("synth.source_dir");
  if (!g.source_dir.empty()) g.source_dir = resolve_data_path(g.source_dir);
  g.degrade_prob = get_double("synth.degrade_prob");
  g.blend = get_bool("synth.blend");
  g.area_min = get_double("synth.area_min");
  g.area_max = get_double("synth.area_max");
  g.seed = seed();
  g.out_dir = out_dir();
  if (g.n < 1 || g.image_size < 8) throw std::invalid_argument("invalid synth config");
  if (g.degrade_prob < 0 || g.degrade_prob > 1)
    throw std::invalid_argument("synth.degrade_prob must be in [0,1]");
  return g;
}

std::string RunConfig::resolve_data_path(const std::string& path) const {
  if (path.empty()) return path;
  fs::path p(path);
  if (p.is_absolute()) return path;
  return (fs::path(get("data.root")) / p).string();
}

std::map<std::string, double> RunConfig::parse_mix(const std::string& text) {
  std::map<std::string, double> mix;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("mix entries must be kind=fraction: " + item);
    const std::string kind = item.substr(0, eq);
    tamper_kind_from_name(kind);
    mix[kind] = std::stod(item.substr(eq + 1));
  }
  if (mix.empty()) throw std::invalid_argument("mix is empty");
  return mix;
}

}  // namespace tfm
