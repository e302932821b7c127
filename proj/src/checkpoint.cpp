#include "tamperformer/checkpoint.hpp"

#include <json.hpp>

#include <cstring>
#include <fstream>

namespace tfm {

namespace {

constexpr char kMagic[8] = {'T', 'F', 'M', 'C', 'K', 'P', 'T', '1'};
constexpr int kFormatVersion = 1;

using json = nlohmann::ordered_json;

json config_to_json(const ModelConfig& c) {
  return json{{"image_h", c.image_h},
              {"image_w", c.image_w},
              {"stem", stem_spec_to_string(c.stem)},
              {"prototypes", c.prototypes},
              {"heads", c.heads},
              {"depth", c.depth},
              {"bcim_window", c.bcim_window},
              {"alpha", c.alpha},
              {"ffn_width", c.ffn_width},
              {"lambda", c.lambda},
              {"use_hfe", c.use_hfe},
              {"use_bcim", c.use_bcim},
              {"seed", c.seed}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  c.image_h = j.at("image_h").get<int>();
  c.image_w = j.at("image_w").get<int>();
  c.stem = parse_stem_spec(j.at("stem").get<std::string>());
  c.prototypes = j.at("prototypes").get<int>();
  c.heads = j.at("heads").get<int>();
  c.depth = j.at("depth").get<int>();
  c.bcim_window = j.at("bcim_window").get<int>();
  c.alpha = j.at("alpha").get<double>();
  c.ffn_width = j.at("ffn_width").get<int>();
  c.lambda = j.at("lambda").get<double>();
  c.use_hfe = j.at("use_hfe").get<bool>();
  c.use_bcim = j.at("use_bcim").get<bool>();
  c.seed = j.at("seed").get<uint64_t>();
  return c;
}

void write_store(std::ofstream& out, const ParamStore& store) {
  for (const auto& name : store.names()) {
    const Tensor& t = store.at(name);
    out.write(reinterpret_cast<const char*>(t.data.data()),
              static_cast<std::streamsize>(t.data.size() * sizeof(double)));
  }
}

void read_store(std::ifstream& in, ParamStore& store) {
  for (const auto& name : store.names()) {
    Tensor& t = store.at(name);
    in.read(reinterpret_cast<char*>(t.data.data()),
            static_cast<std::streamsize>(t.data.size() * sizeof(double)));
  }
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  json header;
  header["format_version"] = kFormatVersion;
  header["model"] = config_to_json(ckpt.config);
  json params = json::array();
  for (const auto& name : ckpt.weights.names())
    params.push_back(json{{"name", name}, {"shape", ckpt.weights.at(name).shape}});
  header["params"] = std::move(params);
  if (ckpt.optimizer) {
    const auto& opt = *ckpt.optimizer;
    header["optimizer"] = json{{"step", opt.step},
                               {"epoch", opt.epoch},
                               {"shuffle_rng", std::vector<uint64_t>(opt.shuffle_rng.begin(),
                                                                     opt.shuffle_rng.end())}};
  } else {
    header["optimizer"] = nullptr;
  }
  const std::string head = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out.write(kMagic, sizeof(kMagic));
  const uint64_t hlen = head.size();
  out.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
  out.write(head.data(), static_cast<std::streamsize>(head.size()));
  write_store(out, ckpt.weights);
  if (ckpt.optimizer) {
    write_store(out, ckpt.optimizer->m);
    write_store(out, ckpt.optimizer->v);
  }
  if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("not a checkpoint file: " + path);
  uint64_t hlen = 0;
  in.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
  std::string head(hlen, '\0');
  in.read(head.data(), static_cast<std::streamsize>(hlen));
  if (!in) throw std::runtime_error("truncated checkpoint header: " + path);
  json header = json::parse(head);
  if (header.at("format_version").get<int>() != kFormatVersion)
    throw std::runtime_error("unsupported checkpoint version in " + path);

  Checkpoint ckpt;
  ckpt.config = config_from_json(header.at("model"));
  for (const auto& p : header.at("params"))
    ckpt.weights.add(p.at("name").get<std::string>(),
                     Tensor(p.at("shape").get<std::vector<int>>()));
  read_store(in, ckpt.weights);
  if (!header.at("optimizer").is_null()) {
    OptimizerState opt;
    opt.m = ckpt.weights.zeros_like();
    opt.v = ckpt.weights.zeros_like();
    read_store(in, opt.m);
    read_store(in, opt.v);
    opt.step = header.at("optimizer").at("step").get<int64_t>();
    opt.epoch = header.at("optimizer").at("epoch").get<int>();
    auto rng = header.at("optimizer").at("shuffle_rng").get<std::vector<uint64_t>>();
    if (rng.size() != 4) throw std::runtime_error("bad rng state in checkpoint");
    std::copy(rng.begin(), rng.end(), opt.shuffle_rng.begin());
    ckpt.optimizer = std::move(opt);
  }
  if (!in) throw std::runtime_error("truncated checkpoint payload: " + path);
  return ckpt;
}

}  // namespace tfm
