#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

#include "tamperformer/commands.hpp"

using namespace tfm;

int main(int argc, char** argv) {
  CLI::App app{"tamperformer: image manipulation detection and localization"};
  app.require_subcommand(1);

  std::string config_file, out, checkpoint, manifest, seed_str;
  std::vector<std::string> overrides;
  bool tiny = false;
  app.add_option("--config", config_file, "Config file (key = value lines)");
  app.add_option("--seed", seed_str, "Global seed");
  app.add_option("--out", out, "Output directory");
  app.add_option("--checkpoint", checkpoint, "Model checkpoint path");
  app.add_flag("--tiny", tiny, "Apply the desk-scale tiny preset");
  app.add_option("--set", overrides, "Override any config key (key=value), repeatable");

  auto* synth = app.add_subcommand("synth", "Generate a synthetic tampering dataset");
  std::string synth_n, synth_mix, synth_src, synth_size;
  synth->add_option("--n", synth_n, "Number of samples");
  synth->add_option("--mix", synth_mix, "Kind mix, e.g. pristine=0.25,splice=0.75");
  synth->add_option("--src", synth_src, "Source image directory (empty: procedural)");
  synth->add_option("--size", synth_size, "Sample image size");

  auto* train = app.add_subcommand("train", "Train a model on a dataset manifest");
  std::string train_manifest, resume, epochs, lr, batch;
  train->add_option("--manifest", train_manifest, "Dataset manifest (jsonl)");
  train->add_option("--resume", resume, "Resume from checkpoint");
  train->add_option("--epochs", epochs, "Training epochs");
  train->add_option("--lr", lr, "Learning rate");
  train->add_option("--batch", batch, "Batch size");

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a manifest");
  bool oracle = false, pooled = false;
  eval->add_option("--manifest", manifest, "Dataset manifest (jsonl)");
  eval->add_flag("--oracle", oracle, "Score ground truth instead of the model (self-check)");
  eval->add_flag("--pooled", pooled, "Pool pixels across images for pixel metrics");

  auto* robust = app.add_subcommand("robustness", "Run the distortion robustness grid");
  bool r_oracle = false;
  robust->add_option("--manifest", manifest, "Dataset manifest (jsonl)");
  robust->add_flag("--oracle", r_oracle, "Score ground truth instead of the model");

  auto* predict = app.add_subcommand("predict", "Predict a tamper mask for one image");
  std::string image_path, affinity_dir;
  predict->add_option("--image", image_path, "Input image")->required();
  predict->add_option("--export-affinity", affinity_dir, "Also write prototype affinity maps here");

  auto* gradcheck_cmd = app.add_subcommand("gradcheck", "Finite-difference gradient verification");
  std::string corrupt_group;
  gradcheck_cmd->add_option("--corrupt-group", corrupt_group,
                            "Perturb one analytic gradient group (fault-injection hook)")
      ->group("");  // hidden

  auto* hfe = app.add_subcommand("hfe", "Dump the high-frequency companion image as PNG");
  std::string hfe_image;
  hfe->add_option("--image", hfe_image, "Input image")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    RunConfig config;
    if (!config_file.empty()) config.load_file(config_file);
    if (tiny) config.apply_tiny_preset();
    if (const char* env_root = std::getenv("TAMPERFORMER_DATA_ROOT"))
      config.set("data.root", env_root);
    if (!seed_str.empty()) config.set("seed", seed_str);
    if (!out.empty()) config.set("out", out);
    if (!checkpoint.empty()) config.set("data.checkpoint", checkpoint);
    if (!manifest.empty()) config.set("data.manifest", manifest);
    if (synth->parsed()) {
      if (!synth_n.empty()) config.set("synth.n", synth_n);
      if (!synth_mix.empty()) config.set("synth.mix", synth_mix);
      if (!synth_src.empty()) config.set("synth.source_dir", synth_src);
      if (!synth_size.empty()) config.set("synth.image_size", synth_size);
    }
    if (train->parsed()) {
      if (!train_manifest.empty()) config.set("data.manifest", train_manifest);
      if (!resume.empty()) config.set("train.resume", resume);
      if (!epochs.empty()) config.set("train.epochs", epochs);
      if (!lr.empty()) config.set("train.lr", lr);
      if (!batch.empty()) config.set("train.batch", batch);
    }
    if (eval->parsed()) {
      if (oracle) config.set("eval.oracle", "true");
      if (pooled) config.set("eval.pixel_pooled", "true");
    }
    if (robust->parsed() && r_oracle) config.set("eval.oracle", "true");
    for (const auto& o : overrides) config.apply_override(o);

    if (synth->parsed()) return cmd_synth(config);
    if (train->parsed()) return cmd_train(config);
    if (eval->parsed()) return cmd_eval(config);
    if (robust->parsed()) return cmd_robustness(config);
    if (predict->parsed()) return cmd_predict(config, image_path, affinity_dir);
    if (gradcheck_cmd->parsed()) return cmd_gradcheck(config, corrupt_group);
    if (hfe->parsed()) return cmd_hfe(config, hfe_image);
    std::cerr << "no subcommand\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
}
