// SPDX-License-Identifier: Apache-2.0
// nilm: synthesize, ingest, train, predict, detect, evaluate, sweep, rerun.
#include <nilm/cli/commands.hpp>
#include <nilm/core/error.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>

namespace {

struct Shortcut {
  const char *flag;
  const char *help;
  std::map<std::string, std::string> key_for; ///< command -> dotted key
  bool list = false;
};

const std::vector<Shortcut> &shortcuts() {
  static const std::vector<Shortcut> table = {
    {"--family", "model family: wavenet, cnn or rnn",
     {{"train", "model.family"}, {"ingest", "model.family"}, {"sweep", "model.family"}}},
    {"--layers", "WaveNet dilated layers (sets the receptive field)",
     {{"train", "model.layers"}, {"ingest", "model.layers"}}},
    {"--receptive-field", "input samples seen by each output",
     {{"train", "model.receptive_field"}, {"ingest", "model.receptive_field"}}},
    {"--target-field", "outputs per window",
     {{"train", "model.target_field"}, {"ingest", "model.target_field"}}},
    {"--seed", "random seed",
     {{"train", "train.seed"}, {"ingest", "train.seed"}, {"sweep", "train.seed"},
      {"synth", "synth.seed"}}},
    {"--framework", "regression or classification",
     {{"train", "train.framework"}, {"ingest", "train.framework"},
      {"sweep", "train.framework"}, {"detect", "detect.framework"}}},
    {"--paradigm", "seq2point, seq2seq or fast-seq2point",
     {{"train", "train.paradigm"}, {"ingest", "train.paradigm"}}},
    {"--model", "trained model file",
     {{"predict", "predict.model"}, {"detect", "detect.model"}, {"evaluate", "evaluate.models"}},
     true},
    {"--input", "meter CSV",
     {{"predict", "predict.input"}, {"detect", "detect.input"}, {"evaluate", "evaluate.inputs"}},
     true},
    {"--cutoff", "classification probability cutoff", {{"detect", "detect.cutoff"}}},
    {"--threshold", "on-power threshold in watts", {{"detect", "detect.threshold"}}},
    {"--dataset", "cached training dataset", {{"train", "data.dataset"}}},
    {"--train", "training CSV files",
     {{"train", "data.train"}, {"ingest", "data.train"}, {"sweep", "data.train"}}, true},
    {"--test", "test CSV files", {{"sweep", "data.test"}}, true},
    {"--appliance", "target appliance",
     {{"train", "data.appliance"}, {"ingest", "data.appliance"}, {"sweep", "data.appliance"}}},
    {"--scenario", "synthetic scenario YAML", {{"synth", "synth.scenario"}}},
    {"--samples", "synthetic samples", {{"synth", "synth.samples"}}},
    {"--split", "fraction of samples held out as test.csv", {{"synth", "synth.split"}}},
    {"--out", "output directory or file",
     {{"synth", "output.dir"}, {"train", "output.dir"}, {"detect", "output.dir"},
      {"evaluate", "output.dir"}, {"sweep", "output.dir"}, {"predict", "output.file"},
      {"ingest", "output.dataset"}}},
  };
  return table;
}

std::string join_list(const std::vector<std::string> &v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i)
    out += (i ? ", " : "") + v[i];
  return out + "]";
}

struct Subcommand {
  CLI::App *app = nullptr;
  std::string config;
  std::map<std::string, std::vector<std::string>> values; ///< flag -> values
};

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Energy disaggregation with fast sequence-to-point models"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(nilm::kToolVersion));

  std::map<std::string, Subcommand> subs;
  for (const auto &name : nilm::command_names()) {
    auto &sub = subs[name];
    sub.app = app.add_subcommand(name);
    sub.app->allow_extras();
    sub.app->add_option("--config", sub.config, "YAML settings file");
    for (const auto &sc : shortcuts()) {
      if (!sc.key_for.count(name))
        continue;
      auto *opt = sub.app->add_option(sc.flag, sub.values[sc.flag], sc.help);
      if (!sc.list)
        opt->expected(1);
    }
  }
  std::string rerun_path;
  auto *rerun = app.add_subcommand("rerun", "repeat a run from its manifest");
  rerun->allow_extras();
  rerun->add_option("manifest", rerun_path, "manifest.yaml of the run")->required();
  std::string rerun_out;
  rerun->add_option("--out", rerun_out, "write outputs here instead");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : nilm::kExitUsage;
  }

  try {
    if (rerun->parsed()) {
      nilm::Settings overrides;
      for (const auto &[k, v] : nilm::parse_overrides(rerun->remaining()))
        overrides.set(k, v);
      if (!rerun_out.empty()) {
        const auto m = nilm::RunManifest::load(rerun_path);
        for (const auto *key : {"output.dir", "output.file", "output.dataset"})
          if (m.config.has(key))
            overrides.set(key, rerun_out);
      }
      return nilm::rerun_manifest(rerun_path, overrides, std::cout, std::cerr);
    }

    for (auto &[name, sub] : subs) {
      if (!sub.app->parsed())
        continue;
      nilm::Settings settings;
      const auto dir = nilm::config_directory();
      const auto defaults = std::filesystem::path(dir) / (name + ".yaml");
      if (!dir.empty() && std::filesystem::exists(defaults))
        settings = nilm::Settings::load(defaults.string());
      if (!sub.config.empty()) {
        if (!std::filesystem::exists(sub.config))
          throw nilm::FileError("config file '" + sub.config + "' does not exist");
        settings.merge(nilm::Settings::load(sub.config));
      }
      for (const auto &sc : shortcuts()) {
        auto it = sc.key_for.find(name);
        const auto &v = sub.values[sc.flag];
        if (it == sc.key_for.end() || v.empty())
          continue;
        const bool many = it->second == "evaluate.models" || it->second == "evaluate.inputs" ||
                          it->second == "data.train" || it->second == "data.test";
        if (!many && v.size() > 1)
          throw nilm::ConfigError(std::string(sc.flag) + " takes one value");
        settings.set(it->second, many ? join_list(v) : v.front());
      }
      for (const auto &[k, v] : nilm::parse_overrides(sub.app->remaining()))
        settings.set(k, v);
      return nilm::run_command_guarded(name, settings, std::cout, std::cerr);
    }
  } catch (const nilm::ConfigError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return nilm::kExitUsage;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return nilm::kExitUsage;
  }
  return nilm::kExitUsage;
}
