// SPDX-License-Identifier: Apache-2.0
#include <nilm/cli/commands.hpp>
#include <nilm/core/error.hpp>
#include <nilm/core/log.hpp>
#include <nilm/data/container.hpp>
#include <nilm/model/serialize.hpp>

#include <doctest.h>

#include <filesystem>
#include <sstream>

using namespace nilm;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string &name)
    : path(fs::temp_directory_path() / ("nilm_cli_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string &f) const { return (path / f).string(); }
};

Settings settings_of(std::initializer_list<std::pair<const char *, std::string>> kv) {
  Settings s;
  for (const auto &[k, v] : kv)
    s.set(k, v);
  return s;
}

int run(const std::string &command, const Settings &s, std::string *err_text = nullptr) {
  std::ostringstream log, err;
  const int code = run_command_guarded(command, s, log, err);
  if (err_text)
    *err_text = err.str();
  return code;
}

} // namespace

TEST_CASE("settings: dotted keys, typed reads and overrides") {
  auto s = Settings::parse("model:\n  family: cnn\ntrain:\n  lr: 0.01\n", "test");
  CHECK(s.str("model.family") == "cnn");
  CHECK(s.number("train.lr") == 0.01);
  const auto ov = parse_overrides({"--model.family=wavenet", "--train.batch_size", "64",
                                   "--data.train=[a.csv, b.csv]"});
  for (const auto &[k, v] : ov)
    s.set(k, v);
  CHECK(s.str("model.family") == "wavenet");
  CHECK(s.count("train.batch_size") == 64);
  CHECK(s.strings("data.train") == std::vector<std::string>{"a.csv", "b.csv"});
  CHECK(s.keys() == std::vector<std::string>{"data.train", "model.family",
                                             "train.batch_size", "train.lr"});
  CHECK_THROWS_AS(parse_overrides({"--family"}), ConfigError);
  CHECK_THROWS_AS(parse_overrides({"stray"}), ConfigError);
  CHECK_THROWS_AS(s.count("train.lr"), ConfigError);
  CHECK_THROWS_AS(s.str("missing.key"), ConfigError);
  CHECK_THROWS_AS(s.require_known({"model.family"}), ConfigError);
  CHECK_THROWS_AS(s.set("model.family.deeper", "1"), ConfigError);
  CHECK_THROWS_AS(Settings::parse("[1, 2]", "test"), ConfigError);
}

TEST_CASE("settings: copies are independent and merge overrides") {
  Settings a = settings_of({{"x.y", "1"}});
  Settings b = a;
  b.set("x.y", "2");
  CHECK(a.number("x.y") == 1);
  Settings c = settings_of({{"x.z", "3"}, {"x.y", "4"}});
  a.merge(c);
  CHECK(a.number("x.y") == 4);
  CHECK(a.number("x.z") == 3);
  CHECK(a.snapshot() == "x:\n  y: 4\n  z: 3\n");
}

TEST_CASE("manifest: sha256 and yaml round trip") {
  CHECK(sha256_hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  RunManifest m;
  m.command = "train";
  m.seed = 42;
  m.config = settings_of({{"model.family", "wavenet"}, {"data.train", "[a.csv, b.csv]"}});
  m.inputs.push_back({"a.csv", sha256_hex("a"), false});
  m.outputs.push_back({"out/model.nilm", sha256_hex("m"), false});
  m.outputs.push_back({"out/train_log.csv", sha256_hex("l"), true});
  m.status = "complete";
  const auto text = m.to_yaml();
  const auto back = RunManifest::parse(text);
  CHECK(back.to_yaml() == text);
  CHECK(back.command == "train");
  CHECK(back.seed == 42);
  CHECK(back.outputs.at(1).timing);
  CHECK(back.config.strings("data.train").size() == 2);
  CHECK_THROWS(RunManifest::parse("command: [unclosed"));
}

TEST_CASE("model resolution: layers set the receptive field") {
  Settings s = settings_of({{"model.family", "wavenet"}, {"model.layers", "6"}});
  const auto c = resolve_model_config(s);
  CHECK(c.receptive_field == 127);
  CHECK(c.target_field == 10);
  CHECK(s.count("model.receptive_field") == 127);

  Settings bad = settings_of({{"model.layers", "6"}, {"model.receptive_field", "63"}});
  try {
    resolve_model_config(bad);
    FAIL("expected a configuration error");
  } catch (const ConfigError &e) {
    CHECK(std::string(e.what()).find("127") != std::string::npos);
  }

  Settings s2p = settings_of({{"train.paradigm", "seq2point"}, {"model.layers", "4"}});
  CHECK(resolve_model_config(s2p).target_field == 1);
  Settings s2s = settings_of({{"train.paradigm", "seq2seq"}, {"model.layers", "4"}});
  CHECK(resolve_model_config(s2s).target_field == 31);
  Settings cnn_layers = settings_of({{"model.family", "cnn"}, {"model.layers", "4"}});
  CHECK_THROWS_AS(resolve_model_config(cnn_layers), ConfigError);
}

TEST_CASE("commands: exit codes and error messages") {
  TempDir dir("exit");
  std::string err;
  CHECK(run("train", settings_of({{"data.dataset", dir / "absent.nilmdata"},
                                  {"output.dir", dir / "t"}}),
            &err) == kExitUsage);
  CHECK(err.find("absent.nilmdata") != std::string::npos);

  CHECK(run("train", settings_of({{"bogus.key", "1"}}), &err) == kExitUsage);
  CHECK(err.find("bogus.key") != std::string::npos);

  CHECK(run("synth", settings_of({{"synth.samples", "30000"}, {"output.dir", dir / "d"}})) ==
        kExitOk);
  CHECK(fs::exists(dir / "d/household.csv"));
  CHECK(fs::exists(dir / "d/manifest.yaml"));

  const Settings tr = settings_of({{"data.train", "[" + (dir / "d/household.csv") + "]"},
                                   {"data.appliance", "kettle"},
                                   {"model.layers", "2"},
                                   {"train.max_iterations", "2"},
                                   {"train.batch_size", "8"},
                                   {"output.dir", dir / "t"}});
  REQUIRE(run("train", tr) == kExitOk);
  const auto manifest = RunManifest::load(dir / "t/manifest.yaml");
  CHECK(manifest.status == "complete");
  CHECK(manifest.config.count("model.receptive_field") == 7);
  CHECK(manifest.inputs.size() == 1);

  // A regression model cannot drive classification detection.
  CHECK(run("detect", settings_of({{"detect.model", dir / "t/model.nilm"},
                                   {"detect.input", dir / "d/household.csv"},
                                   {"detect.framework", "classification"},
                                   {"output.dir", dir / "det"}}),
            &err) == kExitUsage);
  CHECK(err.find("classification") != std::string::npos);

  // Detection records its cutoff and threshold.
  REQUIRE(run("detect", settings_of({{"detect.model", dir / "t/model.nilm"},
                                     {"detect.input", dir / "d/household.csv"},
                                     {"output.dir", dir / "det"}})) == kExitOk);
  const auto dm = RunManifest::load(dir / "det/manifest.yaml");
  CHECK(dm.config.number("detect.cutoff") == 0.3);
  CHECK(dm.config.number("detect.threshold") == 2000);

  // A diverging run exits 1 and leaves a snapshot.
  Settings diverge = tr;
  diverge.set("train.lr", "1e30");
  diverge.set("train.max_iterations", "50");
  diverge.set("output.dir", dir / "div");
  CHECK(run("diverge-not-a-command", diverge) == kExitUsage);
  CHECK(run("train", diverge, &err) == kExitFailure);
  INFO(err);
  CHECK(err.find("snapshot") != std::string::npos);
  CHECK(fs::exists(dir / "div/divergence.nilm"));
  CHECK(RunManifest::load(dir / "div/manifest.yaml").status == "failed");
}

TEST_CASE("commands: rerun reproduces outputs and notices changed inputs") {
  TempDir dir("rerun");
  REQUIRE(run("synth", settings_of({{"synth.samples", "20000"}, {"output.dir", dir / "d"}})) ==
          kExitOk);
  const Settings tr = settings_of({{"data.train", "[" + (dir / "d/household.csv") + "]"},
                                   {"data.appliance", "kettle"},
                                   {"model.layers", "2"},
                                   {"train.max_iterations", "3"},
                                   {"train.batch_size", "8"},
                                   {"output.dir", dir / "t"}});
  REQUIRE(run("train", tr) == kExitOk);
  std::ostringstream log, err;
  Settings over = settings_of({{"output.dir", dir / "t2"}});
  CHECK(rerun_manifest(dir / "t/manifest.yaml", over, log, err) == kExitOk);
  CHECK(read_file(dir / "t/model.nilm") == read_file(dir / "t2/model.nilm"));

  write_file(dir / "d/household.csv", read_file(dir / "d/household.csv") + "\n");
  CHECK(rerun_manifest(dir / "t/manifest.yaml", over, log, err) == kExitUsage);
  CHECK(err.str().find("changed") != std::string::npos);
}
