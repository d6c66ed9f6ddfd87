// SPDX-License-Identifier: Apache-2.0
#include <nilm/cli/commands.hpp>
#include <nilm/core/error.hpp>
#include <nilm/data/container.hpp>
#include <nilm/eval/report.hpp>
#include <nilm/model/serialize.hpp>
#include <nilm/synth/synth.hpp>
#include <nilm/train/predict.hpp>
#include <nilm/train/train.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <ostream>
#include <sstream>

namespace fs = std::filesystem;

namespace nilm {

namespace {

const std::set<std::string> kModelKeys = {
  "model.family", "model.layers", "model.receptive_field", "model.target_field",
  "model.filter_length", "model.residual_channels", "model.skip_channels",
  "model.hidden_size", "model.rnn_layers", "model.cnn_dense_units"};

const std::set<std::string> kTrainKeys = {
  "train.paradigm", "train.framework", "train.batch_size", "train.lr",
  "train.max_iterations", "train.eval_every", "train.patience",
  "train.validation_fraction", "train.validation_windows", "train.cutoff",
  "train.seed", "train.precision", "train.seq2seq_stride"};

std::set<std::string> join(std::initializer_list<std::set<std::string>> parts) {
  std::set<std::string> out;
  for (const auto &p : parts)
    out.insert(p.begin(), p.end());
  return out;
}

void ensure_parent(const std::string &path) {
  const auto parent = fs::path(path).parent_path();
  if (!parent.empty())
    fs::create_directories(parent);
}

std::string in_dir(const Settings &s, const std::string &name) {
  return (fs::path(s.str("output.dir")) / name).string();
}

/// Writes the manifest up front and completes it with output digests.
class ManifestScope {
 public:
  ManifestScope(const std::string &command, const Settings &settings,
                std::uint64_t seed, const std::vector<std::string> &inputs)
    : path_(manifest_path_for(command, settings)) {
    m_.command = command;
    m_.seed = seed;
    m_.config = settings;
    for (const auto &in : inputs) {
      if (!fs::exists(in))
        throw FileError("input '" + in + "' does not exist");
      m_.inputs.push_back({in, sha256_file(in), false});
    }
    ensure_parent(path_);
    m_.save(path_);
  }
  void output(const std::string &path, bool timing = false) {
    m_.outputs.push_back({path, "", timing});
  }
  void complete() {
    for (auto &o : m_.outputs)
      o.sha256 = fs::exists(o.path) ? sha256_file(o.path) : "";
    m_.status = "complete";
    m_.save(path_);
  }
  void fail() {
    m_.status = "failed";
    m_.save(path_);
  }
  const std::string &path() const { return path_; }

 private:
  std::string path_;
  RunManifest m_;
};

std::string config_file_or_builtin(const std::string &name) {
  const auto dir = config_directory();
  if (dir.empty())
    return {};
  const auto p = fs::path(dir) / name;
  return fs::exists(p) ? p.string() : std::string();
}

Head framework_of(const Settings &s) { return parse_head(s.str("train.framework")); }

std::vector<Household> load_households(const std::vector<std::string> &paths,
                                       int first_id) {
  std::vector<Household> out;
  for (std::size_t i = 0; i < paths.size(); ++i)
    out.push_back(load_household(paths[i], first_id + int(i)));
  return out;
}

TrainConfig train_config_from(const Settings &s, double metric_scale) {
  TrainConfig c;
  c.paradigm = parse_paradigm(s.str("train.paradigm"));
  c.framework = framework_of(s);
  c.batch_size = s.count("train.batch_size");
  c.lr = s.number("train.lr");
  c.max_iterations = s.count("train.max_iterations");
  c.eval_every = s.count("train.eval_every");
  c.patience = s.count("train.patience");
  c.validation_fraction = s.number("train.validation_fraction");
  c.validation_windows = s.count("train.validation_windows");
  c.cutoff = s.number("train.cutoff");
  c.seed = s.u64("train.seed");
  c.precision = parse_precision(s.str("train.precision"));
  c.metric_scale = metric_scale;
  c.validate();
  return c;
}

DatasetSpec dataset_spec_for(const ModelConfig &mc, const Settings &s,
                             double on_threshold) {
  DatasetSpec d;
  d.receptive_field = mc.receptive_field;
  d.target_field = mc.target_field;
  d.targets = mc.head == Head::classification ? TargetKind::states : TargetKind::watts;
  d.on_threshold = on_threshold;
  d.seq2seq = parse_paradigm(s.str("train.paradigm")) == Paradigm::seq2seq;
  d.seq2seq_stride = s.count("train.seq2seq_stride");
  return d;
}

std::string dataset_meta(const std::string &appliance, double threshold,
                         const ChannelStats &stats, const ModelConfig &mc) {
  std::ostringstream m;
  m << "appliance=" << appliance << '\n'
    << "on_threshold=" << format_double(threshold) << '\n'
    << "framework=" << to_string(mc.head) << '\n'
    << "receptive_field=" << mc.receptive_field << '\n'
    << "target_field=" << mc.target_field << '\n';
  for (const auto *st : {&stats.aggregate, &stats.appliance}) {
    const std::string which = st == &stats.aggregate ? "aggregate" : "appliance";
    m << "stats." << which << ".channel=" << st->channel << '\n'
      << "stats." << which << ".mean=" << format_double(st->mean) << '\n'
      << "stats." << which << ".std=" << format_double(st->std) << '\n';
  }
  return m.str();
}

std::map<std::string, std::string> parse_meta(const std::string &meta) {
  std::map<std::string, std::string> kv;
  std::istringstream in(meta);
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos)
      kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

double meta_number(const std::map<std::string, std::string> &kv, const std::string &key,
                   const std::string &path) {
  auto it = kv.find(key);
  double v = 0;
  if (it == kv.end() || !parse_double(it->second, v))
    throw FormatError(path + ": dataset metadata lacks '" + key + "'");
  return v;
}

/// Training data from the settings: a cached dataset or CSV households.
struct PreparedData {
  WindowedDataset dataset;
  ChannelStats stats;
  std::string appliance;
  double on_threshold = 0;
  std::vector<std::string> inputs;
};

PreparedData prepare_training_data(const Settings &s, const ModelConfig &mc) {
  PreparedData p;
  if (s.has("data.dataset")) {
    const auto path = s.str("data.dataset");
    if (!fs::exists(path))
      throw FileError("dataset '" + path + "' does not exist");
    std::string meta;
    p.dataset = load_dataset(path, &meta);
    const auto kv = parse_meta(meta);
    p.appliance = kv.count("appliance") ? kv.at("appliance") : "";
    p.on_threshold = meta_number(kv, "on_threshold", path);
    p.stats.aggregate = {kv.count("stats.aggregate.channel") ? kv.at("stats.aggregate.channel") : "",
                         meta_number(kv, "stats.aggregate.mean", path),
                         meta_number(kv, "stats.aggregate.std", path)};
    p.stats.appliance = {p.appliance, meta_number(kv, "stats.appliance.mean", path),
                         meta_number(kv, "stats.appliance.std", path)};
    if (kv.count("framework") && kv.at("framework") != to_string(mc.head))
      throw ConfigError(path + ": dataset was built for the " + kv.at("framework") +
                        " framework, training asks for " + to_string(mc.head));
    if (s.has("data.appliance") && s.str("data.appliance") != p.appliance)
      throw ConfigError(path + ": dataset holds '" + p.appliance +
                        "', not '" + s.str("data.appliance") + "'");
    p.inputs.push_back(path);
    return p;
  }
  const auto files = s.strings("data.train");
  if (files.empty())
    throw ConfigError("set data.dataset or data.train");
  p.appliance = s.str("data.appliance");
  p.on_threshold = find_appliance(appliance_specs_for(s), p.appliance).on_power_threshold;
  const auto hs = load_households(files, 1);
  p.stats = compute_channel_stats(hs, p.appliance);
  p.dataset = materialize(hs, p.appliance, p.stats, dataset_spec_for(mc, s, p.on_threshold));
  p.inputs = files;
  return p;
}

template <typename Real>
std::unique_ptr<Model<float>> train_model(const ModelConfig &mc,
                                          const WindowedDataset &ds,
                                          const TrainConfig &tc,
                                          const ChannelStats &stats,
                                          const std::string &appliance,
                                          double threshold, TrainingRun &run) {
  auto model = build_model<Real>(mc);
  TrainHooks<Real> hooks;
  hooks.snapshot = [&](const Model<Real> &m, const std::string &path) {
    TrainedModel t{mc, stats, appliance, threshold, build_model<float>(mc)};
    copy_parameters(m, *t.model);
    ensure_parent(path);
    save_model(path, t);
  };
  run = train(*model, ds, tc, hooks);
  if constexpr (std::is_same_v<Real, float>) {
    return model;
  } else {
    auto out = build_model<float>(mc);
    copy_parameters(*model, *out);
    return out;
  }
}

TrainedModel fit(const ModelConfig &mc, const PreparedData &data, const TrainConfig &tc,
                 TrainingRun &run) {
  TrainedModel t;
  t.config = mc;
  t.stats = data.stats;
  t.appliance = data.appliance;
  t.on_threshold = data.on_threshold;
  t.model = tc.precision == Precision::float64
              ? train_model<double>(mc, data.dataset, tc, data.stats, data.appliance,
                                    data.on_threshold, run)
              : train_model<float>(mc, data.dataset, tc, data.stats, data.appliance,
                                   data.on_threshold, run);
  return t;
}

std::string model_label(const TrainedModel &m) {
  return to_string(m.config.family) +
         (m.config.head == Head::classification ? "-classification" : "");
}

/// Predictions of one model over several households, concatenated.
struct Scored {
  std::vector<double> aggregate, truth, watts;
  std::vector<std::uint8_t> states;
  std::vector<bool> valid;
};

Scored score(const TrainedModel &m, std::span<const Household> test, double cutoff,
             bool seq2seq, std::size_t seq2seq_stride) {
  Scored s;
  for (const auto &h : test) {
    const auto p = seq2seq ? predict_seq2seq(*m.model, h.aggregate, m.stats,
                                             seq2seq_stride ? seq2seq_stride : 1)
                           : predict_series(m, h.aggregate);
    const auto st = prediction_states(p, m.on_threshold, cutoff);
    const auto &truth = h.appliance(m.appliance);
    s.aggregate.insert(s.aggregate.end(), h.aggregate.begin(), h.aggregate.end());
    s.truth.insert(s.truth.end(), truth.begin(), truth.end());
    for (std::size_t t = 0; t < p.values.size(); ++t)
      s.watts.push_back(p.valid[t] ? p.values[t] : 0.0);
    s.states.insert(s.states.end(), st.begin(), st.end());
    s.valid.insert(s.valid.end(), p.valid.begin(), p.valid.end());
  }
  return s;
}

MetricsReport report_for(const TrainedModel &m, const Scored &s) {
  EvaluationInput in;
  in.aggregate = s.aggregate;
  in.truth_watts = s.truth;
  if (m.config.head == Head::regression)
    in.predicted_watts = s.watts;
  in.predicted_states = s.states;
  in.predicted_valid = &s.valid;
  in.on_threshold = m.on_threshold;
  auto r = evaluate(in);
  r.appliance = m.appliance;
  r.model = model_label(m);
  r.receptive_field = m.config.receptive_field;
  r.target_field = m.config.target_field;
  return r;
}

std::vector<MetricsReport> baselines_for(const std::string &appliance,
                                         std::span<const Household> test,
                                         double training_mean, double threshold) {
  std::vector<double> agg, truth;
  for (const auto &h : test) {
    agg.insert(agg.end(), h.aggregate.begin(), h.aggregate.end());
    const auto &t = h.appliance(appliance);
    truth.insert(truth.end(), t.begin(), t.end());
  }
  auto z = baseline_always_zero(agg, truth, threshold);
  auto m = baseline_always_mean(agg, truth, training_mean, threshold);
  z.appliance = m.appliance = appliance;
  return {z, m};
}

void write_prediction_csv(const std::string &path, const Household &h,
                          const SeriesPrediction &p) {
  std::string out = "timestamp,aggregate,prediction\n";
  for (std::size_t t = 0; t < h.size(); ++t) {
    out += std::to_string(h.timestamps[t]) + ',' + format_double(h.aggregate[t]) + ',';
    if (p.valid[t])
      out += format_double(p.values[t]);
    out += '\n';
  }
  ensure_parent(path);
  write_file(path, out);
}

// ---------------------------------------------------------------- synth

SyntheticHousehold slice_household(const SyntheticHousehold &h, std::size_t b,
                                   std::size_t e) {
  SyntheticHousehold out;
  auto cut = [&](const auto &v) { return std::decay_t<decltype(v)>(v.begin() + b, v.begin() + e); };
  out.timestamps = cut(h.timestamps);
  out.aggregate = cut(h.aggregate);
  out.noise = cut(h.noise);
  for (const auto &[k, v] : h.appliances)
    out.appliances[k] = cut(v);
  for (const auto &[k, v] : h.states)
    out.states[k] = cut(v);
  return out;
}

SyntheticScenario slice_scenario(SyntheticScenario sc, std::size_t b, std::size_t e) {
  std::vector<Dropout> kept;
  for (const auto &d : sc.dropouts) {
    const std::size_t s = std::max(d.start, b), f = std::min(d.start + d.missing, e);
    if (s < f)
      kept.push_back({s - b, f - s});
  }
  sc.dropouts = kept;
  sc.samples = e - b;
  return sc;
}

void cmd_synth(Settings &s, std::ostream &log) {
  s.require_known({"synth.scenario", "synth.preset", "synth.samples", "synth.seed",
                   "synth.split", "output.dir"});
  s.set_default("output.dir", "synth");
  s.set_default("synth.split", "0");
  SyntheticScenario sc;
  std::vector<std::string> inputs;
  if (s.has("synth.scenario")) {
    sc = load_scenario(s.str("synth.scenario"));
    inputs.push_back(s.str("synth.scenario"));
  } else {
    s.set_default("synth.preset", "desk");
    s.set_default("synth.samples", "200000");
    s.set_default("synth.seed", "1");
    if (s.str("synth.preset") != "desk")
      throw ConfigError("unknown synth.preset '" + s.str("synth.preset") +
                        "' (expected desk)");
    sc = desk_scenario(s.count("synth.samples"), s.u64("synth.seed"));
  }
  if (s.has("synth.samples"))
    sc.samples = s.count("synth.samples");
  if (s.has("synth.seed"))
    sc.seed = s.u64("synth.seed");
  const double split = s.number("synth.split");
  if (!(split >= 0 && split < 1))
    throw ConfigError("synth.split must be in [0, 1)");
  sc.validate();

  ManifestScope manifest("synth", s, sc.seed, inputs);
  const auto h = generate(sc);
  const auto scenario_path = in_dir(s, "scenario.yaml");
  write_file(scenario_path, format_scenario(sc));
  manifest.output(scenario_path);

  auto emit = [&](const std::string &name, std::size_t b, std::size_t e) {
    const auto path = in_dir(s, name);
    write_file(path, format_fixture_csv(slice_scenario(sc, b, e), slice_household(h, b, e)));
    manifest.output(path);
    log << "wrote " << path << " (" << e - b << " samples)\n";
  };
  if (split > 0) {
    const auto cut = std::size_t(std::llround(double(sc.samples) * (1.0 - split)));
    emit("train.csv", 0, cut);
    emit("test.csv", cut, sc.samples);
  } else {
    emit("household.csv", 0, sc.samples);
  }

  std::vector<std::vector<double>> cols;
  std::vector<std::string> names;
  for (const auto &t : sc.templates) {
    const auto &st = h.states.at(t.name);
    cols.emplace_back(st.begin(), st.end());
    names.push_back(t.name);
  }
  std::vector<CsvColumn> cc;
  for (std::size_t i = 0; i < cols.size(); ++i)
    cc.push_back({names[i], cols[i]});
  const auto states_path = in_dir(s, "states.csv");
  write_file(states_path, format_csv(h.timestamps, cc));
  manifest.output(states_path);
  manifest.complete();
}

// ---------------------------------------------------------------- ingest

void cmd_ingest(Settings &s, std::ostream &log) {
  s.require_known(join({kModelKeys, kTrainKeys,
                        {"data.train", "data.appliance", "data.appliances_file",
                         "output.dataset"}}));
  s.set_default("output.dataset", "dataset.nilmdata");
  const auto mc = resolve_model_config(s);
  const auto files = s.strings("data.train");
  if (files.empty())
    throw ConfigError("ingest needs data.train (one or more CSV files)");
  const auto appliance = s.str("data.appliance");
  const double threshold =
    find_appliance(appliance_specs_for(s), appliance).on_power_threshold;
  ManifestScope manifest("ingest", s, s.u64("train.seed"), files);
  const auto hs = load_households(files, 1);
  const auto stats = compute_channel_stats(hs, appliance);
  const auto ds = materialize(hs, appliance, stats, dataset_spec_for(mc, s, threshold));
  const auto out = s.str("output.dataset");
  ensure_parent(out);
  save_dataset(out, ds, dataset_meta(appliance, threshold, stats, mc));
  manifest.output(out);
  manifest.complete();
  log << "wrote " << out << " (" << ds.size() << " windows of " << ds.input_length()
      << " -> " << ds.target_length() << ")\n";
}

// ---------------------------------------------------------------- train

void cmd_train(Settings &s, std::ostream &log) {
  s.require_known(join({kModelKeys, kTrainKeys,
                        {"data.dataset", "data.train", "data.appliance",
                         "data.appliances_file", "output.dir"}}));
  s.set_default("output.dir", "train");
  const auto mc = resolve_model_config(s);
  std::vector<std::string> inputs;
  if (s.has("data.dataset"))
    inputs.push_back(s.str("data.dataset"));
  else
    inputs = s.strings("data.train");
  ManifestScope manifest("train", s, s.u64("train.seed"), inputs);
  const auto data = prepare_training_data(s, mc);
  const auto tc = train_config_from(
    s, mc.head == Head::regression ? data.stats.appliance.std : 1.0);
  TrainConfig with_snapshot = tc;
  with_snapshot.snapshot_path = in_dir(s, "divergence.nilm");

  TrainingRun run;
  TrainedModel trained;
  try {
    trained = fit(mc, data, with_snapshot, run);
  } catch (...) {
    manifest.fail();
    throw;
  }
  const auto model_path = in_dir(s, "model.nilm");
  const auto log_path = in_dir(s, "train_log.csv");
  save_model(model_path, trained);
  write_file(log_path, format_training_log(run));
  manifest.output(model_path);
  manifest.output(log_path, true);
  manifest.complete();
  log << "trained " << to_string(mc.family) << " L=" << mc.receptive_field
      << " r=" << mc.target_field << " (" << to_string(mc.head) << ") for "
      << run.iterations << " iterations, " << format_double(run.mean_ms_per_iteration)
      << " ms/iteration; wrote " << model_path << '\n';
}

// ---------------------------------------------------------------- predict

void cmd_predict(Settings &s, std::ostream &log) {
  s.require_known({"predict.model", "predict.input", "output.file"});
  s.set_default("output.file", "prediction.csv");
  const auto model_path = s.str("predict.model"), input = s.str("predict.input");
  ManifestScope manifest("predict", s, 0, {model_path, input});
  const auto m = load_model(model_path);
  const auto h = load_household(input, 1);
  const auto p = predict_series(m, h.aggregate);
  const auto out = s.str("output.file");
  write_prediction_csv(out, h, p);
  manifest.output(out);
  manifest.complete();
  log << "wrote " << out << " (" << p.predicted() << " of " << h.size()
      << " samples predicted)\n";
}

// ---------------------------------------------------------------- detect

void cmd_detect(Settings &s, std::ostream &log) {
  s.require_known({"detect.model", "detect.input", "detect.framework", "detect.cutoff",
                   "detect.threshold", "output.dir"});
  s.set_default("output.dir", "detect");
  s.set_default("detect.cutoff", format_double(kDefaultCutoff));
  const auto model_path = s.str("detect.model"), input = s.str("detect.input");
  if (!fs::exists(model_path))
    throw FileError("model '" + model_path + "' does not exist");
  auto m = load_model(model_path);
  s.set_default("detect.framework", to_string(m.config.head));
  s.set_default("detect.threshold", format_double(m.on_threshold));
  const Head framework = parse_head(s.str("detect.framework"));
  if (framework != m.config.head)
    throw ConfigError("detect: --framework " + to_string(framework) + " needs a " +
                      to_string(framework) + " model, but '" + model_path +
                      "' has a " + to_string(m.config.head) + " head");
  const double cutoff = s.number("detect.cutoff");
  m.on_threshold = s.number("detect.threshold");

  ManifestScope manifest("detect", s, 0, {model_path, input});
  const auto h = load_household(input, 1);
  const auto p = predict_series(m, h.aggregate);
  const auto states = framework == Head::regression
                        ? detect_onoff_regression(m, h.aggregate, m.on_threshold)
                        : detect_onoff_classifier(m, h.aggregate, cutoff);
  std::string csv = "timestamp,state\n";
  for (std::size_t t = 0; t < h.size(); ++t)
    if (p.valid[t])
      csv += std::to_string(h.timestamps[t]) + ',' + char('0' + states[t]) + '\n';
  const auto out = in_dir(s, "states.csv");
  write_file(out, csv);
  manifest.output(out);
  log << "wrote " << out << " (" << p.predicted() << " states)\n";

  if (h.appliances.count(m.appliance)) {
    auto r = evaluate({h.aggregate, h.appliance(m.appliance), {}, states, &p.valid,
                       m.on_threshold});
    r.appliance = m.appliance;
    r.model = model_label(m);
    r.receptive_field = m.config.receptive_field;
    r.target_field = m.config.target_field;
    const auto rp = in_dir(s, "report.txt");
    write_file(rp, format_report({r}));
    manifest.output(rp);
    log << "F1 " << format_double(r.f1) << " (precision " << format_double(r.precision)
        << ", recall " << format_double(r.recall) << ")\n";
  }
  manifest.complete();
}

// ---------------------------------------------------------------- evaluate

std::size_t excerpt_begin(std::span<const double> truth, double threshold,
                          std::size_t length) {
  for (std::size_t t = 0; t < truth.size(); ++t)
    if (truth[t] >= threshold)
      return t > length / 4 ? t - length / 4 : 0;
  return 0;
}

void cmd_evaluate(Settings &s, std::ostream &log) {
  s.require_known({"evaluate.models", "evaluate.inputs", "evaluate.excerpt_length",
                   "evaluate.cutoff", "output.dir"});
  s.set_default("output.dir", "evaluate");
  s.set_default("evaluate.excerpt_length", "2000");
  s.set_default("evaluate.cutoff", format_double(kDefaultCutoff));
  const auto models = s.strings("evaluate.models"), inputs = s.strings("evaluate.inputs");
  if (models.empty() || inputs.empty())
    throw ConfigError("evaluate needs evaluate.models and evaluate.inputs");
  auto all = models;
  all.insert(all.end(), inputs.begin(), inputs.end());
  ManifestScope manifest("evaluate", s, 0, all);
  const auto test = load_households(inputs, 1);
  std::vector<MetricsReport> reports;
  std::set<std::string> baselines_done;
  const std::size_t excerpt = s.count("evaluate.excerpt_length");
  for (std::size_t i = 0; i < models.size(); ++i) {
    const auto m = load_model(models[i]);
    const auto sc = score(m, test, s.number("evaluate.cutoff"), false, 0);
    reports.push_back(report_for(m, sc));
    if (baselines_done.insert(m.appliance).second)
      for (auto &b : baselines_for(m.appliance, test, m.stats.appliance.mean, m.on_threshold))
        reports.push_back(b);
    const auto &h = test.front();
    const std::size_t n = std::min(excerpt, h.size());
    const auto begin = excerpt_begin(h.appliance(m.appliance), m.on_threshold, n);
    const auto len = std::min(n, h.size() - begin);
    const std::vector<bool> valid(sc.valid.begin(), sc.valid.begin() + h.size());
    const auto ex = format_excerpt_csv(
      {h.timestamps, h.aggregate, h.appliance(m.appliance),
       std::span(sc.watts).first(h.size()), &valid}, begin, len);
    const auto ep = in_dir(s, "excerpt_" + std::to_string(i) + "_" + m.appliance + ".csv");
    write_file(ep, ex);
    manifest.output(ep);
  }
  const auto paths = emit_report(s.str("output.dir"), reports);
  manifest.output(paths.report);
  manifest.output(paths.curves);
  manifest.output(paths.overall);
  manifest.complete();
  for (const auto &r : reports)
    log << r.appliance << ' ' << r.model << ": MAE " << format_double(r.mae) << " SAE "
        << format_double(r.sae) << " F1 " << format_double(r.f1) << '\n';
}

// ---------------------------------------------------------------- sweep

std::string cell_key(const std::string &appliance, Family f, std::size_t L, std::size_t r) {
  return appliance + "/" + to_string(f) + "/L" + std::to_string(L) + "/r" + std::to_string(r);
}

void cmd_sweep(Settings &s, std::ostream &log) {
  s.require_known(join({kModelKeys, kTrainKeys,
                        {"data.train", "data.test", "data.appliance", "data.appliances_file",
                         "sweep.families", "sweep.receptive_fields", "sweep.target_fields",
                         "sweep.appliances", "output.dir"}}));
  s.set_default("output.dir", "sweep");
  s.set_default("sweep.families", "[wavenet, cnn, rnn]");
  s.set_default("sweep.target_fields", "[10]");
  if (!s.has("sweep.appliances"))
    s.set_node("sweep.appliances", YAML::Node(std::vector<std::string>{s.str("data.appliance")}));
  {
    Settings probe = s;
    resolve_model_config(probe); // fills train.* defaults
    for (const auto &k : probe.keys())
      if (k.rfind("train.", 0) == 0)
        s.set_default(k, probe.str(k));
  }
  const auto train_files = s.strings("data.train"), test_files = s.strings("data.test");
  if (train_files.empty() || test_files.empty())
    throw ConfigError("sweep needs data.train and data.test");
  auto inputs = train_files;
  inputs.insert(inputs.end(), test_files.begin(), test_files.end());
  ManifestScope manifest("sweep", s, s.u64("train.seed"), inputs);

  const auto state_path = in_dir(s, "sweep_state.yaml");
  YAML::Node state(YAML::NodeType::Map);
  if (fs::exists(state_path))
    state = YAML::LoadFile(state_path);
  auto save_state = [&] {
    YAML::Emitter e;
    e << state;
    const auto tmp = state_path + ".tmp";
    write_file(tmp, std::string(e.c_str()) + "\n");
    fs::rename(tmp, state_path);
  };

  const auto specs = appliance_specs_for(s);
  const auto train_h = load_households(train_files, 1);
  const auto test_h = load_households(test_files, int(train_files.size()) + 1);
  std::vector<MetricsReport> reports;
  std::size_t ran = 0, skipped = 0, failed = 0;

  for (const auto &appliance : s.strings("sweep.appliances")) {
    const double threshold = find_appliance(specs, appliance).on_power_threshold;
    const auto stats = compute_channel_stats(train_h, appliance);
    for (auto &b : baselines_for(appliance, test_h, stats.appliance.mean, threshold))
      reports.push_back(b);
    for (const auto &fam_name : s.strings("sweep.families")) {
      const Family fam = parse_family(fam_name);
      auto Ls = s.counts("sweep.receptive_fields");
      if (Ls.empty())
        Ls = kReceptiveFieldPresets;
      for (std::size_t L : Ls)
        for (std::size_t r : s.counts("sweep.target_fields")) {
          const auto key = cell_key(appliance, fam, L, r);
          YAML::Node cell = state[key];
          if (cell && cell["status"] && cell["status"].as<std::string>() == "done") {
            reports.push_back(parse_report(cell["report"].as<std::string>()).at(0));
            ++skipped;
            continue;
          }
          YAML::Node rec(YAML::NodeType::Map);
          if (fam != Family::wavenet && L > kMaxRecurrentConvReceptiveField) {
            rec["status"] = "excluded";
            rec["reason"] = "receptive fields above 511 are not run for CNN and RNN";
            state[key] = rec;
            save_state();
            continue;
          }
          try {
            Settings cs = s;
            cs.set("model.family", to_string(fam));
            cs.erase("model.layers");
            cs.set("model.receptive_field", std::to_string(L));
            cs.set("model.target_field", std::to_string(r));
            const auto mc = resolve_model_config(cs);
            PreparedData data;
            data.appliance = appliance;
            data.on_threshold = threshold;
            data.stats = stats;
            data.dataset = materialize(train_h, appliance, stats,
                                       dataset_spec_for(mc, cs, threshold));
            const auto tc = train_config_from(
              cs, mc.head == Head::regression ? stats.appliance.std : 1.0);
            TrainingRun run;
            const auto model = fit(mc, data, tc, run);
            auto rep = report_for(model, score(model, test_h, tc.cutoff, false, 0));
            rep.ms_per_iteration = run.mean_ms_per_iteration;
            reports.push_back(rep);
            rec["status"] = "done";
            rec["report"] = format_report({rep});
            ++ran;
            log << key << ": MAE " << format_double(rep.mae) << " F1 "
                << format_double(rep.f1) << ", " << format_double(rep.ms_per_iteration)
                << " ms/iteration\n";
          } catch (const std::exception &e) {
            rec["status"] = "failed";
            rec["error"] = e.what();
            ++failed;
            log << key << ": failed: " << e.what() << '\n';
          }
          state[key] = rec;
          save_state();
        }
    }
  }
  manifest.output(state_path, true);
  const auto paths = emit_report(s.str("output.dir"), reports);
  manifest.output(paths.report, true);
  manifest.output(paths.curves, true);
  manifest.output(paths.overall, true);
  manifest.complete();
  log << "sweep: " << ran << " cells run, " << skipped << " resumed, " << failed
      << " failed\n";
}

} // namespace

const std::vector<std::string> &command_names() {
  static const std::vector<std::string> names = {
    "synth", "ingest", "train", "predict", "detect", "evaluate", "sweep"};
  return names;
}

std::string config_directory() {
  const char *d = std::getenv("NILM_CONFIG_DIR");
  return d ? std::string(d) : std::string();
}

std::vector<ApplianceSpec> appliance_specs_for(const Settings &s) {
  if (s.has("data.appliances_file"))
    return load_appliance_specs(s.str("data.appliances_file"));
  const auto p = config_file_or_builtin("appliances.yaml");
  return p.empty() ? default_appliance_specs() : load_appliance_specs(p);
}

ModelConfig resolve_model_config(Settings &s) {
  s.set_default("train.paradigm", "fast-seq2point");
  s.set_default("train.framework", "regression");
  s.set_default("train.batch_size", "128");
  s.set_default("train.lr", "0.001");
  s.set_default("train.max_iterations", "5000");
  s.set_default("train.eval_every", "100");
  s.set_default("train.patience", "10");
  s.set_default("train.validation_fraction", "0.1");
  s.set_default("train.validation_windows", "0");
  s.set_default("train.cutoff", format_double(kDefaultCutoff));
  s.set_default("train.seed", "1");
  s.set_default("train.precision", "float32");
  s.set_default("train.seq2seq_stride", "0");
  s.set_default("model.family", "wavenet");

  ModelConfig c;
  c.family = parse_family(s.str("model.family"));
  c.head = framework_of(s);
  c.seed = s.u64("train.seed");
  if (s.has("model.filter_length"))
    c.filter_length = s.count("model.filter_length");
  if (c.family == Family::wavenet) {
    if (s.has("model.layers")) {
      const std::size_t layers = s.count("model.layers");
      if (layers < 1 || layers > 16)
        throw ConfigError("model.layers must be in [1, 16]");
      const std::size_t L = wavenet_receptive_field(layers, c.filter_length);
      if (s.has("model.receptive_field") && s.count("model.receptive_field") != L)
        throw ConfigError(
          "model.receptive_field " + std::to_string(s.count("model.receptive_field")) +
          " does not match model.layers " + std::to_string(layers) +
          ": a WaveNet with s dilated layers of filter length m sees (2^s - 1)(m - 1) + 1 = " +
          std::to_string(L) + " samples");
      s.set("model.receptive_field", std::to_string(L));
    } else {
      s.set_default("model.receptive_field", "127");
      s.set("model.layers", std::to_string(
                              wavenet_layers_for(s.count("model.receptive_field"),
                                                 c.filter_length)));
    }
    c.layers = s.count("model.layers");
  } else {
    if (s.has("model.layers"))
      throw ConfigError("model.layers applies to the wavenet family only");
    s.set_default("model.receptive_field", "127");
  }
  c.receptive_field = s.count("model.receptive_field");

  const Paradigm paradigm = parse_paradigm(s.str("train.paradigm"));
  if (paradigm == Paradigm::seq2point) {
    if (s.has("model.target_field") && s.count("model.target_field") != 1)
      throw ConfigError("seq2point predicts one point: model.target_field must be 1");
    s.set("model.target_field", "1");
  } else if (paradigm == Paradigm::seq2seq) {
    if (s.has("model.target_field") &&
        s.count("model.target_field") != c.receptive_field)
      throw ConfigError("seq2seq outputs a sequence as long as its input: "
                        "model.target_field must equal model.receptive_field");
    s.set("model.target_field", std::to_string(c.receptive_field));
  } else {
    s.set_default("model.target_field", "10");
  }
  c.target_field = s.count("model.target_field");
  if (s.has("model.residual_channels"))
    c.residual_channels = s.count("model.residual_channels");
  if (s.has("model.skip_channels"))
    c.skip_channels = s.count("model.skip_channels");
  if (s.has("model.hidden_size"))
    c.hidden_size = s.count("model.hidden_size");
  if (s.has("model.rnn_layers"))
    c.rnn_layers = s.count("model.rnn_layers");
  if (s.has("model.cnn_dense_units"))
    c.cnn_dense_units = s.count("model.cnn_dense_units");
  c.validate();
  return c;
}

std::string manifest_path_for(const std::string &command, const Settings &s) {
  if (command == "ingest")
    return s.str("output.dataset") + ".manifest.yaml";
  if (command == "predict")
    return s.str("output.file") + ".manifest.yaml";
  return (fs::path(s.str("output.dir")) / "manifest.yaml").string();
}

void run_command(const std::string &command, Settings s, std::ostream &log) {
  if (command == "synth")
    cmd_synth(s, log);
  else if (command == "ingest")
    cmd_ingest(s, log);
  else if (command == "train")
    cmd_train(s, log);
  else if (command == "predict")
    cmd_predict(s, log);
  else if (command == "detect")
    cmd_detect(s, log);
  else if (command == "evaluate")
    cmd_evaluate(s, log);
  else if (command == "sweep")
    cmd_sweep(s, log);
  else
    throw ConfigError("unknown command '" + command + "'");
}

int run_command_guarded(const std::string &command, const Settings &settings,
                        std::ostream &log, std::ostream &err) {
  try {
    run_command(command, settings, log);
    return kExitOk;
  } catch (const DivergenceError &e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  } catch (const ConfigError &e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const FileError &e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const CsvError &e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const FormatError &e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ShapeError &e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

int rerun_manifest(const std::string &manifest_path, const Settings &overrides,
                   std::ostream &log, std::ostream &err) {
  RunManifest m;
  try {
    m = RunManifest::load(manifest_path);
    for (const auto &in : m.inputs) {
      if (!fs::exists(in.path))
        throw FileError("manifest input '" + in.path + "' does not exist");
      if (sha256_file(in.path) != in.sha256)
        throw FileError("manifest input '" + in.path + "' has changed since the run");
    }
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  Settings s = m.config;
  for (const auto &k : overrides.keys())
    s.set_node(k, overrides.node(k));
  // Outputs move with output.dir / output.file overrides.
  std::map<std::string, std::string> moved;
  for (const auto &o : m.outputs) {
    std::string p = o.path;
    for (const auto *key : {"output.dir", "output.file", "output.dataset"})
      if (overrides.has(key) && m.config.has(key)) {
        const std::string from = m.config.str(key), to = overrides.str(key);
        if (p.rfind(from, 0) == 0)
          p = to + p.substr(from.size());
      }
    moved[o.path] = p;
  }
  const int code = run_command_guarded(m.command, s, log, err);
  if (code != kExitOk)
    return code;
  int result = kExitOk;
  for (const auto &o : m.outputs) {
    if (o.timing || o.sha256.empty())
      continue;
    const auto &p = moved[o.path];
    const bool same = fs::exists(p) && sha256_file(p) == o.sha256;
    log << (same ? "identical " : "DIFFERS   ") << p << '\n';
    if (!same)
      result = kExitFailure;
  }
  return result;
}

} // namespace nilm
