// SPDX-License-Identifier: Apache-2.0
#include <nilm/core/error.hpp>
#include <nilm/core/rng.hpp>
#include <nilm/data/container.hpp>
#include <nilm/data/csv.hpp>
#include <nilm/synth/synth.hpp>

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <set>

namespace nilm {

namespace {

constexpr std::int64_t kStep = kResampleInterval;

double whole(double w) { return std::max(0.0, std::round(w)); }

} // namespace

std::string to_string(ProfileShape s) {
  switch (s) {
  case ProfileShape::rectangular:
    return "rectangular";
  case ProfileShape::two_phase:
    return "two-phase";
  case ProfileShape::multi_cycle:
    return "multi-cycle";
  }
  return "?";
}

ProfileShape parse_profile_shape(const std::string &s) {
  if (s == "rectangular")
    return ProfileShape::rectangular;
  if (s == "two-phase")
    return ProfileShape::two_phase;
  if (s == "multi-cycle")
    return ProfileShape::multi_cycle;
  throw ConfigError("unknown profile shape '" + s +
                    "' (expected rectangular, two-phase or multi-cycle)");
}

double SignatureTemplate::effective_mean_gap_s() const {
  if (duty_target > 0)
    return mean_duration_s() * (1.0 - duty_target) / duty_target;
  return mean_gap_s;
}

void SignatureTemplate::validate() const {
  const std::string who = "template '" + name + "': ";
  if (name.empty() || name == kAggregateChannel)
    throw ConfigError("template name must be non-empty and not 'aggregate'");
  if (!(on_threshold > 0))
    throw ConfigError(who + "threshold must be > 0");
  if (!(peak_watts > on_threshold))
    throw ConfigError(who + "peak watts must exceed the on threshold");
  if (!(low_watts >= 0))
    throw ConfigError(who + "low watts must be >= 0");
  if (shape == ProfileShape::two_phase) {
    if (!(phase_fraction > 0 && phase_fraction <= 1))
      throw ConfigError(who + "phase fraction must be in (0, 1]");
    if (!(low_watts >= on_threshold))
      throw ConfigError(who + "two-phase plateau must reach the on threshold");
  }
  if (shape == ProfileShape::multi_cycle && cycles < 1)
    throw ConfigError(who + "cycles must be >= 1");
  for (const auto &a : activations)
    if (a.start_s < 0 || a.duration_s < kStep)
      throw ConfigError(who + "activations need start >= 0 and duration >= 10 s");
  if (!activations.empty())
    return;
  if (!(min_duration_s >= kStep && max_duration_s >= min_duration_s))
    throw ConfigError(who + "durations must satisfy 10 <= min <= max");
  if (duty_target != 0 && !(duty_target > 0 && duty_target < 1))
    throw ConfigError(who + "duty target must be in (0, 1)");
  if (!(effective_mean_gap_s() > 0))
    throw ConfigError(who + "mean gap must be > 0");
}

void SyntheticScenario::validate() const {
  if (!(noise_floor >= 0 && noise_std >= 0))
    throw ConfigError("scenario: noise floor and std must be >= 0");
  std::set<std::string> names;
  for (const auto &t : templates) {
    t.validate();
    if (!names.insert(t.name).second)
      throw ConfigError("scenario: duplicate template '" + t.name + "'");
  }
  for (const auto &d : dropouts)
    if (d.missing == 0 || d.start + d.missing > samples)
      throw ConfigError("scenario: dropout outside the series");
}

std::vector<double> render_activation(const SignatureTemplate &tpl,
                                      std::size_t n, std::uint64_t seed) {
  CounterRng rng(seed);
  std::vector<double> w(n, 0.0);
  const double peak = whole(tpl.peak_watts * (1.0 + 0.02 * rng.uniform(-1, 1)));
  switch (tpl.shape) {
  case ProfileShape::rectangular:
    std::fill(w.begin(), w.end(), peak);
    break;
  case ProfileShape::two_phase: {
    const auto heat = std::min(
      n, std::size_t(std::ceil(tpl.phase_fraction * double(n))));
    for (std::size_t i = 0; i < n; ++i)
      w[i] = i < heat ? peak
                      : std::max(tpl.on_threshold,
                                 whole(tpl.low_watts * (1.0 + 0.15 * rng.uniform(-1, 1))));
    break;
  }
  case ProfileShape::multi_cycle: {
    const std::size_t segments = 2 * tpl.cycles - 1;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t seg = i * segments / n;
      w[i] = seg % 2 == 0 ? peak : whole(tpl.low_watts);
    }
    break;
  }
  }
  return w;
}

SyntheticHousehold generate(const SyntheticScenario &sc) {
  sc.validate();
  const std::size_t n = sc.samples;
  SyntheticHousehold h;
  h.timestamps.resize(n);
  for (std::size_t t = 0; t < n; ++t)
    h.timestamps[t] = sc.start_time + std::int64_t(t) * kStep;

  CounterRng noise_rng(derive_seed(sc.seed, 0));
  h.noise.resize(n);
  for (auto &v : h.noise)
    v = whole(sc.noise_floor + sc.noise_std * noise_rng.normal());

  for (std::size_t i = 0; i < sc.templates.size(); ++i) {
    const auto &tpl = sc.templates[i];
    const std::uint64_t stream = derive_seed(sc.seed, i + 1);
    auto &w = h.appliances[tpl.name];
    w.assign(n, 0.0);
    std::size_t k = 0;
    auto place = [&](std::size_t start, std::size_t len) {
      const auto profile = render_activation(tpl, len, derive_seed(stream, k + 1));
      for (std::size_t j = 0; j < len && start + j < n; ++j)
        w[start + j] = profile[j];
      ++k;
    };
    if (!tpl.activations.empty()) {
      for (const auto &a : tpl.activations)
        place(std::size_t(a.start_s / kStep), std::size_t(a.duration_s / kStep));
    } else {
      CounterRng rng(derive_seed(stream, 0));
      const double gap = tpl.effective_mean_gap_s();
      double t = rng.exponential(gap);
      while (true) {
        const double dur = rng.uniform(tpl.min_duration_s, tpl.max_duration_s);
        const auto len = std::max<std::size_t>(1, std::size_t(std::llround(dur / kStep)));
        const auto start = std::size_t(std::llround(t / kStep));
        if (start >= n)
          break;
        place(start, len);
        t = double(start + len) * kStep + rng.exponential(gap);
      }
    }
    h.states[tpl.name] = binarize(w, tpl.on_threshold);
  }

  h.aggregate = h.noise;
  for (const auto &tpl : sc.templates) {
    const auto &w = h.appliances.at(tpl.name);
    for (std::size_t t = 0; t < n; ++t)
      h.aggregate[t] += w[t];
  }
  return h;
}

Household SyntheticHousehold::to_household(int id, std::size_t begin,
                                           std::size_t end) const {
  if (begin > end || end > size())
    throw std::out_of_range("to_household: range outside the series");
  Household out;
  out.id = id;
  out.timestamps.assign(timestamps.begin() + begin, timestamps.begin() + end);
  out.aggregate.assign(aggregate.begin() + begin, aggregate.begin() + end);
  for (const auto &[name, w] : appliances)
    out.appliances[name].assign(w.begin() + begin, w.begin() + end);
  return out;
}

std::string format_fixture_csv(const SyntheticScenario &sc,
                               const SyntheticHousehold &h) {
  std::vector<bool> keep(h.size(), true);
  for (const auto &d : sc.dropouts)
    std::fill(keep.begin() + d.start, keep.begin() + d.start + d.missing, false);
  auto pick = [&](const auto &v) {
    std::decay_t<decltype(v)> out;
    for (std::size_t t = 0; t < v.size(); ++t)
      if (keep[t])
        out.push_back(v[t]);
    return out;
  };
  const auto ts = pick(h.timestamps);
  std::vector<std::vector<double>> values = {pick(h.aggregate)};
  std::vector<std::string> names = {kAggregateChannel};
  for (const auto &tpl : sc.templates) {
    values.push_back(pick(h.appliances.at(tpl.name)));
    names.push_back(tpl.name);
  }
  std::vector<CsvColumn> cols;
  for (std::size_t c = 0; c < values.size(); ++c)
    cols.push_back({names[c], values[c]});
  return format_csv(ts, cols);
}

void make_fixture_csv(const SyntheticScenario &scenario, const std::string &path) {
  write_file(path, format_fixture_csv(scenario, generate(scenario)));
}

SignatureTemplate kettle_like() {
  SignatureTemplate t;
  t.name = "kettle";
  t.shape = ProfileShape::rectangular;
  t.peak_watts = 2200;
  t.on_threshold = 2000;
  t.min_duration_s = 120;
  t.max_duration_s = 300;
  t.duty_target = 0.01;
  return t;
}

SignatureTemplate washer_like() {
  SignatureTemplate t;
  t.name = "washing_machine";
  t.shape = ProfileShape::two_phase;
  t.peak_watts = 2000;
  t.on_threshold = 20;
  t.low_watts = 300;
  t.phase_fraction = 0.2;
  t.min_duration_s = 2400;
  t.max_duration_s = 5400;
  t.duty_target = 0.08;
  return t;
}

SignatureTemplate dishwasher_like() {
  SignatureTemplate t;
  t.name = "dishwasher";
  t.shape = ProfileShape::multi_cycle;
  t.peak_watts = 2000;
  t.on_threshold = 10;
  t.low_watts = 80;
  t.cycles = 3;
  t.min_duration_s = 3600;
  t.max_duration_s = 7200;
  t.duty_target = 0.05;
  return t;
}

SyntheticScenario desk_scenario(std::size_t samples, std::uint64_t seed) {
  SyntheticScenario s;
  s.samples = samples;
  s.seed = seed;
  s.templates = {kettle_like(), washer_like()};
  return s;
}

namespace {

const std::set<std::string> kScenarioKeys = {
  "samples", "start_time", "seed", "noise", "appliances", "dropouts"};
const std::set<std::string> kTemplateKeys = {
  "name", "shape", "peak_watts", "threshold", "duration_s", "mean_gap_s",
  "duty_target", "low_watts", "phase_fraction", "cycles", "activations"};

void check_keys(const YAML::Node &node, const std::set<std::string> &known,
                const std::string &where) {
  if (!node.IsMap())
    throw ConfigError(where + " must be a map");
  for (const auto &kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!known.count(key))
      throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <typename T> void read(const YAML::Node &n, const char *key, T &out) {
  if (n[key])
    out = n[key].as<T>();
}

std::string num(double v) { return format_double(v); }

} // namespace

SyntheticScenario parse_scenario(const std::string &text) {
  SyntheticScenario sc;
  try {
    const YAML::Node root = YAML::Load(text);
    check_keys(root, kScenarioKeys, "scenario");
    if (!root["samples"])
      throw ConfigError("scenario: 'samples' is required");
    read(root, "samples", sc.samples);
    read(root, "start_time", sc.start_time);
    read(root, "seed", sc.seed);
    if (const auto noise = root["noise"]) {
      check_keys(noise, {"floor", "std"}, "scenario noise");
      read(noise, "floor", sc.noise_floor);
      read(noise, "std", sc.noise_std);
    }
    if (const auto apps = root["appliances"])
      for (const auto &a : apps) {
        check_keys(a, kTemplateKeys, "scenario appliance");
        SignatureTemplate t;
        read(a, "name", t.name);
        if (a["shape"])
          t.shape = parse_profile_shape(a["shape"].as<std::string>());
        read(a, "peak_watts", t.peak_watts);
        read(a, "threshold", t.on_threshold);
        if (a["duration_s"]) {
          const auto d = a["duration_s"].as<std::vector<double>>();
          if (d.size() != 2)
            throw ConfigError("template '" + t.name + "': duration_s is [min, max]");
          t.min_duration_s = d[0];
          t.max_duration_s = d[1];
        }
        read(a, "mean_gap_s", t.mean_gap_s);
        read(a, "duty_target", t.duty_target);
        read(a, "low_watts", t.low_watts);
        read(a, "phase_fraction", t.phase_fraction);
        read(a, "cycles", t.cycles);
        if (a["activations"])
          for (const auto &p : a["activations"].as<std::vector<std::vector<std::int64_t>>>()) {
            if (p.size() != 2)
              throw ConfigError("template '" + t.name +
                                "': activations are [start_s, duration_s]");
            t.activations.push_back({p[0], p[1]});
          }
        sc.templates.push_back(std::move(t));
      }
    if (root["dropouts"])
      for (const auto &p : root["dropouts"].as<std::vector<std::vector<std::size_t>>>()) {
        if (p.size() != 2)
          throw ConfigError("scenario: dropouts are [start, missing]");
        sc.dropouts.push_back({p[0], p[1]});
      }
  } catch (const YAML::Exception &e) {
    throw ConfigError(std::string("scenario file: ") + e.what());
  }
  sc.validate();
  return sc;
}

SyntheticScenario load_scenario(const std::string &path) {
  return parse_scenario(read_file(path));
}

std::string format_scenario(const SyntheticScenario &sc) {
  YAML::Emitter e;
  e << YAML::BeginMap;
  e << YAML::Key << "samples" << YAML::Value << sc.samples;
  e << YAML::Key << "start_time" << YAML::Value << sc.start_time;
  e << YAML::Key << "seed" << YAML::Value << sc.seed;
  e << YAML::Key << "noise" << YAML::Value << YAML::BeginMap
    << YAML::Key << "floor" << YAML::Value << num(sc.noise_floor)
    << YAML::Key << "std" << YAML::Value << num(sc.noise_std) << YAML::EndMap;
  e << YAML::Key << "appliances" << YAML::Value << YAML::BeginSeq;
  for (const auto &t : sc.templates) {
    e << YAML::BeginMap;
    e << YAML::Key << "name" << YAML::Value << t.name;
    e << YAML::Key << "shape" << YAML::Value << to_string(t.shape);
    e << YAML::Key << "peak_watts" << YAML::Value << num(t.peak_watts);
    e << YAML::Key << "threshold" << YAML::Value << num(t.on_threshold);
    e << YAML::Key << "duration_s" << YAML::Value << YAML::Flow << YAML::BeginSeq
      << num(t.min_duration_s) << num(t.max_duration_s) << YAML::EndSeq;
    e << YAML::Key << "mean_gap_s" << YAML::Value << num(t.mean_gap_s);
    e << YAML::Key << "duty_target" << YAML::Value << num(t.duty_target);
    e << YAML::Key << "low_watts" << YAML::Value << num(t.low_watts);
    e << YAML::Key << "phase_fraction" << YAML::Value << num(t.phase_fraction);
    e << YAML::Key << "cycles" << YAML::Value << t.cycles;
    if (!t.activations.empty()) {
      e << YAML::Key << "activations" << YAML::Value << YAML::Flow << YAML::BeginSeq;
      for (const auto &a : t.activations)
        e << YAML::Flow << YAML::BeginSeq << a.start_s << a.duration_s << YAML::EndSeq;
      e << YAML::EndSeq;
    }
    e << YAML::EndMap;
  }
  e << YAML::EndSeq;
  if (!sc.dropouts.empty()) {
    e << YAML::Key << "dropouts" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (const auto &d : sc.dropouts)
      e << YAML::Flow << YAML::BeginSeq << d.start << d.missing << YAML::EndSeq;
    e << YAML::EndSeq;
  }
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

} // namespace nilm
