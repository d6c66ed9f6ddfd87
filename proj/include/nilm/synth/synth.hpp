// SPDX-License-Identifier: Apache-2.0
/**
 * @file   synth.hpp
 * @brief  Synthetic households: appliance activations mixed into an
 *         aggregate with background noise.
 *
 * All channels are whole watts, so the aggregate equals the sum of the
 * appliance channels and the noise channel exactly in any summation order.
 */
#pragma once

#include <nilm/data/dataset.hpp>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace nilm {

enum class ProfileShape { rectangular, two_phase, multi_cycle };

std::string to_string(ProfileShape s);
ProfileShape parse_profile_shape(const std::string &s);

struct Activation {
  std::int64_t start_s = 0;    ///< offset from the scenario start
  std::int64_t duration_s = 0;
  bool operator==(const Activation &) const = default;
};

struct SignatureTemplate {
  std::string name;
  ProfileShape shape = ProfileShape::rectangular;
  double peak_watts = 0.0;
  double on_threshold = 0.0;       ///< state threshold for ground truth
  double min_duration_s = 0.0;     ///< on-duration ~ U[min, max]
  double max_duration_s = 0.0;
  double mean_gap_s = 0.0;         ///< off-gap ~ Exp(mean)
  /// Long-run on-fraction; when > 0 it sets the mean gap from the mean
  /// duration and overrides mean_gap_s.
  double duty_target = 0.0;
  double low_watts = 0.0;          ///< plateau (two-phase) or pause (multi-cycle)
  double phase_fraction = 0.2;     ///< share of the run spent at peak (two-phase)
  std::size_t cycles = 3;          ///< heating cycles (multi-cycle)
  /// Explicit activations replace the random process when non-empty.
  std::vector<Activation> activations;

  double mean_duration_s() const { return 0.5 * (min_duration_s + max_duration_s); }
  double effective_mean_gap_s() const;
  /// Throws ConfigError on a peak not above the threshold, non-positive
  /// durations or gaps, or inconsistent shape parameters.
  void validate() const;
  bool operator==(const SignatureTemplate &) const = default;
};

/// Removes `missing` consecutive readings starting at sample `start` from
/// fixture files; the series itself is untouched.
struct Dropout {
  std::size_t start = 0;
  std::size_t missing = 0;
  bool operator==(const Dropout &) const = default;
};

struct SyntheticScenario {
  std::size_t samples = 0;         ///< at 10 s
  std::int64_t start_time = 0;     ///< epoch seconds of sample 0
  std::vector<SignatureTemplate> templates;
  double noise_floor = 60.0;       ///< mean of the background load
  double noise_std = 20.0;
  std::uint64_t seed = 1;
  std::vector<Dropout> dropouts;

  void validate() const;
  bool operator==(const SyntheticScenario &) const = default;
};

struct SyntheticHousehold {
  std::vector<std::int64_t> timestamps;
  std::vector<double> aggregate;
  std::vector<double> noise;
  std::map<std::string, std::vector<double>> appliances;
  std::map<std::string, std::vector<std::uint8_t>> states;

  std::size_t size() const { return aggregate.size(); }
  /// Samples [begin, end) as a preprocessed household.
  Household to_household(int id, std::size_t begin, std::size_t end) const;
  Household to_household(int id) const { return to_household(id, 0, size()); }
};

/// Deterministic per seed; each template draws from its own sub-stream.
SyntheticHousehold generate(const SyntheticScenario &scenario);

/// Watts of one activation, sample by sample.
std::vector<double> render_activation(const SignatureTemplate &tpl,
                                      std::size_t samples, std::uint64_t seed);

/// Meter CSV of the scenario with its dropouts removed.
std::string format_fixture_csv(const SyntheticScenario &scenario,
                               const SyntheticHousehold &household);
void make_fixture_csv(const SyntheticScenario &scenario, const std::string &path);

/// Kettle (rectangular, about 1% on), washer (two-phase) and dishwasher
/// (multi-cycle) templates.
SignatureTemplate kettle_like();
SignatureTemplate washer_like();
SignatureTemplate dishwasher_like();
/// Kettle-like plus washer-like with the default noise.
SyntheticScenario desk_scenario(std::size_t samples, std::uint64_t seed);

/// YAML scenario files.
SyntheticScenario parse_scenario(const std::string &yaml_text);
SyntheticScenario load_scenario(const std::string &path);
std::string format_scenario(const SyntheticScenario &scenario);

} // namespace nilm
