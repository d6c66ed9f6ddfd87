// SPDX-License-Identifier: Apache-2.0
/**
 * @file   metrics.hpp
 * @brief  MAE, SAE and on/off F1 over test points, with the exclusion of
 *         points whose aggregate is zero or below the appliance reading.
 */
#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nilm {

/// A metric whose denominator is empty or zero.
class MetricError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Mean absolute error. Throws MetricError for empty input.
double mae(std::span<const double> pred, std::span<const double> truth);
/// |sum pred - sum truth| / sum truth. Throws MetricError if sum truth == 0.
double sae(std::span<const double> pred, std::span<const double> truth);

struct Confusion {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  bool operator==(const Confusion &) const = default;
};

struct F1Score {
  double precision = 0.0, recall = 0.0, f1 = 0.0;
  Confusion counts;
};

/// Precision, recall and F1; any zero denominator yields 0.
F1Score f1_score(std::span<const std::uint8_t> pred,
                 std::span<const std::uint8_t> truth);
F1Score f1_from_counts(const Confusion &c);

inline constexpr double kNotMeasured = std::numeric_limits<double>::quiet_NaN();

struct MetricsReport {
  std::string appliance;
  std::string model;
  std::size_t receptive_field = 0; ///< L, 0 for baselines
  std::size_t target_field = 0;    ///< r, 0 for baselines
  double mae = kNotMeasured;       ///< watts; NaN when no energy estimate
  double sae = kNotMeasured;
  double precision = 0.0, recall = 0.0, f1 = 0.0;
  Confusion counts;
  std::size_t evaluated = 0; ///< points entering the metrics
  std::size_t excluded = 0;  ///< points removed by the exclusion rule
  std::size_t unpredicted = 0; ///< points without a prediction
  double ms_per_iteration = kNotMeasured;

  bool has_energy() const { return mae == mae; }
};

/// Inputs are aligned raw-watt series. `predicted_watts` may be empty (a
/// classifier has no energy estimate); `predicted_valid` may be empty (all
/// predicted). States for the truth are truth_watts >= threshold.
struct EvaluationInput {
  std::span<const double> aggregate;
  std::span<const double> truth_watts;
  std::span<const double> predicted_watts;
  std::span<const std::uint8_t> predicted_states;
  const std::vector<bool> *predicted_valid = nullptr;
  double on_threshold = 0.0;
};

MetricsReport evaluate(const EvaluationInput &input);

/// Constant-prediction comparators over the same points as evaluate().
MetricsReport baseline_always_zero(std::span<const double> aggregate,
                                   std::span<const double> truth_watts,
                                   double on_threshold,
                                   const std::vector<bool> *valid = nullptr);
MetricsReport baseline_always_mean(std::span<const double> aggregate,
                                   std::span<const double> truth_watts,
                                   double training_mean, double on_threshold,
                                   const std::vector<bool> *valid = nullptr);

} // namespace nilm
