// SPDX-License-Identifier: Apache-2.0
/**
 * @file   report.hpp
 * @brief  Metrics report files and plot-data CSVs.
 *
 * Report format (version 1): a `format=nilm-report` line, `version=1`,
 * `records=<n>`, then one block per report opened by `[record]` and holding
 * `key=value` lines. Reals use the shortest round-trip decimal form; `nan`
 * marks a metric that was not measured. Records are sorted by (appliance,
 * model, L, r).
 */
#pragma once

#include <nilm/eval/metrics.hpp>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace nilm {

inline constexpr int kReportVersion = 1;

void sort_reports(std::vector<MetricsReport> &reports);
std::string format_report(std::vector<MetricsReport> reports);
/// Throws FormatError on malformed input.
std::vector<MetricsReport> parse_report(const std::string &text);

/// Equality that treats two unmeasured (NaN) fields as equal.
bool same_report(const MetricsReport &a, const MetricsReport &b);

/// Mean and population standard deviation of each metric across the
/// appliances evaluated with one (model, L, r).
struct OverallSummary {
  std::string model;
  std::size_t receptive_field = 0, target_field = 0;
  std::size_t appliances = 0;
  double mae_mean = kNotMeasured, mae_std = kNotMeasured;
  double sae_mean = kNotMeasured, sae_std = kNotMeasured;
  double f1_mean = 0.0, f1_std = 0.0;
};
std::vector<OverallSummary> summarize(std::span<const MetricsReport> reports);

/// `appliance,model,receptive_field,target_field,mae,sae,f1,ms_per_iteration`
std::string format_curves_csv(std::vector<MetricsReport> reports);
/// `model,receptive_field,target_field,appliances,mae_mean,mae_std,sae_mean,
/// sae_std,f1_mean,f1_std`
std::string format_overall_csv(std::span<const OverallSummary> summaries);

/// Prediction-vs-truth excerpt: `timestamp,aggregate,truth,prediction`, one
/// row per sample in [begin, begin + length); `prediction` is empty where
/// the model made none.
struct Excerpt {
  std::span<const std::int64_t> timestamps;
  std::span<const double> aggregate, truth, prediction;
  const std::vector<bool> *valid = nullptr;
};
std::string format_excerpt_csv(const Excerpt &excerpt, std::size_t begin,
                               std::size_t length);

struct ReportPaths {
  std::string report, curves, overall;
};
/// Writes report.txt, curves.csv and overall.csv into `directory`.
ReportPaths emit_report(const std::string &directory,
                        std::span<const MetricsReport> reports);

} // namespace nilm
