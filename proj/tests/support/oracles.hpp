// SPDX-License-Identifier: Apache-2.0
/**
 * @file   oracles.hpp
 * @brief  Independent reference computations for the data and metric code.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace nilm::testing {

struct WindowEnumeration {
  std::size_t cases = 0;
  std::size_t count_mismatches = 0;     ///< window_count vs enumeration
  std::size_t slice_mismatches = 0;     ///< slice_windows starts vs enumeration
  std::size_t alignment_mismatches = 0; ///< target samples vs source indices
};

/// Every T <= max_T for each (L, r): valid offsets are enumerated by brute
/// force and compared with window_count and slice_windows.
WindowEnumeration enumerate_windows(std::size_t max_T,
                                    std::span<const std::size_t> Ls,
                                    std::span<const std::size_t> rs);

/// Gap fixture: value 50 at t = 0, then `missing` grid points, then 70.
/// Returns the gap-filled watts as produced by resample + fill_gaps from raw
/// readings with a hole of that many grid points.
std::vector<double> gap_fixture(std::size_t missing);
/// Bytes of the doubles, for byte-exact comparison.
std::string bytes_of(std::span<const double> v);

/// Largest |denormalize(normalize(x)) - x| over `n` seeded random watts.
double normalization_roundtrip_error(std::size_t n, std::uint64_t seed);

struct MetricOracle {
  double mae = 0, sae = 0, precision = 0, recall = 0, f1 = 0;
};
/// One-pass reference: a single loop accumulating every sum at once.
MetricOracle one_pass_metrics(std::span<const double> pred,
                              std::span<const double> truth,
                              std::span<const std::uint8_t> pred_states,
                              std::span<const std::uint8_t> truth_states);

struct MetricAgreement {
  double mae_diff = 0, sae_diff = 0, f1_diff = 0, precision_diff = 0,
         recall_diff = 0;
  double worst() const;
};
/// Library vs one-pass oracle on `n` seeded random points.
MetricAgreement compare_metrics(std::size_t n, std::uint64_t seed);

} // namespace nilm::testing
