// SPDX-License-Identifier: Apache-2.0
/**
 * @file   window.hpp
 * @brief  Sliding-window datasets for (fast) sequence-to-point training.
 *
 * A dataset keeps one normalised input series and one target series per
 * household and addresses windows by start offset, so inputs are views
 * rather than copies. Window k covers input samples [s, s + L + r - 1) and
 * target samples [s + off, s + off + r) with off = floor(L/2).
 */
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace nilm {

struct WindowSource {
  int household = 0;
  std::vector<double> inputs;  ///< normalised aggregate
  std::vector<double> targets; ///< normalised watts or {0, 1} states
  bool operator==(const WindowSource &) const = default;
};

struct WindowRef {
  std::uint32_t source = 0;
  std::uint64_t start = 0;
  bool operator==(const WindowRef &) const = default;
};

struct WindowProvenance {
  int household;
  std::size_t start;
};

class WindowedDataset {
 public:
  WindowedDataset() = default;
  WindowedDataset(std::size_t input_length, std::size_t target_length,
                  std::size_t target_offset)
    : input_length_(input_length), target_length_(target_length),
      target_offset_(target_offset) {}

  std::size_t input_length() const { return input_length_; }
  std::size_t target_length() const { return target_length_; }
  std::size_t target_offset() const { return target_offset_; }

  std::size_t size() const { return windows_.size(); }
  bool empty() const { return windows_.empty(); }

  std::span<const double> input(std::size_t k) const;
  std::span<const double> target(std::size_t k) const;
  WindowProvenance provenance(std::size_t k) const;

  const std::vector<WindowSource> &sources() const { return sources_; }
  const std::vector<WindowRef> &windows() const { return windows_; }

  /// Adds a source and returns its index. Windows are added separately.
  std::uint32_t add_source(WindowSource source);
  /// Throws std::out_of_range if the window does not fit its source.
  void add_window(WindowRef ref);
  /// Keeps the windows for which `keep(k)` is true, preserving order.
  template <typename Pred> WindowedDataset filtered(Pred keep) const {
    WindowedDataset out = *this;
    out.windows_.clear();
    for (std::size_t k = 0; k < windows_.size(); ++k)
      if (keep(k))
        out.windows_.push_back(windows_[k]);
    return out;
  }
  /// Windows [begin, end) in the current order.
  WindowedDataset slice(std::size_t begin, std::size_t end) const;

  bool operator==(const WindowedDataset &) const = default;

 private:
  std::size_t input_length_ = 0, target_length_ = 0, target_offset_ = 0;
  std::vector<WindowSource> sources_;
  std::vector<WindowRef> windows_;
};

/// Number of windows of length L + r - 1 with stride r in a series of T
/// samples: floor((T - (L + r - 1)) / r) + 1, or 0 when T < L + r - 1.
std::size_t window_count(std::size_t T, std::size_t L, std::size_t r);

/// Fast sequence-to-point windows at offsets 0, r, 2r, ... Returns an empty
/// dataset (and logs a warning) when the series is shorter than L + r - 1.
WindowedDataset slice_windows(std::span<const double> aggregate,
                              std::span<const double> target, std::size_t L,
                              std::size_t r, int household = 0);

/// Sequence-to-sequence windows: targets are the `length` samples starting
/// at each offset, inputs are the same samples with floor(L/2) zero-valued
/// samples of context padded on each side so an (L, r = length) model maps
/// them one-to-one.
WindowedDataset slice_seq2seq_windows(std::span<const double> aggregate,
                                      std::span<const double> target,
                                      std::size_t L, std::size_t length,
                                      std::size_t stride, int household = 0);

/// Drops windows whose target field contains an appliance reading above the
/// aggregate reading at the same time index. `raw_*[s]` hold the
/// unnormalised watts of source s.
WindowedDataset filter_invalid(const WindowedDataset &dataset,
                               std::span<const std::vector<double>> raw_aggregate,
                               std::span<const std::vector<double>> raw_appliance);

/// Single-source convenience form.
WindowedDataset filter_invalid(const WindowedDataset &dataset,
                               std::span<const double> raw_aggregate,
                               std::span<const double> raw_appliance);

/// Per-point evaluation mask: false where aggregate < appliance or the
/// aggregate is zero.
std::vector<bool> evaluation_mask(std::span<const double> raw_aggregate,
                                  std::span<const double> raw_appliance);

/// Concatenates datasets with equal geometry, ordered by (household, start).
WindowedDataset merge(std::span<const WindowedDataset> parts);

} // namespace nilm
