// SPDX-License-Identifier: Apache-2.0
/**
 * @file   dataset.hpp
 * @brief  Household preprocessing and train/test dataset materialisation.
 */
#pragma once

#include <nilm/data/csv.hpp>
#include <nilm/data/normalize.hpp>
#include <nilm/data/window.hpp>

#include <map>
#include <span>
#include <string>
#include <vector>

namespace nilm {

/// One household's channels on a common 10 s grid with gaps filled.
struct Household {
  int id = 0;
  std::vector<std::int64_t> timestamps;
  std::vector<double> aggregate;
  std::map<std::string, std::vector<double>> appliances;

  std::size_t size() const { return aggregate.size(); }
  /// Throws std::out_of_range naming the appliance if absent.
  const std::vector<double> &appliance(const std::string &name) const;
  bool operator==(const Household &) const = default;
};

/// Resamples and gap-fills every channel of an ingested table.
Household preprocess(const CsvTable &table, int id);
Household load_household(const std::string &path, int id,
                         const CsvOptions &options = {});

enum class TargetKind { watts, states };

struct DatasetSpec {
  std::size_t receptive_field = 127; ///< L
  std::size_t target_field = 10;     ///< r; the sequence length for seq2seq
  TargetKind targets = TargetKind::watts;
  double on_threshold = 0.0;         ///< used when targets == states
  bool seq2seq = false;
  std::size_t seq2seq_stride = 0;    ///< 0: non-overlapping
  bool drop_invalid = true;
};

struct ChannelStats {
  NormalizationStats aggregate;
  NormalizationStats appliance;
  bool operator==(const ChannelStats &) const = default;
};

/// Statistics over the given (training) households only.
ChannelStats compute_channel_stats(std::span<const Household> households,
                                   const std::string &appliance);

/// Normalises, windows and filters each household, then merges them in
/// household order. Regression targets are normalised watts, classification
/// targets are binarised raw watts.
WindowedDataset materialize(std::span<const Household> households,
                            const std::string &appliance,
                            const ChannelStats &stats, const DatasetSpec &spec);

/// Binary cache of a WindowedDataset (64-bit values). `meta` is stored as
/// extra header lines and returned by load_dataset.
void save_dataset(const std::string &path, const WindowedDataset &dataset,
                  const std::string &meta = {});
WindowedDataset load_dataset(const std::string &path, std::string *meta = nullptr);
std::string encode_dataset(const WindowedDataset &dataset,
                           const std::string &meta = {});
WindowedDataset decode_dataset(const std::string &bytes,
                               std::string *meta = nullptr);

} // namespace nilm
