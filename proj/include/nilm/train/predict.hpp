// SPDX-License-Identifier: Apache-2.0
/**
 * @file   predict.hpp
 * @brief  Whole-series inference and on/off detection.
 */
#pragma once

#include <nilm/data/dataset.hpp>
#include <nilm/model/serialize.hpp>

#include <cstdint>
#include <span>
#include <vector>

namespace nilm {

inline constexpr double kDefaultCutoff = 0.3;

/// Per-sample output aligned with the input series. `values` holds watts for
/// a regression head and probabilities for a classification head; samples
/// without a centred window are NaN with valid = false.
struct SeriesPrediction {
  Head head = Head::regression;
  std::vector<double> values;
  std::vector<bool> valid;

  std::size_t predicted() const;
};

/// Tiles non-overlapping target fields at offsets 0, r, 2r, ...; a last
/// window aligned to the end of the series covers the remainder without
/// overwriting earlier outputs. A series shorter than L + r - 1 yields no
/// predicted samples and a warning on stderr.
template <typename Real>
SeriesPrediction predict_series(const Model<Real> &model,
                                std::span<const double> aggregate,
                                const ChannelStats &stats);
SeriesPrediction predict_series(const TrainedModel &model,
                                std::span<const double> aggregate);

/// States from a prediction: watts >= threshold for regression,
/// probability > cutoff for classification. Unpredicted samples are 0.
std::vector<std::uint8_t> prediction_states(const SeriesPrediction &p,
                                            double threshold, double cutoff);

/// Throws ConfigError unless the model has a regression head.
std::vector<std::uint8_t> detect_onoff_regression(const TrainedModel &model,
                                                  std::span<const double> aggregate,
                                                  double threshold);
/// Throws ConfigError unless the model has a classification head.
std::vector<std::uint8_t> detect_onoff_classifier(const TrainedModel &model,
                                                  std::span<const double> aggregate,
                                                  double cutoff = kDefaultCutoff);

/// Arithmetic mean of overlapping window outputs: outputs[k] covers
/// samples starts[k] .. starts[k] + outputs[k].size() - 1. Uncovered samples
/// are NaN.
std::vector<double> average_overlapping(std::span<const std::size_t> starts,
                                        std::span<const std::vector<double>> outputs,
                                        std::size_t length);

/// Sequence-to-sequence inference with a model whose target field is the
/// sequence length: windows at the given stride (plus one aligned to the
/// end) are averaged per sample. Every sample is predicted.
template <typename Real>
SeriesPrediction predict_seq2seq(const Model<Real> &model,
                                 std::span<const double> aggregate,
                                 const ChannelStats &stats, std::size_t stride);

} // namespace nilm
