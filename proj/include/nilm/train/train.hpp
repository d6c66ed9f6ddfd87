// SPDX-License-Identifier: Apache-2.0
/**
 * @file   train.hpp
 * @brief  Mini-batch training loop over windowed datasets.
 *
 * Regression heads minimise the mean absolute error over the target field,
 * classification heads the binary cross-entropy; both are averaged over
 * the windows of a batch and optimised with Adam.
 */
#pragma once

#include <nilm/core/adam.hpp>
#include <nilm/data/window.hpp>
#include <nilm/model/model.hpp>

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nilm {

enum class Paradigm { seq2seq, seq2point, fast_seq2point };
enum class Precision { float32, float64 };

std::string to_string(Paradigm p);
std::string to_string(Precision p);
Paradigm parse_paradigm(const std::string &s);
Precision parse_precision(const std::string &s);

struct TrainConfig {
  Paradigm paradigm = Paradigm::fast_seq2point;
  Head framework = Head::regression;
  std::size_t batch_size = 128;
  double lr = 0.001;
  std::size_t max_iterations = 5000;
  std::size_t eval_every = 100;
  std::size_t patience = 10; ///< evaluations without improvement
  double validation_fraction = 0.1;
  /// Validation windows scored per evaluation, spread evenly over the
  /// validation slice; 0 scores all of them.
  std::size_t validation_windows = 0;
  double cutoff = 0.3;       ///< classification validation F1 cut-off
  double metric_scale = 1.0; ///< multiplies validation MAE (appliance std)
  std::uint64_t seed = 1;
  Precision precision = Precision::float32;
  /// Where a model snapshot is written if the loss turns non-finite.
  std::string snapshot_path;

  /// Throws ConfigError on out-of-range values.
  void validate() const;
};

struct IterationRecord {
  std::size_t iteration = 0; ///< 1-based
  double loss = 0.0;
  double metric = std::numeric_limits<double>::quiet_NaN(); ///< NaN if not evaluated
  double ms = 0.0;
};

struct TrainingRun {
  std::vector<IterationRecord> log;
  std::size_t iterations = 0;
  std::size_t best_iteration = 0;
  double best_metric = std::numeric_limits<double>::quiet_NaN();
  bool early_stopped = false;
  double mean_ms_per_iteration = 0.0;
};

/// Thrown when the loss becomes NaN or infinite.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string &what, std::string snapshot)
    : std::runtime_error(what), snapshot_path(std::move(snapshot)) {}
  std::string snapshot_path;
};

template <typename Real> struct TrainHooks {
  /// Called after the loss of a batch is computed and before the update,
  /// with the window indices of the batch and the model it was scored on.
  std::function<void(std::size_t iteration, std::span<const std::size_t> batch,
                     double loss, const Model<Real> &model)>
    on_batch;
  std::function<void(const IterationRecord &)> on_record;
  /// Writes a snapshot for DivergenceError; defaults to none.
  std::function<void(const Model<Real> &, const std::string &path)> snapshot;
};

/// Trains `model` in place. With early stopping the best validated
/// parameters are restored before returning. Deterministic for a fixed
/// config, dataset and initial model.
template <typename Real>
TrainingRun train(Model<Real> &model, const WindowedDataset &dataset,
                  const TrainConfig &config, const TrainHooks<Real> &hooks = {});

/// Mean per-window loss of the listed windows, as train() reports it.
template <typename Real>
double batch_loss(const Model<Real> &model, const WindowedDataset &dataset,
                  std::span<const std::size_t> windows);

/// Split used by train(): the first (1 - validation_fraction) of the
/// windows train, the rest validate.
std::size_t training_window_count(std::size_t windows, double validation_fraction);

/// `iteration,loss,metric,ms` with a leading `# nilm-train-log 1` line.
std::string format_training_log(const TrainingRun &run);

} // namespace nilm
