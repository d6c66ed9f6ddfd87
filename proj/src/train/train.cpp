// SPDX-License-Identifier: Apache-2.0
#include <nilm/core/loss.hpp>
#include <nilm/core/rng.hpp>
#include <nilm/data/csv.hpp>
#include <nilm/eval/metrics.hpp>
#include <nilm/train/train.hpp>

#include <chrono>
#include <cmath>
#include <numeric>

namespace nilm {

std::string to_string(Paradigm p) {
  switch (p) {
  case Paradigm::seq2seq:
    return "seq2seq";
  case Paradigm::seq2point:
    return "seq2point";
  case Paradigm::fast_seq2point:
    return "fast-seq2point";
  }
  return "?";
}

std::string to_string(Precision p) {
  return p == Precision::float32 ? "float32" : "float64";
}

Paradigm parse_paradigm(const std::string &s) {
  if (s == "seq2seq")
    return Paradigm::seq2seq;
  if (s == "seq2point")
    return Paradigm::seq2point;
  if (s == "fast-seq2point")
    return Paradigm::fast_seq2point;
  throw ConfigError("unknown paradigm '" + s +
                    "' (expected seq2seq, seq2point or fast-seq2point)");
}

Precision parse_precision(const std::string &s) {
  if (s == "float32")
    return Precision::float32;
  if (s == "float64")
    return Precision::float64;
  throw ConfigError("unknown precision '" + s +
                    "' (expected float32 or float64)");
}

void TrainConfig::validate() const {
  if (batch_size < 1)
    throw ConfigError("train: batch_size must be >= 1");
  if (!(lr > 0))
    throw ConfigError("train: lr must be > 0");
  if (max_iterations < 1)
    throw ConfigError("train: max_iterations must be >= 1");
  if (eval_every < 1)
    throw ConfigError("train: eval_every must be >= 1");
  if (!(validation_fraction >= 0 && validation_fraction < 1))
    throw ConfigError("train: validation_fraction must be in [0, 1)");
  if (!(cutoff > 0 && cutoff < 1))
    throw ConfigError("train: cutoff must be in (0, 1)");
}

std::size_t training_window_count(std::size_t windows,
                                  double validation_fraction) {
  const auto val = std::size_t(std::floor(double(windows) * validation_fraction));
  return std::max<std::size_t>(windows - std::min(val, windows), 1);
}

namespace {

template <typename Real>
std::vector<Real> to_real(std::span<const double> v) {
  return std::vector<Real>(v.begin(), v.end());
}

template <typename Real>
LossResult<Real> window_loss(Head head, std::span<const Real> out,
                             std::span<const Real> target) {
  return head == Head::regression ? mae_loss<Real>(out, target)
                                  : bce_loss<Real>(out, target);
}

/// Evenly spaced picks from [first, last).
std::vector<std::size_t> spread(std::size_t first, std::size_t last,
                                std::size_t limit) {
  const std::size_t n = last - first;
  std::vector<std::size_t> out;
  if (limit == 0 || limit >= n) {
    out.resize(n);
    std::iota(out.begin(), out.end(), first);
    return out;
  }
  for (std::size_t k = 0; k < limit; ++k)
    out.push_back(first + k * n / limit);
  return out;
}

template <typename Real>
double validation_metric(const Model<Real> &model, const WindowedDataset &ds,
                         std::span<const std::size_t> windows,
                         const TrainConfig &cfg) {
  if (cfg.framework == Head::regression) {
    double sum = 0;
    std::size_t count = 0;
    for (std::size_t k : windows) {
      const auto out = model.forward(to_real<Real>(ds.input(k)));
      const auto target = ds.target(k);
      for (std::size_t j = 0; j < target.size(); ++j)
        sum += std::abs(double(out[j]) - target[j]);
      count += target.size();
    }
    return cfg.metric_scale * sum / double(count);
  }
  Confusion c;
  for (std::size_t k : windows) {
    const auto out = model.forward(to_real<Real>(ds.input(k)));
    const auto target = ds.target(k);
    for (std::size_t j = 0; j < target.size(); ++j) {
      const bool p = double(out[j]) > cfg.cutoff, y = target[j] != 0.0;
      c.tp += p && y;
      c.fp += p && !y;
      c.fn += !p && y;
      c.tn += !p && !y;
    }
  }
  return f1_from_counts(c).f1;
}

} // namespace

template <typename Real>
double batch_loss(const Model<Real> &model, const WindowedDataset &dataset,
                  std::span<const std::size_t> windows) {
  double sum = 0;
  const Head head = model.config().head;
  for (std::size_t k : windows) {
    const auto out = model.forward(to_real<Real>(dataset.input(k)));
    const auto target = to_real<Real>(dataset.target(k));
    sum += double(window_loss<Real>(head, out.values(), target).value);
  }
  return sum / double(windows.size());
}

template <typename Real>
TrainingRun train(Model<Real> &model, const WindowedDataset &dataset,
                  const TrainConfig &cfg, const TrainHooks<Real> &hooks) {
  using clock = std::chrono::steady_clock;
  cfg.validate();
  const auto &mc = model.config();
  if (dataset.empty())
    throw std::invalid_argument("train: the dataset has no windows");
  if (mc.head != cfg.framework)
    throw ConfigError("train: model head is " + to_string(mc.head) +
                      " but the framework is " + to_string(cfg.framework));
  if (dataset.input_length() != mc.window_length() ||
      dataset.target_length() != mc.target_field)
    throw ShapeError("train: dataset windows are " +
                     std::to_string(dataset.input_length()) + " -> " +
                     std::to_string(dataset.target_length()) +
                     " samples but the model expects " +
                     std::to_string(mc.window_length()) + " -> " +
                     std::to_string(mc.target_field));

  const std::size_t n = dataset.size();
  const std::size_t n_train = training_window_count(n, cfg.validation_fraction);
  const auto val_windows = spread(n_train, n, cfg.validation_windows);
  const bool minimise = cfg.framework == Head::regression;

  auto named = model.parameters();
  std::vector<Tensor<Real> *> params;
  for (auto &p : named)
    params.push_back(p.tensor);
  AdamState<Real> adam(AdamOptions{cfg.lr});

  std::vector<std::size_t> order(n_train);
  std::iota(order.begin(), order.end(), std::size_t(0));
  std::size_t epoch = 0, pos = n_train; // forces a shuffle on first use

  std::vector<std::vector<Real>> best;
  std::size_t stale = 0;
  TrainingRun run;
  double total_ms = 0;
  std::vector<std::size_t> batch(cfg.batch_size);

  for (std::size_t it = 1; it <= cfg.max_iterations; ++it) {
    const auto t0 = clock::now();
    for (auto &k : batch) {
      if (pos == n_train) {
        std::iota(order.begin(), order.end(), std::size_t(0));
        CounterRng rng(derive_seed(cfg.seed, epoch++));
        rng.shuffle(std::span<std::size_t>(order));
        pos = 0;
      }
      k = order[pos++];
    }

    model.zero_grad();
    double loss_sum = 0;
    const Real scale = Real(1) / Real(batch.size());
    for (std::size_t k : batch) {
      std::unique_ptr<Trace> trace;
      const auto out = model.forward(to_real<Real>(dataset.input(k)), trace);
      const auto target = to_real<Real>(dataset.target(k));
      auto res = window_loss<Real>(mc.head, out.values(), target);
      loss_sum += double(res.value);
      for (auto &g : res.grad)
        g *= scale;
      model.backward(*trace, res.grad);
    }
    const double loss = loss_sum / double(batch.size());
    if (!std::isfinite(loss)) {
      std::string where;
      if (!cfg.snapshot_path.empty() && hooks.snapshot) {
        hooks.snapshot(model, cfg.snapshot_path);
        where = cfg.snapshot_path;
      }
      throw DivergenceError("training loss became " + format_double(loss) +
                              " at iteration " + std::to_string(it) +
                              (where.empty() ? "" : "; snapshot at " + where),
                            where);
    }
    if (hooks.on_batch)
      hooks.on_batch(it, batch, loss, model);
    adam_step<Real>(params, adam);

    IterationRecord rec;
    rec.iteration = it;
    rec.loss = loss;
    const bool evaluate_now = it % cfg.eval_every == 0 || it == cfg.max_iterations;
    if (evaluate_now && !val_windows.empty()) {
      rec.metric = validation_metric(model, dataset, val_windows, cfg);
      const bool better = run.best_iteration == 0 ||
                          (minimise ? rec.metric < run.best_metric
                                    : rec.metric > run.best_metric);
      if (better) {
        run.best_metric = rec.metric;
        run.best_iteration = it;
        best.clear();
        for (auto *p : params)
          best.emplace_back(p->values().begin(), p->values().end());
        stale = 0;
      } else {
        ++stale;
      }
    }
    rec.ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    total_ms += rec.ms;
    run.log.push_back(rec);
    run.iterations = it;
    if (hooks.on_record)
      hooks.on_record(rec);
    if (!val_windows.empty() && stale >= cfg.patience && cfg.patience > 0) {
      run.early_stopped = true;
      break;
    }
  }
  if (!best.empty())
    for (std::size_t k = 0; k < params.size(); ++k)
      std::copy(best[k].begin(), best[k].end(), params[k]->values().begin());
  model.zero_grad();
  run.mean_ms_per_iteration = total_ms / double(run.iterations);
  return run;
}

std::string format_training_log(const TrainingRun &run) {
  std::string out = "# nilm-train-log 1\niteration,loss,metric,ms\n";
  for (const auto &r : run.log) {
    out += std::to_string(r.iteration) + ',' + format_double(r.loss) + ',';
    if (r.metric == r.metric)
      out += format_double(r.metric);
    out += ',' + format_double(r.ms) + '\n';
  }
  return out;
}

template TrainingRun train(Model<float> &, const WindowedDataset &,
                           const TrainConfig &, const TrainHooks<float> &);
template TrainingRun train(Model<double> &, const WindowedDataset &,
                           const TrainConfig &, const TrainHooks<double> &);
template double batch_loss(const Model<float> &, const WindowedDataset &,
                           std::span<const std::size_t>);
template double batch_loss(const Model<double> &, const WindowedDataset &,
                           std::span<const std::size_t>);

} // namespace nilm
