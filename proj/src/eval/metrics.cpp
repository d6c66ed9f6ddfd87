// SPDX-License-Identifier: Apache-2.0
#include <nilm/data/series.hpp>
#include <nilm/data/window.hpp>
#include <nilm/eval/metrics.hpp>

#include <cmath>

namespace nilm {

double mae(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size())
    throw std::invalid_argument("mae: length mismatch");
  if (truth.empty())
    throw MetricError("mae: no points left to evaluate");
  double sum = 0;
  for (std::size_t t = 0; t < truth.size(); ++t)
    sum += std::abs(pred[t] - truth[t]);
  return sum / double(truth.size());
}

double sae(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size())
    throw std::invalid_argument("sae: length mismatch");
  double sp = 0, st = 0;
  for (std::size_t t = 0; t < truth.size(); ++t) {
    sp += pred[t];
    st += truth[t];
  }
  if (st == 0.0)
    throw MetricError("sae: total true consumption is zero");
  return std::abs(sp - st) / st;
}

F1Score f1_from_counts(const Confusion &c) {
  F1Score s;
  s.counts = c;
  const double tp = double(c.tp);
  s.precision = c.tp + c.fp ? tp / double(c.tp + c.fp) : 0.0;
  s.recall = c.tp + c.fn ? tp / double(c.tp + c.fn) : 0.0;
  const double pr = s.precision + s.recall;
  s.f1 = pr > 0 ? 2 * s.precision * s.recall / pr : 0.0;
  return s;
}

F1Score f1_score(std::span<const std::uint8_t> pred,
                 std::span<const std::uint8_t> truth) {
  if (pred.size() != truth.size())
    throw std::invalid_argument("f1_score: length mismatch");
  Confusion c;
  for (std::size_t t = 0; t < truth.size(); ++t) {
    const bool p = pred[t] != 0, y = truth[t] != 0;
    if (p && y)
      ++c.tp;
    else if (p)
      ++c.fp;
    else if (y)
      ++c.fn;
    else
      ++c.tn;
  }
  return f1_from_counts(c);
}

MetricsReport evaluate(const EvaluationInput &in) {
  const std::size_t T = in.truth_watts.size();
  if (in.aggregate.size() != T ||
      (!in.predicted_watts.empty() && in.predicted_watts.size() != T) ||
      in.predicted_states.size() != T ||
      (in.predicted_valid && in.predicted_valid->size() != T))
    throw std::invalid_argument("evaluate: series lengths differ");
  const auto keep = evaluation_mask(in.aggregate, in.truth_watts);
  const auto truth_states = binarize(in.truth_watts, in.on_threshold);
  MetricsReport rep;
  std::vector<double> pw, tw;
  std::vector<std::uint8_t> ps, ts;
  for (std::size_t t = 0; t < T; ++t) {
    if (in.predicted_valid && !(*in.predicted_valid)[t]) {
      ++rep.unpredicted;
      continue;
    }
    if (!keep[t]) {
      ++rep.excluded;
      continue;
    }
    if (!in.predicted_watts.empty())
      pw.push_back(in.predicted_watts[t]);
    tw.push_back(in.truth_watts[t]);
    ps.push_back(in.predicted_states[t]);
    ts.push_back(truth_states[t]);
  }
  rep.evaluated = tw.size();
  if (!in.predicted_watts.empty()) {
    rep.mae = mae(pw, tw);
    rep.sae = sae(pw, tw);
  }
  const auto f = f1_score(ps, ts);
  rep.precision = f.precision;
  rep.recall = f.recall;
  rep.f1 = f.f1;
  rep.counts = f.counts;
  return rep;
}

namespace {

MetricsReport constant_baseline(std::span<const double> aggregate,
                                std::span<const double> truth, double value,
                                double on_threshold,
                                const std::vector<bool> *valid,
                                const std::string &name) {
  const std::vector<double> pred(truth.size(), value);
  const std::vector<std::uint8_t> states(truth.size(),
                                         value >= on_threshold ? 1 : 0);
  auto rep = evaluate({aggregate, truth, pred, states, valid, on_threshold});
  rep.model = name;
  return rep;
}

} // namespace

MetricsReport baseline_always_zero(std::span<const double> aggregate,
                                   std::span<const double> truth_watts,
                                   double on_threshold,
                                   const std::vector<bool> *valid) {
  return constant_baseline(aggregate, truth_watts, 0.0, on_threshold, valid,
                           "always-zero");
}

MetricsReport baseline_always_mean(std::span<const double> aggregate,
                                   std::span<const double> truth_watts,
                                   double training_mean, double on_threshold,
                                   const std::vector<bool> *valid) {
  return constant_baseline(aggregate, truth_watts, training_mean, on_threshold,
                           valid, "always-mean");
}

} // namespace nilm
