// SPDX-License-Identifier: Apache-2.0
#include <nilm/core/log.hpp>
#include <nilm/train/predict.hpp>

#include <algorithm>
#include <cmath>

namespace nilm {

std::size_t SeriesPrediction::predicted() const {
  return std::size_t(std::count(valid.begin(), valid.end(), true));
}

namespace {

template <typename Real>
std::vector<double> run_window(const Model<Real> &model,
                               std::span<const double> input) {
  const std::vector<Real> x(input.begin(), input.end());
  const auto out = model.forward(x);
  return std::vector<double>(out.values().begin(), out.values().end());
}

double to_output(Head head, const ChannelStats &stats, double y) {
  if (head == Head::classification)
    return y;
  return std::max(stats.appliance.denormalize(y), 0.0);
}

SeriesPrediction empty_prediction(Head head, std::size_t n) {
  SeriesPrediction p;
  p.head = head;
  p.values.assign(n, kMissing);
  p.valid.assign(n, false);
  return p;
}

} // namespace

template <typename Real>
SeriesPrediction predict_series(const Model<Real> &model,
                                std::span<const double> aggregate,
                                const ChannelStats &stats) {
  const auto &c = model.config();
  const std::size_t T = aggregate.size(), W = c.window_length(),
                    r = c.target_field, off = c.target_offset();
  auto p = empty_prediction(c.head, T);
  if (T < W) {
    warn("series of " + std::to_string(T) + " samples is shorter than the " +
         std::to_string(W) + "-sample window; nothing predicted");
    return p;
  }
  const auto x = stats.aggregate.normalize(aggregate);
  auto place = [&](std::size_t start) {
    const auto y = run_window(model, std::span(x).subspan(start, W));
    for (std::size_t j = 0; j < r; ++j) {
      const std::size_t t = start + off + j;
      if (!p.valid[t]) {
        p.values[t] = to_output(c.head, stats, y[j]);
        p.valid[t] = true;
      }
    }
  };
  std::size_t start = 0;
  for (; start + W <= T; start += r)
    place(start);
  if (start - r + W < T)
    place(T - W);
  return p;
}

SeriesPrediction predict_series(const TrainedModel &model,
                                std::span<const double> aggregate) {
  return predict_series(*model.model, aggregate, model.stats);
}

std::vector<std::uint8_t> prediction_states(const SeriesPrediction &p,
                                            double threshold, double cutoff) {
  std::vector<std::uint8_t> out(p.values.size(), 0);
  for (std::size_t t = 0; t < out.size(); ++t) {
    if (!p.valid[t])
      continue;
    out[t] = p.head == Head::regression ? p.values[t] >= threshold
                                        : p.values[t] > cutoff;
  }
  return out;
}

std::vector<std::uint8_t> detect_onoff_regression(const TrainedModel &model,
                                                  std::span<const double> aggregate,
                                                  double threshold) {
  if (model.config.head != Head::regression)
    throw ConfigError("detect: framework regression needs a regression model, "
                      "got a " + to_string(model.config.head) + " model");
  return prediction_states(predict_series(model, aggregate), threshold,
                           kDefaultCutoff);
}

std::vector<std::uint8_t> detect_onoff_classifier(const TrainedModel &model,
                                                  std::span<const double> aggregate,
                                                  double cutoff) {
  if (model.config.head != Head::classification)
    throw ConfigError("detect: framework classification needs a classification "
                      "model, got a " + to_string(model.config.head) + " model");
  return prediction_states(predict_series(model, aggregate), 0.0, cutoff);
}

std::vector<double> average_overlapping(std::span<const std::size_t> starts,
                                        std::span<const std::vector<double>> outputs,
                                        std::size_t length) {
  if (starts.size() != outputs.size())
    throw std::invalid_argument("average_overlapping: starts and outputs differ "
                                "in count");
  std::vector<double> sum(length, 0.0);
  std::vector<std::size_t> count(length, 0);
  for (std::size_t k = 0; k < starts.size(); ++k)
    for (std::size_t j = 0; j < outputs[k].size(); ++j) {
      const std::size_t t = starts[k] + j;
      if (t >= length)
        throw std::out_of_range("average_overlapping: window past the end");
      sum[t] += outputs[k][j];
      ++count[t];
    }
  for (std::size_t t = 0; t < length; ++t)
    sum[t] = count[t] ? sum[t] / double(count[t]) : kMissing;
  return sum;
}

template <typename Real>
SeriesPrediction predict_seq2seq(const Model<Real> &model,
                                 std::span<const double> aggregate,
                                 const ChannelStats &stats, std::size_t stride) {
  const auto &c = model.config();
  const std::size_t T = aggregate.size(), n = c.target_field,
                    half = c.target_offset();
  if (stride == 0)
    throw std::invalid_argument("predict_seq2seq: stride must be >= 1");
  auto p = empty_prediction(c.head, T);
  if (T < n) {
    warn("series of " + std::to_string(T) + " samples is shorter than the " +
         std::to_string(n) + "-sample sequence; nothing predicted");
    return p;
  }
  std::vector<double> x(T + 2 * half, 0.0);
  const auto z = stats.aggregate.normalize(aggregate);
  std::copy(z.begin(), z.end(), x.begin() + half);

  std::vector<std::size_t> starts;
  for (std::size_t s = 0; s + n <= T; s += stride)
    starts.push_back(s);
  if (starts.back() + n < T)
    starts.push_back(T - n);
  std::vector<std::vector<double>> outputs;
  for (std::size_t s : starts)
    outputs.push_back(run_window(model, std::span(x).subspan(s, c.window_length())));
  const auto mean = average_overlapping(starts, outputs, T);
  for (std::size_t t = 0; t < T; ++t) {
    p.values[t] = to_output(c.head, stats, mean[t]);
    p.valid[t] = true;
  }
  return p;
}

template SeriesPrediction predict_series(const Model<float> &, std::span<const double>,
                                         const ChannelStats &);
template SeriesPrediction predict_series(const Model<double> &, std::span<const double>,
                                         const ChannelStats &);
template SeriesPrediction predict_seq2seq(const Model<float> &, std::span<const double>,
                                          const ChannelStats &, std::size_t);
template SeriesPrediction predict_seq2seq(const Model<double> &, std::span<const double>,
                                          const ChannelStats &, std::size_t);

} // namespace nilm
