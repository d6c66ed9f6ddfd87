// SPDX-License-Identifier: Apache-2.0
#include <nilm/core/log.hpp>
#include <nilm/data/window.hpp>

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace nilm {

std::span<const double> WindowedDataset::input(std::size_t k) const {
  const auto &w = windows_.at(k);
  return std::span<const double>(sources_[w.source].inputs)
    .subspan(w.start, input_length_);
}

std::span<const double> WindowedDataset::target(std::size_t k) const {
  const auto &w = windows_.at(k);
  return std::span<const double>(sources_[w.source].targets)
    .subspan(w.start + target_offset_, target_length_);
}

WindowProvenance WindowedDataset::provenance(std::size_t k) const {
  const auto &w = windows_.at(k);
  return {sources_[w.source].household, std::size_t(w.start)};
}

std::uint32_t WindowedDataset::add_source(WindowSource source) {
  sources_.push_back(std::move(source));
  return std::uint32_t(sources_.size() - 1);
}

void WindowedDataset::add_window(WindowRef ref) {
  if (ref.source >= sources_.size())
    throw std::out_of_range("window refers to unknown source");
  const auto &s = sources_[ref.source];
  if (ref.start + input_length_ > s.inputs.size() ||
      ref.start + target_offset_ + target_length_ > s.targets.size())
    throw std::out_of_range("window at " + std::to_string(ref.start) +
                            " exceeds its source");
  windows_.push_back(ref);
}

WindowedDataset WindowedDataset::slice(std::size_t begin,
                                       std::size_t end) const {
  if (begin > end || end > windows_.size())
    throw std::out_of_range("dataset slice out of range");
  WindowedDataset out = *this;
  out.windows_.assign(windows_.begin() + std::ptrdiff_t(begin),
                      windows_.begin() + std::ptrdiff_t(end));
  return out;
}

std::size_t window_count(std::size_t T, std::size_t L, std::size_t r) {
  if (r == 0)
    throw std::invalid_argument("window_count: r must be >= 1");
  const std::size_t n = L + r - 1;
  return T < n ? 0 : (T - n) / r + 1;
}

WindowedDataset slice_windows(std::span<const double> aggregate,
                              std::span<const double> target, std::size_t L,
                              std::size_t r, int household) {
  if (aggregate.size() != target.size())
    throw std::invalid_argument("slice_windows: aggregate and target series "
                                "have different lengths");
  if (L == 0 || r == 0)
    throw std::invalid_argument("slice_windows: L and r must be >= 1");
  WindowedDataset ds(L + r - 1, r, L / 2);
  const std::size_t count = window_count(aggregate.size(), L, r);
  if (count == 0) {
    warn("household " + std::to_string(household) + " has " +
         std::to_string(aggregate.size()) + " samples, fewer than L + r - 1 = " +
         std::to_string(L + r - 1) + "; no windows");
    return ds;
  }
  const auto src = ds.add_source(
    {household, {aggregate.begin(), aggregate.end()}, {target.begin(), target.end()}});
  for (std::size_t k = 0; k < count; ++k)
    ds.add_window({src, k * r});
  return ds;
}

WindowedDataset slice_seq2seq_windows(std::span<const double> aggregate,
                                      std::span<const double> target,
                                      std::size_t L, std::size_t length,
                                      std::size_t stride, int household) {
  if (aggregate.size() != target.size())
    throw std::invalid_argument("slice_seq2seq_windows: length mismatch");
  if (L == 0 || length == 0 || stride == 0)
    throw std::invalid_argument("slice_seq2seq_windows: L, length and stride "
                                "must be >= 1");
  const std::size_t half = L / 2;
  WindowedDataset ds(length + L - 1, length, 0);
  if (aggregate.size() < length)
    return ds;
  WindowSource s;
  s.household = household;
  s.inputs.assign(aggregate.size() + 2 * half, 0.0);
  std::copy(aggregate.begin(), aggregate.end(), s.inputs.begin() + half);
  s.targets.assign(target.begin(), target.end());
  const auto src = ds.add_source(std::move(s));
  for (std::size_t start = 0; start + length <= aggregate.size();
       start += stride)
    ds.add_window({src, start});
  return ds;
}

WindowedDataset filter_invalid(const WindowedDataset &dataset,
                               std::span<const std::vector<double>> raw_aggregate,
                               std::span<const std::vector<double>> raw_appliance) {
  const auto &sources = dataset.sources();
  if (raw_aggregate.size() != sources.size() ||
      raw_appliance.size() != sources.size())
    throw std::invalid_argument("filter_invalid: need raw series for every "
                                "source");
  const std::size_t off = dataset.target_offset(), r = dataset.target_length();
  return dataset.filtered([&](std::size_t k) {
    const auto &w = dataset.windows()[k];
    const auto &agg = raw_aggregate[w.source];
    const auto &app = raw_appliance[w.source];
    for (std::size_t j = 0; j < r; ++j) {
      const std::size_t t = w.start + off + j;
      if (app.at(t) > agg.at(t))
        return false;
    }
    return true;
  });
}

WindowedDataset filter_invalid(const WindowedDataset &dataset,
                               std::span<const double> raw_aggregate,
                               std::span<const double> raw_appliance) {
  const std::vector<double> agg[] = {{raw_aggregate.begin(), raw_aggregate.end()}};
  const std::vector<double> app[] = {{raw_appliance.begin(), raw_appliance.end()}};
  if (dataset.sources().empty())
    return dataset;
  return filter_invalid(dataset, agg, app);
}

std::vector<bool> evaluation_mask(std::span<const double> raw_aggregate,
                                  std::span<const double> raw_appliance) {
  if (raw_aggregate.size() != raw_appliance.size())
    throw std::invalid_argument("evaluation_mask: length mismatch");
  std::vector<bool> keep(raw_aggregate.size());
  for (std::size_t t = 0; t < keep.size(); ++t)
    keep[t] = !(raw_aggregate[t] < raw_appliance[t] || raw_aggregate[t] == 0.0);
  return keep;
}

WindowedDataset merge(std::span<const WindowedDataset> parts) {
  if (parts.empty())
    return {};
  WindowedDataset out(parts[0].input_length(), parts[0].target_length(),
                      parts[0].target_offset());
  std::vector<std::size_t> order(parts.size());
  std::iota(order.begin(), order.end(), 0);
  auto household_of = [&](std::size_t p) {
    return parts[p].sources().empty() ? 0 : parts[p].sources()[0].household;
  };
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
    return household_of(a) < household_of(b);
  });
  for (std::size_t p : order) {
    const auto &part = parts[p];
    if (part.input_length() != out.input_length() ||
        part.target_length() != out.target_length() ||
        part.target_offset() != out.target_offset())
      throw std::invalid_argument("merge: datasets have different window "
                                  "geometry");
    std::vector<std::uint32_t> remap;
    for (const auto &s : part.sources())
      remap.push_back(out.add_source(s));
    for (const auto &w : part.windows())
      out.add_window({remap[w.source], w.start});
  }
  return out;
}

} // namespace nilm
