// SPDX-License-Identifier: Apache-2.0
#include <nilm/data/container.hpp>
#include <nilm/data/dataset.hpp>

#include <sstream>
#include <stdexcept>

namespace nilm {

namespace {

const Magic kDatasetMagic = {'N', 'I', 'L', 'M', 'D', 'A', 'T', 'A'};
constexpr std::uint32_t kDatasetVersion = 1;

std::size_t header_value(const std::map<std::string, std::string> &kv,
                         const std::string &key) {
  auto it = kv.find(key);
  if (it == kv.end())
    throw FormatError("dataset header lacks '" + key + "'");
  return std::stoull(it->second);
}

} // namespace

const std::vector<double> &Household::appliance(const std::string &name) const {
  auto it = appliances.find(name);
  if (it == appliances.end())
    throw std::out_of_range("household " + std::to_string(id) +
                            " has no channel '" + name + "'");
  return it->second;
}

Household preprocess(const CsvTable &table, int id) {
  Household h;
  h.id = id;
  for (const auto &raw : table.series) {
    auto s = fill_gaps(resample(raw));
    if (raw.channel == kAggregateChannel) {
      h.timestamps = s.timestamps;
      h.aggregate = std::move(s.watts);
    } else {
      h.appliances[raw.channel] = std::move(s.watts);
    }
  }
  return h;
}

Household load_household(const std::string &path, int id,
                         const CsvOptions &options) {
  CsvOptions o = options;
  o.household = id;
  return preprocess(ingest_csv(path, o), id);
}

ChannelStats compute_channel_stats(std::span<const Household> households,
                                   const std::string &appliance) {
  std::vector<std::span<const double>> agg, app;
  for (const auto &h : households) {
    agg.emplace_back(h.aggregate);
    app.emplace_back(h.appliance(appliance));
  }
  return {compute_norm_stats(agg, kAggregateChannel),
          compute_norm_stats(app, appliance)};
}

WindowedDataset materialize(std::span<const Household> households,
                            const std::string &appliance,
                            const ChannelStats &stats, const DatasetSpec &spec) {
  std::vector<WindowedDataset> parts;
  for (const auto &h : households) {
    const auto &raw_app = h.appliance(appliance);
    const auto inputs = stats.aggregate.normalize(h.aggregate);
    std::vector<double> targets;
    if (spec.targets == TargetKind::states) {
      const auto states = binarize(raw_app, spec.on_threshold);
      targets.assign(states.begin(), states.end());
    } else {
      targets = stats.appliance.normalize(raw_app);
    }
    WindowedDataset ds =
      spec.seq2seq
        ? slice_seq2seq_windows(inputs, targets, spec.receptive_field,
                                spec.target_field,
                                spec.seq2seq_stride ? spec.seq2seq_stride
                                                    : spec.target_field,
                                h.id)
        : slice_windows(inputs, targets, spec.receptive_field,
                        spec.target_field, h.id);
    if (spec.drop_invalid)
      ds = filter_invalid(ds, h.aggregate, raw_app);
    parts.push_back(std::move(ds));
  }
  if (parts.empty()) {
    const std::size_t L = spec.receptive_field, r = spec.target_field;
    return spec.seq2seq ? WindowedDataset(r + L - 1, r, 0)
                        : WindowedDataset(L + r - 1, r, L / 2);
  }
  return merge(parts);
}

std::string encode_dataset(const WindowedDataset &dataset,
                           const std::string &meta) {
  Container<double> c;
  c.version = kDatasetVersion;
  std::ostringstream h;
  h << "input_length=" << dataset.input_length() << '\n'
    << "target_length=" << dataset.target_length() << '\n'
    << "target_offset=" << dataset.target_offset() << '\n'
    << "sources=" << dataset.sources().size() << '\n';
  for (std::size_t s = 0; s < dataset.sources().size(); ++s)
    h << "source" << s << ".household=" << dataset.sources()[s].household
      << '\n';
  c.header = h.str() + meta;
  for (std::size_t s = 0; s < dataset.sources().size(); ++s) {
    const auto &src = dataset.sources()[s];
    c.blobs.push_back({"source" + std::to_string(s) + ".inputs",
                       {src.inputs.size()}, src.inputs});
    c.blobs.push_back({"source" + std::to_string(s) + ".targets",
                       {src.targets.size()}, src.targets});
  }
  Blob<double> windows{"windows", {dataset.size(), 2}, {}};
  windows.values.reserve(2 * dataset.size());
  for (const auto &w : dataset.windows()) {
    windows.values.push_back(double(w.source));
    windows.values.push_back(double(w.start));
  }
  c.blobs.push_back(std::move(windows));
  return encode_container(kDatasetMagic, c);
}

WindowedDataset decode_dataset(const std::string &bytes, std::string *meta) {
  const auto c = decode_container<double>(kDatasetMagic, bytes);
  if (c.version != kDatasetVersion)
    throw FormatError("unsupported dataset version " +
                      std::to_string(c.version));
  std::map<std::string, std::string> kv;
  std::istringstream in(c.header);
  std::string line, rest;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      continue;
    const auto key = line.substr(0, eq);
    const bool known = key == "input_length" || key == "target_length" ||
                       key == "target_offset" || key == "sources" ||
                       (key.rfind("source", 0) == 0 &&
                        key.find(".household") != std::string::npos);
    if (known)
      kv[key] = line.substr(eq + 1);
    else
      rest += line + '\n';
  }
  if (meta)
    *meta = rest;
  WindowedDataset ds(header_value(kv, "input_length"),
                     header_value(kv, "target_length"),
                     header_value(kv, "target_offset"));
  const std::size_t n = header_value(kv, "sources");
  if (c.blobs.size() != 2 * n + 1)
    throw FormatError("dataset blob count does not match its header");
  for (std::size_t s = 0; s < n; ++s) {
    WindowSource src;
    src.household =
      std::stoi(kv.at("source" + std::to_string(s) + ".household"));
    src.inputs = c.blobs[2 * s].values;
    src.targets = c.blobs[2 * s + 1].values;
    ds.add_source(std::move(src));
  }
  const auto &w = c.blobs.back();
  if (w.name != "windows" || w.values.size() % 2 != 0)
    throw FormatError("dataset lacks a window table");
  for (std::size_t k = 0; k < w.values.size(); k += 2)
    ds.add_window({std::uint32_t(w.values[k]), std::uint64_t(w.values[k + 1])});
  return ds;
}

void save_dataset(const std::string &path, const WindowedDataset &dataset,
                  const std::string &meta) {
  write_file(path, encode_dataset(dataset, meta));
}

WindowedDataset load_dataset(const std::string &path, std::string *meta) {
  try {
    return decode_dataset(read_file(path), meta);
  } catch (const FormatError &e) {
    throw FormatError(path + ": " + e.what());
  }
}

} // namespace nilm
