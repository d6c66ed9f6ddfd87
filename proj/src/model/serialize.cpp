// SPDX-License-Identifier: Apache-2.0
#include <nilm/data/container.hpp>
#include <nilm/model/serialize.hpp>

#include <map>
#include <sstream>

namespace nilm {

namespace {

const Magic kModelMagic = {'N', 'I', 'L', 'M', 'M', 'O', 'D', 'L'};
constexpr std::uint32_t kModelVersion = 1;
const std::string kConfigPrefix = "config.";

double header_double(const std::map<std::string, std::string> &kv,
                     const std::string &key) {
  auto it = kv.find(key);
  double v = 0.0;
  if (it == kv.end() || !parse_double(it->second, v))
    throw FormatError("model header lacks a numeric '" + key + "'");
  return v;
}

const std::string &header_string(const std::map<std::string, std::string> &kv,
                                 const std::string &key) {
  auto it = kv.find(key);
  if (it == kv.end())
    throw FormatError("model header lacks '" + key + "'");
  return it->second;
}

} // namespace

std::string encode_model(const TrainedModel &trained) {
  if (!trained.model)
    throw std::invalid_argument("encode_model: no model");
  Container<float> c;
  c.version = kModelVersion;
  std::ostringstream h;
  std::istringstream cfg(trained.config.to_text());
  for (std::string line; std::getline(cfg, line);)
    if (!line.empty())
      h << kConfigPrefix << line << '\n';
  const auto &st = trained.stats;
  h << "appliance=" << trained.appliance << '\n'
    << "on_threshold=" << format_double(trained.on_threshold) << '\n'
    << "stats.aggregate.channel=" << st.aggregate.channel << '\n'
    << "stats.aggregate.mean=" << format_double(st.aggregate.mean) << '\n'
    << "stats.aggregate.std=" << format_double(st.aggregate.std) << '\n'
    << "stats.appliance.channel=" << st.appliance.channel << '\n'
    << "stats.appliance.mean=" << format_double(st.appliance.mean) << '\n'
    << "stats.appliance.std=" << format_double(st.appliance.std) << '\n';
  c.header = h.str();
  for (const auto &p : std::as_const(*trained.model).parameters()) {
    Blob<float> b;
    b.name = p.name;
    b.extents.assign(p.tensor->shape().begin(), p.tensor->shape().end());
    const auto v = p.tensor->values();
    b.values.assign(v.begin(), v.end());
    c.blobs.push_back(std::move(b));
  }
  return encode_container(kModelMagic, c);
}

TrainedModel decode_model(const std::string &bytes) {
  const auto c = decode_container<float>(kModelMagic, bytes);
  if (c.version != kModelVersion)
    throw FormatError("unsupported model file version " +
                      std::to_string(c.version));
  std::map<std::string, std::string> kv;
  std::string config_text;
  std::istringstream in(c.header);
  for (std::string line; std::getline(in, line);) {
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      continue;
    if (line.rfind(kConfigPrefix, 0) == 0)
      config_text += line.substr(kConfigPrefix.size()) + '\n';
    else
      kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  TrainedModel t;
  t.config = ModelConfig::from_text(config_text);
  t.appliance = header_string(kv, "appliance");
  t.on_threshold = header_double(kv, "on_threshold");
  t.stats.aggregate = {header_string(kv, "stats.aggregate.channel"),
                       header_double(kv, "stats.aggregate.mean"),
                       header_double(kv, "stats.aggregate.std")};
  t.stats.appliance = {header_string(kv, "stats.appliance.channel"),
                       header_double(kv, "stats.appliance.mean"),
                       header_double(kv, "stats.appliance.std")};
  t.model = build_model<float>(t.config);
  auto params = t.model->parameters();
  if (params.size() != c.blobs.size())
    throw FormatError("model file has " + std::to_string(c.blobs.size()) +
                      " parameter blobs, the configuration needs " +
                      std::to_string(params.size()));
  for (std::size_t k = 0; k < params.size(); ++k) {
    const auto &b = c.blobs[k];
    const Shape shape(b.extents.begin(), b.extents.end());
    if (b.name != params[k].name || shape != params[k].tensor->shape())
      throw FormatError("model file parameter '" + b.name + "' " +
                        to_string(shape) + " does not match '" +
                        params[k].name + "' " +
                        to_string(params[k].tensor->shape()));
    std::copy(b.values.begin(), b.values.end(),
              params[k].tensor->values().begin());
  }
  return t;
}

void save_model(const std::string &path, const TrainedModel &trained) {
  write_file(path, encode_model(trained));
}

TrainedModel load_model(const std::string &path) {
  try {
    return decode_model(read_file(path));
  } catch (const FormatError &e) {
    throw FormatError(path + ": " + e.what());
  }
}

} // namespace nilm
