// SPDX-License-Identifier: Apache-2.0
#include <nilm/model/config.hpp>

#include <charconv>
#include <map>
#include <sstream>

namespace nilm {

namespace {

std::size_t parse_size(const std::string &key, const std::string &v) {
  std::size_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError("model config: '" + key + "' expects a non-negative "
                      "integer, got '" + v + "'");
  return out;
}

std::string cnn_filters_text(const std::vector<CnnLayerSpec> &layers) {
  std::string s;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (i)
      s += ',';
    s += std::to_string(layers[i].filters) + 'x' +
         std::to_string(layers[i].length);
  }
  return s;
}

std::vector<CnnLayerSpec> parse_cnn_filters(const std::string &v) {
  std::vector<CnnLayerSpec> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto x = item.find('x');
    if (x == std::string::npos)
      throw ConfigError("model config: cnn_filters entry '" + item +
                        "' is not of the form <filters>x<length>");
    out.push_back({parse_size("cnn_filters", item.substr(0, x)),
                   parse_size("cnn_filters", item.substr(x + 1))});
  }
  return out;
}

} // namespace

std::string to_string(Family f) {
  switch (f) {
  case Family::cnn:
    return "cnn";
  case Family::rnn:
    return "rnn";
  case Family::wavenet:
    return "wavenet";
  }
  return "?";
}

std::string to_string(Head h) {
  return h == Head::regression ? "regression" : "classification";
}

Family parse_family(const std::string &s) {
  if (s == "cnn")
    return Family::cnn;
  if (s == "rnn")
    return Family::rnn;
  if (s == "wavenet")
    return Family::wavenet;
  throw ConfigError("unknown model family '" + s +
                    "' (expected cnn, rnn or wavenet)");
}

Head parse_head(const std::string &s) {
  if (s == "regression")
    return Head::regression;
  if (s == "classification")
    return Head::classification;
  throw ConfigError("unknown head '" + s +
                    "' (expected regression or classification)");
}

std::size_t wavenet_receptive_field(std::size_t layers,
                                    std::size_t filter_length) {
  if (layers < 1 || layers > 30)
    throw ConfigError("wavenet: layer count must be in [1, 30]");
  return ((std::size_t(1) << layers) - 1) * (filter_length - 1) + 1;
}

std::size_t wavenet_layers_for(std::size_t receptive_field,
                               std::size_t filter_length) {
  for (std::size_t s = 1; s <= 30; ++s)
    if (wavenet_receptive_field(s, filter_length) == receptive_field)
      return s;
  throw ConfigError("wavenet: receptive field " +
                    std::to_string(receptive_field) +
                    " is not (2^s - 1) * (m - 1) + 1 for any layer count s "
                    "with m = " + std::to_string(filter_length));
}

std::vector<CnnLayerSpec> default_cnn_filters(std::size_t receptive_field) {
  if (receptive_field >= 31)
    return {{30, 10}, {30, 8}, {40, 6}, {50, 5}, {50, 5}};
  return {{30, 5}, {30, 4}, {40, 3}, {50, 3}, {50, 3}};
}

std::vector<CnnLayerSpec> ModelConfig::resolved_cnn_filters() const {
  return cnn_filters.empty() ? default_cnn_filters(receptive_field)
                             : cnn_filters;
}

void ModelConfig::validate() const {
  if (target_field < 1)
    throw ConfigError("model config: target field r must be >= 1");
  if (receptive_field < 1 || receptive_field % 2 == 0)
    throw ConfigError("model config: receptive field L must be odd, got " +
                      std::to_string(receptive_field));
  switch (family) {
  case Family::wavenet: {
    if (filter_length != 3)
      throw ConfigError("wavenet: filter length m is fixed at 3");
    const std::size_t expect = wavenet_receptive_field(layers, filter_length);
    if (expect != receptive_field)
      throw ConfigError(
        "wavenet: s = " + std::to_string(layers) + " dilated layers with m = " +
        std::to_string(filter_length) + " give L = (2^s - 1) * (m - 1) + 1 = " +
        std::to_string(expect) + ", but L = " +
        std::to_string(receptive_field) + " was requested");
    if (residual_channels < 1 || skip_channels < 1)
      throw ConfigError("wavenet: channel widths must be >= 1");
    break;
  }
  case Family::cnn: {
    const auto spec = resolved_cnn_filters();
    if (spec.empty())
      throw ConfigError("cnn: at least one convolutional layer is required");
    std::size_t shrink = 0;
    for (const auto &l : spec) {
      if (l.filters < 1 || l.length < 1)
        throw ConfigError("cnn: filter counts and lengths must be >= 1");
      shrink += l.length - 1;
    }
    if (shrink >= receptive_field)
      throw ConfigError("cnn: convolution stack spans " +
                        std::to_string(shrink + 1) +
                        " samples, more than L = " +
                        std::to_string(receptive_field));
    if (cnn_dense_units < 1)
      throw ConfigError("cnn: dense layer needs >= 1 unit");
    break;
  }
  case Family::rnn:
    if (hidden_size < 1 || rnn_layers < 1)
      throw ConfigError("rnn: hidden size and layer count must be >= 1");
    break;
  }
}

std::string ModelConfig::to_text() const {
  std::map<std::string, std::string> kv;
  kv["family"] = to_string(family);
  kv["layers"] = std::to_string(layers);
  kv["receptive_field"] = std::to_string(receptive_field);
  kv["target_field"] = std::to_string(target_field);
  kv["filter_length"] = std::to_string(filter_length);
  kv["residual_channels"] = std::to_string(residual_channels);
  kv["skip_channels"] = std::to_string(skip_channels);
  kv["hidden_size"] = std::to_string(hidden_size);
  kv["rnn_layers"] = std::to_string(rnn_layers);
  kv["cnn_filters"] = cnn_filters_text(cnn_filters);
  kv["cnn_dense_units"] = std::to_string(cnn_dense_units);
  kv["head"] = to_string(head);
  kv["seed"] = std::to_string(seed);
  std::string out;
  for (const auto &[k, v] : kv)
    out += k + '=' + v + '\n';
  return out;
}

ModelConfig ModelConfig::from_text(const std::string &text) {
  ModelConfig c;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("model config: malformed line '" + line + "'");
    const std::string k = line.substr(0, eq), v = line.substr(eq + 1);
    if (k == "family")
      c.family = parse_family(v);
    else if (k == "layers")
      c.layers = parse_size(k, v);
    else if (k == "receptive_field")
      c.receptive_field = parse_size(k, v);
    else if (k == "target_field")
      c.target_field = parse_size(k, v);
    else if (k == "filter_length")
      c.filter_length = parse_size(k, v);
    else if (k == "residual_channels")
      c.residual_channels = parse_size(k, v);
    else if (k == "skip_channels")
      c.skip_channels = parse_size(k, v);
    else if (k == "hidden_size")
      c.hidden_size = parse_size(k, v);
    else if (k == "rnn_layers")
      c.rnn_layers = parse_size(k, v);
    else if (k == "cnn_filters")
      c.cnn_filters = v.empty() ? std::vector<CnnLayerSpec>{}
                                : parse_cnn_filters(v);
    else if (k == "cnn_dense_units")
      c.cnn_dense_units = parse_size(k, v);
    else if (k == "head")
      c.head = parse_head(v);
    else if (k == "seed")
      c.seed = parse_size(k, v);
    else
      throw ConfigError("model config: unknown key '" + k + "'");
  }
  return c;
}

ModelConfig wavenet_config(std::size_t layers, std::size_t target_field,
                           Head head) {
  ModelConfig c;
  c.family = Family::wavenet;
  c.layers = layers;
  c.receptive_field = wavenet_receptive_field(layers, 3);
  c.target_field = target_field;
  c.head = head;
  return c;
}

} // namespace nilm
