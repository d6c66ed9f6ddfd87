// SPDX-License-Identifier: Apache-2.0
#include <nilm/cli/settings.hpp>
#include <nilm/core/error.hpp>
#include <nilm/data/container.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace nilm {

namespace {

std::vector<std::string> split_key(const std::string &key) {
  std::vector<std::string> parts;
  std::stringstream in(key);
  std::string p;
  while (std::getline(in, p, '.')) {
    if (p.empty())
      throw ConfigError("malformed setting name '" + key + "'");
    parts.push_back(p);
  }
  if (parts.empty())
    throw ConfigError("empty setting name");
  return parts;
}

void collect(const YAML::Node &n, const std::string &prefix,
             std::vector<std::string> &out) {
  if (n.IsMap()) {
    for (const auto &kv : n)
      collect(kv.second, prefix.empty() ? kv.first.as<std::string>()
                                        : prefix + "." + kv.first.as<std::string>(),
              out);
  } else {
    out.push_back(prefix);
  }
}

void emit_sorted(YAML::Emitter &e, const YAML::Node &n) {
  if (n.IsMap()) {
    std::map<std::string, YAML::Node> sorted;
    for (const auto &kv : n)
      sorted.emplace(kv.first.as<std::string>(), kv.second);
    e << YAML::BeginMap;
    for (const auto &[k, v] : sorted) {
      e << YAML::Key << k << YAML::Value;
      emit_sorted(e, v);
    }
    e << YAML::EndMap;
  } else if (n.IsSequence()) {
    e << YAML::Flow << YAML::BeginSeq;
    for (const auto &v : n)
      emit_sorted(e, v);
    e << YAML::EndSeq;
  } else if (n.IsScalar()) {
    e << n.Scalar();
  } else {
    e << YAML::Null;
  }
}

template <typename T> T convert(const YAML::Node &n, const std::string &key,
                                const char *what) {
  try {
    return n.as<T>();
  } catch (const YAML::Exception &) {
    throw ConfigError("setting '" + key + "' must be " + what);
  }
}

} // namespace

Settings::Settings() : root_(YAML::NodeType::Map) {}

Settings::Settings(const Settings &other) : root_(YAML::Clone(other.root_)) {}

Settings &Settings::operator=(const Settings &other) {
  if (this != &other)
    root_ = YAML::Clone(other.root_);
  return *this;
}

YAML::Node Settings::node(const std::string &key) const { return find(key); }

void Settings::merge(const Settings &other) {
  for (const auto &k : other.keys())
    set_node(k, other.find(k));
}

Settings Settings::parse(const std::string &text, const std::string &origin) {
  Settings s;
  try {
    YAML::Node n = YAML::Load(text);
    if (n.IsNull())
      return s;
    if (!n.IsMap())
      throw ConfigError(origin + ": configuration must be a map");
    s.root_ = n;
  } catch (const YAML::Exception &e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return s;
}

Settings Settings::load(const std::string &path) {
  return parse(read_file(path), path);
}

void Settings::set_node(const std::string &key, const YAML::Node &value) {
  const auto parts = split_key(key);
  YAML::Node cur = root_;
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    YAML::Node next = cur[parts[i]];
    if (!next.IsDefined() || next.IsNull() || !next.IsMap()) {
      if (next.IsDefined() && !next.IsNull() && !next.IsMap())
        throw ConfigError("setting '" + key + "': '" + parts[i] +
                          "' is a value, not a section");
      cur[parts[i]] = YAML::Node(YAML::NodeType::Map);
      next = cur[parts[i]];
    }
    cur.reset(next);
  }
  cur[parts.back()] = value;
}

void Settings::set(const std::string &key, const std::string &value) {
  YAML::Node v;
  try {
    v = YAML::Load(value);
  } catch (const YAML::Exception &) {
    v = YAML::Node(value);
  }
  if (!(v.IsScalar() || v.IsSequence()))
    v = YAML::Node(value);
  set_node(key, v);
}

void Settings::set_default(const std::string &key, const std::string &value) {
  if (!has(key))
    set(key, value);
}

YAML::Node Settings::find(const std::string &key) const {
  const auto parts = split_key(key);
  YAML::Node cur = YAML::Clone(root_);
  for (const auto &p : parts) {
    if (!cur.IsMap())
      return YAML::Node();
    const YAML::Node next = cur[p];
    if (!next.IsDefined())
      return YAML::Node();
    cur.reset(next);
  }
  return cur;
}

bool Settings::has(const std::string &key) const {
  const auto n = find(key);
  return n.IsDefined() && !n.IsNull();
}

void Settings::erase(const std::string &key) {
  const auto parts = split_key(key);
  YAML::Node cur = root_;
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    YAML::Node next = cur[parts[i]];
    if (!next.IsDefined() || !next.IsMap())
      return;
    cur.reset(next);
  }
  cur.remove(parts.back());
}

std::string Settings::str(const std::string &key) const {
  const auto n = find(key);
  if (!n.IsDefined() || n.IsNull())
    throw ConfigError("missing setting '" + key + "'");
  return convert<std::string>(n, key, "a string");
}

double Settings::number(const std::string &key) const {
  const auto n = find(key);
  if (!n.IsDefined() || n.IsNull())
    throw ConfigError("missing setting '" + key + "'");
  return convert<double>(n, key, "a number");
}

std::size_t Settings::count(const std::string &key) const {
  const auto v = number(key);
  if (!(v >= 0) || v != std::floor(v))
    throw ConfigError("setting '" + key + "' must be a non-negative integer");
  return std::size_t(v);
}

std::uint64_t Settings::u64(const std::string &key) const {
  const auto n = find(key);
  if (!n.IsDefined() || n.IsNull())
    throw ConfigError("missing setting '" + key + "'");
  return convert<std::uint64_t>(n, key, "an unsigned integer");
}

bool Settings::flag(const std::string &key) const {
  const auto n = find(key);
  if (!n.IsDefined() || n.IsNull())
    throw ConfigError("missing setting '" + key + "'");
  return convert<bool>(n, key, "true or false");
}

std::vector<std::string> Settings::strings(const std::string &key) const {
  const auto n = find(key);
  if (!n.IsDefined() || n.IsNull())
    return {};
  if (n.IsScalar())
    return {n.Scalar()};
  return convert<std::vector<std::string>>(n, key, "a list of strings");
}

std::vector<std::size_t> Settings::counts(const std::string &key) const {
  const auto n = find(key);
  if (!n.IsDefined() || n.IsNull())
    return {};
  if (n.IsScalar())
    return {count(key)};
  return convert<std::vector<std::size_t>>(n, key, "a list of integers");
}

std::vector<std::string> Settings::keys() const {
  std::vector<std::string> out;
  collect(root_, "", out);
  std::sort(out.begin(), out.end());
  return out;
}

void Settings::require_known(const std::set<std::string> &known) const {
  for (const auto &k : keys())
    if (!known.count(k))
      throw ConfigError("unknown setting '" + k + "'");
}

std::string Settings::snapshot() const {
  YAML::Emitter e;
  emit_sorted(e, root_);
  return std::string(e.c_str()) + "\n";
}

std::vector<std::pair<std::string, std::string>>
parse_overrides(const std::vector<std::string> &args) {
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const auto &a = args[i];
    if (a.rfind("--", 0) != 0 || a.size() < 3)
      throw ConfigError("unexpected argument '" + a + "'");
    const auto eq = a.find('=');
    if (eq != std::string::npos) {
      out.emplace_back(a.substr(2, eq - 2), a.substr(eq + 1));
    } else {
      if (i + 1 >= args.size())
        throw ConfigError("option '" + a + "' needs a value");
      out.emplace_back(a.substr(2), args[++i]);
    }
    if (out.back().first.find('.') == std::string::npos)
      throw ConfigError("unknown option '--" + out.back().first + "'");
  }
  return out;
}

} // namespace nilm
