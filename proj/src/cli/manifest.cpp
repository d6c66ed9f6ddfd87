// SPDX-License-Identifier: Apache-2.0
#include <nilm/cli/manifest.hpp>
#include <nilm/core/error.hpp>
#include <nilm/data/container.hpp>

#include <openssl/evp.h>

#include <cstdio>
#include <memory>

namespace nilm {

std::string sha256_hex(const std::string &bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                              EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), md, &len) != 1)
    throw std::runtime_error("sha256 failed");
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof(buf), "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

std::string sha256_file(const std::string &path) {
  return sha256_hex(read_file(path));
}

std::string RunManifest::to_yaml() const {
  YAML::Emitter e;
  e << YAML::BeginMap;
  e << YAML::Key << "tool" << YAML::Value << "nilm";
  e << YAML::Key << "tool_version" << YAML::Value << tool_version;
  e << YAML::Key << "command" << YAML::Value << command;
  e << YAML::Key << "seed" << YAML::Value << seed;
  e << YAML::Key << "status" << YAML::Value << status;
  auto files = [&](const char *name, const std::vector<FileDigest> &list) {
    e << YAML::Key << name << YAML::Value << YAML::BeginSeq;
    for (const auto &f : list) {
      e << YAML::BeginMap << YAML::Key << "path" << YAML::Value << f.path;
      e << YAML::Key << "sha256" << YAML::Value << f.sha256;
      if (f.timing)
        e << YAML::Key << "timing" << YAML::Value << true;
      e << YAML::EndMap;
    }
    e << YAML::EndSeq;
  };
  files("inputs", inputs);
  files("outputs", outputs);
  e << YAML::EndMap;
  // The configuration goes last as a block of its own.
  std::string out = std::string(e.c_str()) + "\nconfig:\n";
  std::string snap = config.snapshot();
  std::size_t start = 0;
  while (start < snap.size()) {
    auto nl = snap.find('\n', start);
    if (nl == std::string::npos)
      nl = snap.size();
    if (nl > start && snap.compare(start, nl - start, "{}") != 0)
      out += "  " + snap.substr(start, nl - start) + "\n";
    start = nl + 1;
  }
  return out;
}

RunManifest RunManifest::parse(const std::string &text) {
  RunManifest m;
  try {
    const YAML::Node n = YAML::Load(text);
    if (!n.IsMap() || !n["command"] || n["tool"].as<std::string>("") != "nilm")
      throw ConfigError("not a nilm run manifest");
    m.command = n["command"].as<std::string>();
    m.tool_version = n["tool_version"].as<std::string>("");
    m.seed = n["seed"].as<std::uint64_t>(0);
    m.status = n["status"].as<std::string>("");
    auto files = [](const YAML::Node &list, std::vector<FileDigest> &out) {
      if (!list)
        return;
      for (const auto &f : list)
        out.push_back({f["path"].as<std::string>(), f["sha256"].as<std::string>(""),
                       f["timing"].as<bool>(false)});
    };
    files(n["inputs"], m.inputs);
    files(n["outputs"], m.outputs);
    if (n["config"] && n["config"].IsMap()) {
      YAML::Emitter e;
      e << n["config"];
      m.config = Settings::parse(e.c_str(), "manifest config");
    }
  } catch (const YAML::Exception &e) {
    throw ConfigError(std::string("manifest: ") + e.what());
  }
  return m;
}

RunManifest RunManifest::load(const std::string &path) {
  return parse(read_file(path));
}

void RunManifest::save(const std::string &path) const {
  write_file(path, to_yaml());
}

} // namespace nilm
