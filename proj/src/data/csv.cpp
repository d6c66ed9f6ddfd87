// SPDX-License-Identifier: Apache-2.0
#include <nilm/data/container.hpp>
#include <nilm/data/csv.hpp>

#include <charconv>
#include <cmath>
#include <sstream>

namespace nilm {

namespace {

std::vector<std::string> split_fields(const std::string &line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos)
      break;
    start = comma + 1;
  }
  return out;
}

bool parse_int(const std::string &s, std::int64_t &out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && !s.empty();
}

} // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc())
    throw std::runtime_error("format_double failed");
  return std::string(buf, ptr);
}

bool parse_double(const std::string &text, double &out) {
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size() && !text.empty();
}

const ReadingSeries &CsvTable::channel(const std::string &name) const {
  for (const auto &s : series)
    if (s.channel == name)
      return s;
  throw CsvError("no column named '" + name + "'");
}

bool CsvTable::has_channel(const std::string &name) const {
  for (const auto &s : series)
    if (s.channel == name)
      return true;
  return false;
}

CsvTable parse_csv(const std::string &text, const CsvOptions &options,
                   const std::string &origin) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line))
    throw CsvError(origin + ": empty file, expected a header line");
  if (!line.empty() && line.back() == '\r')
    line.pop_back();
  auto header = split_fields(line);
  if (header.size() < 2 || header[0] != "timestamp")
    throw CsvError(origin + ": header must start with 'timestamp,aggregate'");
  for (auto &h : header) {
    auto it = options.column_map.find(h);
    if (it != options.column_map.end())
      h = it->second;
  }
  if (header[1] != kAggregateChannel)
    throw CsvError(origin + ": second column must be 'aggregate', got '" +
                   header[1] + "'");
  for (std::size_t c = 2; c < header.size(); ++c) {
    if (!options.known_appliances.empty() &&
        !options.known_appliances.count(header[c]))
      throw CsvError(origin + ": unknown column '" + header[c] + "'");
    for (std::size_t d = 1; d < c; ++d)
      if (header[d] == header[c])
        throw CsvError(origin + ": duplicate column '" + header[c] + "'");
  }

  CsvTable table;
  const std::size_t ncol = header.size() - 1;
  table.series.resize(ncol);
  for (std::size_t c = 0; c < ncol; ++c) {
    table.series[c].channel = header[c + 1];
    table.series[c].household = options.household;
  }
  std::size_t lineno = 1;
  bool have_last = false;
  std::int64_t last = 0;
  std::vector<double> row(ncol);
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty())
      continue;
    const auto fields = split_fields(line);
    std::int64_t ts = 0;
    bool ok = fields.size() == header.size() && parse_int(fields[0], ts);
    for (std::size_t c = 0; ok && c < ncol; ++c)
      ok = parse_double(fields[c + 1], row[c]) && std::isfinite(row[c]) &&
           row[c] >= 0.0;
    if (!ok) {
      ++table.malformed_rows;
      table.malformed_lines.push_back(lineno);
      continue;
    }
    if (have_last && ts <= last)
      throw CsvError(origin + ": line " + std::to_string(lineno) +
                     ": timestamp " + std::to_string(ts) +
                     " does not increase (previous " + std::to_string(last) +
                     ")");
    have_last = true;
    last = ts;
    for (std::size_t c = 0; c < ncol; ++c) {
      table.series[c].timestamps.push_back(ts);
      table.series[c].watts.push_back(row[c]);
    }
    ++table.rows;
  }
  return table;
}

CsvTable ingest_csv(const std::string &path, const CsvOptions &options) {
  return parse_csv(read_file(path), options, path);
}

std::string format_csv(std::span<const std::int64_t> timestamps,
                       std::span<const CsvColumn> columns) {
  std::string out = "timestamp";
  for (const auto &c : columns) {
    if (c.values.size() != timestamps.size())
      throw std::invalid_argument("format_csv: column '" + c.name +
                                  "' has the wrong length");
    out += ',' + c.name;
  }
  out += '\n';
  for (std::size_t i = 0; i < timestamps.size(); ++i) {
    out += std::to_string(timestamps[i]);
    for (const auto &c : columns) {
      out += ',';
      out += format_double(c.values[i]);
    }
    out += '\n';
  }
  return out;
}

void write_csv(const std::string &path, std::span<const std::int64_t> timestamps,
               std::span<const CsvColumn> columns) {
  write_file(path, format_csv(timestamps, columns));
}

} // namespace nilm
