// SPDX-License-Identifier: Apache-2.0
/**
 * @file   csv.hpp
 * @brief  Meter CSV files: `timestamp,aggregate,<appliance>,...`.
 *
 * Timestamps are integer epoch seconds, values are watts written as decimal
 * numbers; UTF-8 with LF line endings. Values are written in shortest
 * round-trip form so re-reading reproduces them bit for bit.
 */
#pragma once

#include <nilm/data/series.hpp>

#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nilm {

class CsvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CsvOptions {
  int household = 0;
  /// Renames source columns before validation (e.g. a REFIT column label to
  /// an appliance name).
  std::map<std::string, std::string> column_map;
  /// Accepted appliance names; empty accepts any.
  std::set<std::string> known_appliances;
};

struct CsvTable {
  std::vector<ReadingSeries> series; ///< aggregate first, then appliances
  std::size_t rows = 0;              ///< data rows accepted
  std::size_t malformed_rows = 0;
  std::vector<std::size_t> malformed_lines; ///< 1-based, header is line 1

  const ReadingSeries &channel(const std::string &name) const;
  bool has_channel(const std::string &name) const;
};

/// Parses a meter CSV. Rows with the wrong field count or unparsable or
/// negative values are skipped and counted. Unknown columns and
/// non-increasing timestamps throw CsvError naming the column or line.
CsvTable ingest_csv(const std::string &path, const CsvOptions &options = {});
CsvTable parse_csv(const std::string &text, const CsvOptions &options = {},
                   const std::string &origin = "<memory>");

struct CsvColumn {
  std::string name;
  std::span<const double> values;
};

std::string format_csv(std::span<const std::int64_t> timestamps,
                       std::span<const CsvColumn> columns);
void write_csv(const std::string &path, std::span<const std::int64_t> timestamps,
               std::span<const CsvColumn> columns);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);
/// Strict full-string parse; returns false on any trailing garbage.
bool parse_double(const std::string &text, double &out);

} // namespace nilm
