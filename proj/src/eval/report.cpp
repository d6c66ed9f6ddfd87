// SPDX-License-Identifier: Apache-2.0
#include <nilm/data/container.hpp>
#include <nilm/data/csv.hpp>
#include <nilm/eval/report.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>
#include <tuple>

namespace nilm {

namespace {

std::string num(double v) { return v == v ? format_double(v) : "nan"; }

double parse_num(const std::string &s, const std::string &key) {
  if (s == "nan")
    return kNotMeasured;
  double v = 0;
  if (!parse_double(s, v))
    throw FormatError("report: '" + key + "' is not a number: " + s);
  return v;
}

std::size_t parse_count(const std::string &s, const std::string &key) {
  double v = parse_num(s, key);
  if (!(v >= 0) || v != std::floor(v))
    throw FormatError("report: '" + key + "' is not a count: " + s);
  return std::size_t(v);
}

bool same(double a, double b) { return (a != a && b != b) || a == b; }

} // namespace

void sort_reports(std::vector<MetricsReport> &reports) {
  std::stable_sort(reports.begin(), reports.end(),
                   [](const MetricsReport &a, const MetricsReport &b) {
                     return std::tie(a.appliance, a.model, a.receptive_field,
                                     a.target_field) <
                            std::tie(b.appliance, b.model, b.receptive_field,
                                     b.target_field);
                   });
}

std::string format_report(std::vector<MetricsReport> reports) {
  sort_reports(reports);
  std::ostringstream out;
  out << "format=nilm-report\nversion=" << kReportVersion
      << "\nrecords=" << reports.size() << '\n';
  for (const auto &r : reports) {
    out << "\n[record]\n"
        << "appliance=" << r.appliance << '\n'
        << "model=" << r.model << '\n'
        << "receptive_field=" << r.receptive_field << '\n'
        << "target_field=" << r.target_field << '\n'
        << "mae=" << num(r.mae) << '\n'
        << "sae=" << num(r.sae) << '\n'
        << "precision=" << num(r.precision) << '\n'
        << "recall=" << num(r.recall) << '\n'
        << "f1=" << num(r.f1) << '\n'
        << "tp=" << r.counts.tp << '\n'
        << "fp=" << r.counts.fp << '\n'
        << "fn=" << r.counts.fn << '\n'
        << "tn=" << r.counts.tn << '\n'
        << "evaluated=" << r.evaluated << '\n'
        << "excluded=" << r.excluded << '\n'
        << "unpredicted=" << r.unpredicted << '\n'
        << "ms_per_iteration=" << num(r.ms_per_iteration) << '\n';
  }
  return out.str();
}

std::vector<MetricsReport> parse_report(const std::string &text) {
  std::istringstream in(text);
  std::string line;
  std::map<std::string, std::string> head;
  std::vector<std::map<std::string, std::string>> blocks;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#')
      continue;
    if (line == "[record]") {
      blocks.emplace_back();
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw FormatError("report: expected key=value, got '" + line + "'");
    auto &target = blocks.empty() ? head : blocks.back();
    target[line.substr(0, eq)] = line.substr(eq + 1);
  }
  if (head["format"] != "nilm-report")
    throw FormatError("report: missing 'format=nilm-report'");
  if (head["version"] != std::to_string(kReportVersion))
    throw FormatError("report: unsupported version '" + head["version"] + "'");
  if (parse_count(head["records"], "records") != blocks.size())
    throw FormatError("report: record count does not match header");
  std::vector<MetricsReport> out;
  for (auto &b : blocks) {
    auto get = [&](const std::string &k) -> const std::string & {
      auto it = b.find(k);
      if (it == b.end())
        throw FormatError("report: record lacks '" + k + "'");
      return it->second;
    };
    MetricsReport r;
    r.appliance = get("appliance");
    r.model = get("model");
    r.receptive_field = parse_count(get("receptive_field"), "receptive_field");
    r.target_field = parse_count(get("target_field"), "target_field");
    r.mae = parse_num(get("mae"), "mae");
    r.sae = parse_num(get("sae"), "sae");
    r.precision = parse_num(get("precision"), "precision");
    r.recall = parse_num(get("recall"), "recall");
    r.f1 = parse_num(get("f1"), "f1");
    r.counts = {parse_count(get("tp"), "tp"), parse_count(get("fp"), "fp"),
                parse_count(get("fn"), "fn"), parse_count(get("tn"), "tn")};
    r.evaluated = parse_count(get("evaluated"), "evaluated");
    r.excluded = parse_count(get("excluded"), "excluded");
    r.unpredicted = parse_count(get("unpredicted"), "unpredicted");
    r.ms_per_iteration = parse_num(get("ms_per_iteration"), "ms_per_iteration");
    out.push_back(std::move(r));
  }
  return out;
}

bool same_report(const MetricsReport &a, const MetricsReport &b) {
  return a.appliance == b.appliance && a.model == b.model &&
         a.receptive_field == b.receptive_field &&
         a.target_field == b.target_field && same(a.mae, b.mae) &&
         same(a.sae, b.sae) && same(a.precision, b.precision) &&
         same(a.recall, b.recall) && same(a.f1, b.f1) && a.counts == b.counts &&
         a.evaluated == b.evaluated && a.excluded == b.excluded &&
         a.unpredicted == b.unpredicted &&
         same(a.ms_per_iteration, b.ms_per_iteration);
}

std::vector<OverallSummary> summarize(std::span<const MetricsReport> reports) {
  std::map<std::tuple<std::string, std::size_t, std::size_t>,
           std::vector<const MetricsReport *>>
    groups;
  for (const auto &r : reports)
    groups[{r.model, r.receptive_field, r.target_field}].push_back(&r);
  auto moments = [](const std::vector<double> &v, double &mean, double &sd) {
    if (v.empty())
      return;
    mean = 0;
    for (double x : v)
      mean += x;
    mean /= double(v.size());
    double ss = 0;
    for (double x : v)
      ss += (x - mean) * (x - mean);
    sd = std::sqrt(ss / double(v.size()));
  };
  std::vector<OverallSummary> out;
  for (const auto &[key, group] : groups) {
    OverallSummary s;
    std::tie(s.model, s.receptive_field, s.target_field) = key;
    s.appliances = group.size();
    std::vector<double> maes, saes, f1s;
    for (const auto *r : group) {
      if (r->has_energy()) {
        maes.push_back(r->mae);
        saes.push_back(r->sae);
      }
      f1s.push_back(r->f1);
    }
    moments(maes, s.mae_mean, s.mae_std);
    moments(saes, s.sae_mean, s.sae_std);
    moments(f1s, s.f1_mean, s.f1_std);
    out.push_back(s);
  }
  return out;
}

std::string format_curves_csv(std::vector<MetricsReport> reports) {
  sort_reports(reports);
  std::string out =
    "appliance,model,receptive_field,target_field,mae,sae,f1,ms_per_iteration\n";
  for (const auto &r : reports)
    out += r.appliance + ',' + r.model + ',' +
           std::to_string(r.receptive_field) + ',' +
           std::to_string(r.target_field) + ',' + num(r.mae) + ',' +
           num(r.sae) + ',' + num(r.f1) + ',' + num(r.ms_per_iteration) + '\n';
  return out;
}

std::string format_overall_csv(std::span<const OverallSummary> summaries) {
  std::string out = "model,receptive_field,target_field,appliances,mae_mean,"
                    "mae_std,sae_mean,sae_std,f1_mean,f1_std\n";
  for (const auto &s : summaries)
    out += s.model + ',' + std::to_string(s.receptive_field) + ',' +
           std::to_string(s.target_field) + ',' +
           std::to_string(s.appliances) + ',' + num(s.mae_mean) + ',' +
           num(s.mae_std) + ',' + num(s.sae_mean) + ',' + num(s.sae_std) +
           ',' + num(s.f1_mean) + ',' + num(s.f1_std) + '\n';
  return out;
}

std::string format_excerpt_csv(const Excerpt &e, std::size_t begin,
                               std::size_t length) {
  const std::size_t T = e.truth.size();
  if (e.aggregate.size() != T || e.prediction.size() != T ||
      e.timestamps.size() != T)
    throw std::invalid_argument("format_excerpt_csv: series lengths differ");
  if (begin > T || length > T - begin)
    throw std::out_of_range("format_excerpt_csv: excerpt exceeds the series");
  std::string out = "timestamp,aggregate,truth,prediction\n";
  for (std::size_t t = begin; t < begin + length; ++t) {
    out += std::to_string(e.timestamps[t]) + ',' + format_double(e.aggregate[t]) +
           ',' + format_double(e.truth[t]) + ',';
    if (!e.valid || (*e.valid)[t])
      out += format_double(e.prediction[t]);
    out += '\n';
  }
  return out;
}

ReportPaths emit_report(const std::string &directory,
                        std::span<const MetricsReport> reports) {
  std::filesystem::create_directories(directory);
  const std::filesystem::path dir(directory);
  ReportPaths p{(dir / "report.txt").string(), (dir / "curves.csv").string(),
                (dir / "overall.csv").string()};
  std::vector<MetricsReport> all(reports.begin(), reports.end());
  write_file(p.report, format_report(all));
  write_file(p.curves, format_curves_csv(all));
  write_file(p.overall, format_overall_csv(summarize(reports)));
  return p;
}

} // namespace nilm
