// SPDX-License-Identifier: Apache-2.0
#include "../support/oracles.hpp"

#include <nilm/core/rng.hpp>
#include <nilm/data/container.hpp>
#include <nilm/data/series.hpp>
#include <nilm/eval/metrics.hpp>
#include <nilm/eval/report.hpp>

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numeric>

using namespace nilm;

TEST_CASE("mae and sae hand cases") {
  const std::vector<double> z = {0, 0, 0}, t = {0, 30, 0};
  CHECK(mae(z, t) == 10.0);
  CHECK(mae(t, t) == 0.0);
  CHECK(sae(z, t) == 1.0);
  const std::vector<double> shifted = {30, 0, 0};
  CHECK(sae(shifted, t) == 0.0);
  CHECK_THROWS_AS(mae(std::vector<double>{}, std::vector<double>{}), MetricError);
  CHECK_THROWS_AS(sae(z, z), MetricError);
}

TEST_CASE("f1 hand cases") {
  const auto s = f1_from_counts({2, 1, 1, 0});
  CHECK(s.precision == 2.0 / 3.0);
  CHECK(s.recall == 2.0 / 3.0);
  CHECK(s.f1 == 2.0 / 3.0);

  const std::vector<std::uint8_t> truth = {1, 0, 1, 1}, off(4, 0);
  CHECK(f1_score(truth, truth).f1 == 1.0);
  const auto none = f1_score(off, truth);
  CHECK(none.recall == 0.0);
  CHECK(none.f1 == 0.0);
  CHECK(f1_score(off, off).f1 == 0.0);
  // Symmetric in the roles of two compared predictors.
  const std::vector<std::uint8_t> a = {1, 1, 0, 0}, b = {0, 1, 1, 0};
  CHECK(f1_score(a, b).f1 == f1_score(b, a).f1);
}

TEST_CASE("metrics agree with one-pass oracles") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed)
    CHECK(testing::compare_metrics(1000, seed).worst() < 1e-12);
}

TEST_CASE("evaluation excludes invalid points and unpredicted ones") {
  const std::vector<double> agg = {100, 0, 50, 3000, 3000};
  const std::vector<double> truth = {20, 0, 60, 2500, 0};
  const std::vector<double> pred = {10, 5, 5, 2600, 0};
  const auto states = binarize(pred, 2000);
  const std::vector<bool> valid = {true, true, true, true, false};
  const auto rep = evaluate({agg, truth, pred, states, &valid, 2000});
  CHECK(rep.unpredicted == 1);
  CHECK(rep.excluded == 2);
  CHECK(rep.evaluated == 2);
  CHECK(rep.mae == doctest::Approx((10.0 + 100.0) / 2));
  CHECK(rep.f1 == 1.0);

  const auto classifier = evaluate({agg, truth, {}, states, &valid, 2000});
  CHECK_FALSE(classifier.has_energy());
  CHECK(classifier.f1 == 1.0);
}

TEST_CASE("baselines") {
  CounterRng rng(11);
  std::vector<double> truth(500), agg(500);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    truth[i] = rng.uniform() < 0.05 ? 2200.0 : rng.uniform(0, 2);
    agg[i] = truth[i] + 100.0;
  }
  const double mean_truth =
    std::accumulate(truth.begin(), truth.end(), 0.0) / double(truth.size());
  const auto zero = baseline_always_zero(agg, truth, 2000);
  CHECK(zero.mae == doctest::Approx(mean_truth).epsilon(1e-12));
  CHECK(zero.sae == 1.0);
  CHECK(zero.f1 == 0.0);

  const double train_mean = 80.0;
  const auto mean = baseline_always_mean(agg, truth, train_mean, 2000);
  const double total = std::accumulate(truth.begin(), truth.end(), 0.0);
  CHECK(mean.sae == doctest::Approx(std::abs(500 * train_mean - total) / total)
                      .epsilon(1e-12));
  const auto self = baseline_always_mean(agg, truth, mean_truth, 2000);
  CHECK(self.sae < 1e-12);
}

namespace {

MetricsReport sample_report(const std::string &app, std::size_t L, double mae) {
  MetricsReport r;
  r.appliance = app;
  r.model = "wavenet";
  r.receptive_field = L;
  r.target_field = 10;
  r.mae = mae;
  r.sae = 0.125;
  r.precision = 0.75;
  r.recall = 0.5;
  r.f1 = 0.6;
  r.counts = {3, 1, 3, 93};
  r.evaluated = 100;
  r.excluded = 4;
  r.ms_per_iteration = 1.0 / 3.0;
  return r;
}

} // namespace

TEST_CASE("report round trip and summaries") {
  CHECK(parse_report(format_report({})).empty());

  std::vector<MetricsReport> reps = {sample_report("washing_machine", 127, 7.5),
                                     sample_report("kettle", 127, 0.1 + 0.2),
                                     sample_report("kettle", 63, 4.0)};
  reps[2].mae = kNotMeasured;
  reps[2].sae = kNotMeasured;
  const auto parsed = parse_report(format_report(reps));
  auto sorted = reps;
  sort_reports(sorted);
  REQUIRE(parsed.size() == 3);
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(same_report(parsed[i], sorted[i]));
  CHECK(parsed[0].receptive_field == 63);
  CHECK_THROWS_AS(parse_report("format=other\n"), FormatError);

  const std::vector<MetricsReport> two = {sample_report("a", 127, 2.0),
                                          sample_report("b", 127, 4.0)};
  const auto sum = summarize(two);
  REQUIRE(sum.size() == 1);
  CHECK(sum[0].appliances == 2);
  CHECK(sum[0].mae_mean == 3.0);
  CHECK(sum[0].mae_std == 1.0);

  const auto curves = format_curves_csv(reps);
  CHECK(std::count(curves.begin(), curves.end(), '\n') == 4);
}

TEST_CASE("excerpt rows and emitted files") {
  const std::vector<std::int64_t> ts = {0, 10, 20, 30, 40};
  const std::vector<double> a = {1, 2, 3, 4, 5}, t = {0, 1, 0, 1, 0},
                            p = {0, 0.5, 0, 0, 0};
  const std::vector<bool> valid = {false, true, true, true, false};
  const auto csv = format_excerpt_csv({ts, a, t, p, &valid}, 1, 3);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 3);
  CHECK(csv.find("10,2,1,0.5\n") != std::string::npos);
  const auto edge = format_excerpt_csv({ts, a, t, p, &valid}, 3, 2);
  CHECK(edge.find("40,5,0,\n") != std::string::npos);

  const auto dir = std::filesystem::temp_directory_path() / "nilm_test_emit";
  std::filesystem::remove_all(dir);
  const std::vector<MetricsReport> reps = {sample_report("kettle", 127, 1.5)};
  const auto paths = emit_report(dir.string(), reps);
  const auto back = parse_report(read_file(paths.report));
  REQUIRE(back.size() == 1);
  CHECK(same_report(back[0], reps[0]));
  CHECK(std::filesystem::exists(paths.curves));
  CHECK(std::filesystem::exists(paths.overall));
  std::filesystem::remove_all(dir);
}
