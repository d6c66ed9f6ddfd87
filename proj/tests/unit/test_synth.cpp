// SPDX-License-Identifier: Apache-2.0
#include <nilm/core/error.hpp>
#include <nilm/synth/synth.hpp>

#include <doctest.h>

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <numeric>

using namespace nilm;

namespace {

std::uint64_t fnv1a(std::span<const double> v) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double x : v) {
    unsigned char b[sizeof(double)];
    std::memcpy(b, &x, sizeof(double));
    for (unsigned char c : b)
      h = (h ^ c) * 0x100000001b3ULL;
  }
  return h;
}

} // namespace

TEST_CASE("empty scenario without noise is all zeros") {
  SyntheticScenario s;
  s.samples = 100;
  s.noise_floor = 0;
  s.noise_std = 0;
  const auto h = generate(s);
  CHECK(h.size() == 100);
  CHECK(std::all_of(h.aggregate.begin(), h.aggregate.end(),
                    [](double v) { return v == 0.0; }));
  CHECK(h.timestamps[99] == 990);
}

TEST_CASE("a 120 s kettle activation gives twelve on samples") {
  SyntheticScenario s;
  s.samples = 200;
  auto k = kettle_like();
  k.activations = {{500, 120}};
  s.templates = {k};
  const auto h = generate(s);
  const auto &st = h.states.at("kettle");
  CHECK(std::accumulate(st.begin(), st.end(), 0) == 12);
  for (std::size_t t = 50; t < 62; ++t)
    CHECK(st[t] == 1);
}

TEST_CASE("aggregate is exactly the sum of its channels") {
  for (std::uint64_t seed : {1, 2, 3}) {
    auto s = desk_scenario(50000, seed);
    s.templates.push_back(dishwasher_like());
    const auto h = generate(s);
    std::size_t mismatches = 0;
    for (std::size_t t = 0; t < h.size(); ++t) {
      // Reverse order of summation; whole watts make the order irrelevant.
      double sum = 0;
      for (auto it = h.appliances.rbegin(); it != h.appliances.rend(); ++it)
        sum += it->second[t];
      sum += h.noise[t];
      mismatches += sum != h.aggregate[t] || h.noise[t] < 0.0;
    }
    CHECK(mismatches == 0);
  }
}

TEST_CASE("generation is deterministic per seed") {
  const auto a = generate(desk_scenario(20000, 4));
  const auto b = generate(desk_scenario(20000, 4));
  const auto c = generate(desk_scenario(20000, 5));
  CHECK(a.aggregate == b.aggregate);
  CHECK(a.states == b.states);
  CHECK(a.aggregate != c.aggregate);
}

TEST_CASE("kettle is on for about one percent of the time") {
  SyntheticScenario s;
  s.samples = 2'000'000;
  s.templates = {kettle_like()};
  s.seed = 21;
  const auto h = generate(s);
  const auto &st = h.states.at("kettle");
  const double frac = double(std::accumulate(st.begin(), st.end(), 0)) / double(st.size());
  CHECK(frac > 0.005);
  CHECK(frac < 0.015);
}

TEST_CASE("profile shapes") {
  const auto washer = washer_like();
  const auto w = render_activation(washer, 100, 3);
  for (std::size_t i = 0; i < 20; ++i)
    CHECK(w[i] > 1900);
  for (std::size_t i = 20; i < 100; ++i) {
    CHECK(w[i] >= washer.on_threshold);
    CHECK(w[i] < 400);
  }
  const auto dish = dishwasher_like();
  const auto d = render_activation(dish, 50, 3);
  std::size_t rises = 0;
  for (std::size_t i = 1; i < d.size(); ++i)
    rises += d[i] > 1000 && d[i - 1] < 1000;
  CHECK(rises == dish.cycles - 1);
  CHECK(d.front() > 1000);
  CHECK(d.back() > 1000);
}

TEST_CASE("fixture csv round trips and dropouts reach the gap filler") {
  auto s = desk_scenario(1000, 8);
  const auto h = generate(s);
  const auto table = parse_csv(format_fixture_csv(s, h));
  CHECK(table.rows == 1000);
  CHECK(table.channel("aggregate").watts == h.aggregate);
  CHECK(table.channel("kettle").watts == h.appliances.at("kettle"));
  CHECK(fnv1a(table.channel("aggregate").watts) == fnv1a(generate(s).aggregate));

  s.dropouts = {{100, 19}, {400, 17}};
  const auto path = std::filesystem::temp_directory_path() / "nilm_fixture.csv";
  make_fixture_csv(s, path.string());
  const auto hh = load_household(path.string(), 1);
  std::filesystem::remove(path);
  REQUIRE(hh.size() == 1000);
  for (std::size_t t = 100; t < 119; ++t) {
    CHECK(hh.aggregate[t] == 0.0);
    CHECK(hh.appliance("washing_machine")[t] == 0.0);
  }
  for (std::size_t t = 400; t < 417; ++t)
    CHECK(hh.aggregate[t] == h.aggregate[399]);
  CHECK(hh.aggregate[119] == h.aggregate[119]);
  CHECK(hh.aggregate[417] == h.aggregate[417]);
}

TEST_CASE("scenario files") {
  auto s = desk_scenario(1234, 7);
  s.templates.push_back(dishwasher_like());
  s.templates[0].activations = {{0, 120}, {600, 200}};
  s.dropouts = {{10, 19}};
  s.noise_floor = 61.5;
  CHECK(parse_scenario(format_scenario(s)) == s);

  CHECK_THROWS_AS(parse_scenario("samples: 10\ncolour: red\n"), ConfigError);
  CHECK_THROWS_AS(parse_scenario("seed: 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_scenario("samples: 10\nappliances:\n  - name: k\n"
                                 "    peak_watts: 100\n    threshold: 2000\n"
                                 "    duration_s: [10, 20]\n    mean_gap_s: 50\n"),
                  ConfigError);
  CHECK_THROWS_AS(parse_scenario("samples: 10\ndropouts: [[5, 9]]\n"), ConfigError);
}
