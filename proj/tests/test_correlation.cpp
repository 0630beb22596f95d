#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "phasor_sentinel/correlation.hpp"
#include "phasor_sentinel/error.hpp"
#include "phasor_sentinel/spoof.hpp"

using namespace phasor_sentinel;

TEST_CASE("pearson small cases") {
  const std::vector<double> x = {1, 2, 3, 4}, y = {1, 2, 3, 5};
  CHECK(pearson(x, y).r == doctest::Approx(0.98270).epsilon(1e-5));
  CHECK(pearson(x, y).r == doctest::Approx(oracle::pearson(x, y)).epsilon(1e-14));
  CHECK(pearson(x, x).r == doctest::Approx(1.0));
  const std::vector<double> neg = {-1, -2, -3, -4};
  CHECK(pearson(x, neg).r == doctest::Approx(-1.0));

  const std::vector<double> flat = {5, 5, 5, 5};
  const auto d = pearson(x, flat);
  CHECK(d.degenerate);
  CHECK(d.r == 0.0);

  CHECK_THROWS_AS(pearson(x, std::vector<double>{1, 2}), ValidationError);
  CHECK_THROWS_AS(pearson(std::vector<double>{1}, std::vector<double>{1}), ValidationError);
}

TEST_CASE("rolling correlation tracks the batch oracle") {
  for (int w : kStandardWindows) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(w));
    std::normal_distribution<double> n(0.0, 1.0);
    RollingCorrelation roll(w);
    std::vector<double> xs, ys;
    // Values ride on a large offset with slow drift, which is where naive
    // running sums lose precision.
    double drift = 0.0;
    double worst = 0.0;
    for (int k = 0; k < 100000; ++k) {
      drift += 1e-4 * n(rng);
      const double common = n(rng);
      const double x = 60.0 + drift + 0.01 * common + 0.005 * n(rng);
      const double y = 60.0 + drift + 0.01 * common + 0.005 * n(rng);
      xs.push_back(x);
      ys.push_back(y);
      const auto r = roll.push(x, y);
      if (k + 1 < w) {
        REQUIRE_FALSE(r.has_value());
        continue;
      }
      REQUIRE(r.has_value());
      if (k % 97 == 0 || k > 99000) {
        const std::span<const double> sx(xs.data() + (k + 1 - w), static_cast<std::size_t>(w));
        const std::span<const double> sy(ys.data() + (k + 1 - w), static_cast<std::size_t>(w));
        worst = std::max(worst, std::abs(*r - oracle::pearson(sx, sy)));
      }
    }
    CHECK(worst <= 1e-9);
    CHECK(roll.pushes() == 100000);
  }
}

TEST_CASE("rolling correlation: window contents, degenerate and invalid input") {
  RollingCorrelation r(3);
  CHECK_FALSE(r.push(1, 2).has_value());
  CHECK_FALSE(r.push(2, 2).has_value());
  auto v = r.push(3, 2);
  REQUIRE(v.has_value());
  CHECK(*v == 0.0);
  CHECK(r.degenerate());
  v = r.push(4, 5);
  CHECK_FALSE(r.degenerate());
  CHECK(r.window_x() == std::vector<double>{2, 3, 4});
  CHECK(r.window_y() == std::vector<double>{2, 2, 5});
  CHECK_THROWS_AS(r.push(std::nan(""), 1.0), ValidationError);
  CHECK_THROWS_AS(RollingCorrelation(1), ValidationError);
}

TEST_CASE("fleet correlator shape and ordering") {
  auto cfg = default_fleet_config();
  cfg.pmu_count = 2;
  cfg.electrical_distance = default_electrical_distance(2);
  const auto two = correlate_fleet(generate_minute(cfg, 1), 60, kAllParameters);
  CHECK(two.rows.size() == 3541);
  CHECK(two.rows.front().cycle == 59);
  CHECK(two.rows.back().cycle == 3599);

  const auto minute = generate_minute(default_fleet_config(), 1);
  const std::array<Parameter, 1> f = {Parameter::Freq};
  const auto t = correlate_fleet(minute, 300, f);
  CHECK(t.pair_count() == 45);
  CHECK(t.cycle_count() == 3301);
  CHECK(t.rows.size() == 3301u * 45u);
  CHECK(t.at(0, 0).pmu_i == 0);
  CHECK(t.at(0, 0).pmu_j == 1);
  CHECK(t.at(0, 44).pmu_i == 8);
  CHECK(t.at(0, 44).pmu_j == 9);
  const auto& row37 = t.at(5, pair_index(3, 7, 10));
  CHECK(row37.pmu_i == 3);
  CHECK(row37.pmu_j == 7);
  CHECK(row37.cycle == 299 + 5);
  CHECK(all_pairs(10).size() == 45);
  CHECK_THROWS_AS(validate_window(1), ValidationError);
  // A window longer than the minute never primes.
  CHECK(correlate_fleet(minute, 4000, f).rows.empty());
}

TEST_CASE("streaming, threaded and batch correlators agree") {
  const auto minute = generate_minute(default_fleet_config(), 5);
  const auto table = ChannelTable::from_dataset(minute);
  for (int w : {60, 300}) {
    const auto omp = correlate_fleet(table, w, kAllParameters);
    const auto serial = correlate_fleet_serial(table, w, kAllParameters);
    const auto batch = correlate_fleet_batch(table, w, kAllParameters);
    REQUIRE(omp.rows.size() == batch.rows.size());
    REQUIRE(serial.rows.size() == batch.rows.size());
    double worst = 0.0;
    for (std::size_t k = 0; k < batch.rows.size(); ++k) {
      REQUIRE(omp.rows[k].cycle == batch.rows[k].cycle);
      REQUIRE(omp.rows[k].pmu_j == batch.rows[k].pmu_j);
      for (auto p : kAllParameters) {
        REQUIRE(omp.rows[k].r[index_of(p)] == serial.rows[k].r[index_of(p)]);
        worst = std::max(worst, std::abs(omp.rows[k].r[index_of(p)] - batch.rows[k].r[index_of(p)]));
      }
    }
    CHECK(worst <= 1e-9);
  }
}

TEST_CASE("correlation is invariant to affine maps of a channel") {
  auto minute = generate_minute(default_fleet_config(), 6);
  const std::array<Parameter, 1> f = {Parameter::Freq};
  const auto base = correlate_fleet(minute, 120, f);
  for (auto& fr : minute.streams[2]) fr.freq = 3.0 * (fr.freq - 60.0) + 10.0;
  const auto moved = correlate_fleet(minute, 120, f);
  for (std::size_t k = 0; k < base.rows.size(); ++k)
    REQUIRE(moved.rows[k].r[index_of(Parameter::Freq)] ==
            doctest::Approx(base.rows[k].r[index_of(Parameter::Freq)]).epsilon(1e-9));
}

TEST_CASE("misaligned streams are rejected") {
  auto minute = generate_minute(default_fleet_config(), 1);
  minute.streams[3].pop_back();
  CHECK_THROWS_AS(ChannelTable::from_dataset(minute), ValidationError);
  minute = generate_minute(default_fleet_config(), 1);
  minute.streams[3][10].cycle = 11;
  CHECK_THROWS_AS(ChannelTable::from_dataset(minute), ValidationError);
}

TEST_CASE("mirroring breaks frequency correlation") {
  const auto minute = generate_minute(default_fleet_config(), 1);
  SpoofSpec spec;
  spec.kind = SpoofKind::Mirror;
  spec.target_pmu = 0;
  const auto s = spoof_mirror(minute, spec);
  const std::array<Parameter, 1> f = {Parameter::Freq};
  const auto t = correlate_fleet(s.dataset, 300, f);
  const auto offset = [&](std::int64_t cycle) { return cycle - t.rows.front().cycle; };
  double before = 0.0, after = 0.0;
  for (int j = 1; j < 10; ++j) {
    const int k = pair_index(0, j, 10);
    before += t.at(offset(1799), k).r[index_of(Parameter::Freq)];
    after += t.at(offset(2100), k).r[index_of(Parameter::Freq)];
  }
  CHECK(after / 9 < before / 9);
}
