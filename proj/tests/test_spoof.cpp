#include <functional>
#include <random>

#include "doctest.h"
#include "phasor_sentinel/error.hpp"
#include "phasor_sentinel/spoof.hpp"

using namespace phasor_sentinel;

namespace {

// Two PMUs; the target's frequency follows `freq(t)`, everything else is flat.
MinuteDataset toy_minute(std::int64_t cycles, const std::function<double(double)>& freq) {
  MinuteDataset m;
  m.minute_id = 1;
  m.streams.resize(2);
  for (int p = 0; p < 2; ++p) {
    for (std::int64_t c = 0; c < cycles; ++c) {
      PhasorFrame f;
      f.pmu_id = p;
      f.cycle = c;
      const double t = static_cast<double>(c);
      f.va = Phasor(1.0 + 1e-4 * t, 0.001 * t);
      f.vb = Phasor(1.0, 0.001 * t - 2.0 * kPi / 3.0);
      f.vc = Phasor(1.0, 0.001 * t + 2.0 * kPi / 3.0);
      f.freq = p == 0 ? freq(t) : 60.0;
      f.rocof = 0.0;
      m.streams[static_cast<std::size_t>(p)].push_back(f);
    }
  }
  return m;
}

SpoofSpec spec_of(SpoofKind kind, std::int64_t start) {
  SpoofSpec s;
  s.kind = kind;
  s.target_pmu = 0;
  s.start_cycle = start;
  return s;
}

// Least squares by modified Gram-Schmidt QR in long double, on a scaled
// abscissa. Returns the fitted function.
std::function<double(double)> qr_cubic(const std::vector<double>& y) {
  const std::size_t n = y.size();
  const long double c = (n - 1) / 2.0L, h = std::max(c, 0.5L);
  std::vector<std::vector<long double>> q(4, std::vector<long double>(n));
  for (std::size_t t = 0; t < n; ++t) {
    const long double u = (t - c) / h;
    q[0][t] = 1;
    q[1][t] = u;
    q[2][t] = u * u;
    q[3][t] = u * u * u;
  }
  long double r[4][4] = {};
  for (int j = 0; j < 4; ++j) {
    for (int i = 0; i < j; ++i) {
      long double dot = 0;
      for (std::size_t t = 0; t < n; ++t) dot += q[i][t] * q[j][t];
      r[i][j] = dot;
      for (std::size_t t = 0; t < n; ++t) q[j][t] -= dot * q[i][t];
    }
    long double norm = 0;
    for (std::size_t t = 0; t < n; ++t) norm += q[j][t] * q[j][t];
    norm = std::sqrt(norm);
    r[j][j] = norm;
    for (std::size_t t = 0; t < n; ++t) q[j][t] /= norm;
  }
  long double qty[4] = {};
  for (int i = 0; i < 4; ++i)
    for (std::size_t t = 0; t < n; ++t) qty[i] += q[i][t] * y[t];
  long double coef[4] = {};
  for (int i = 3; i >= 0; --i) {
    long double s = qty[i];
    for (int k = i + 1; k < 4; ++k) s -= r[i][k] * coef[k];
    coef[i] = s / r[i][i];
  }
  return [=](double t) {
    const long double u = (t - c) / h;
    return static_cast<double>(coef[0] + u * (coef[1] + u * (coef[2] + u * coef[3])));
  };
}

}  // namespace

TEST_CASE("mirror toy case") {
  const std::vector<double> vals = {10.0, 20.0, 30.0, 40.0};
  auto m = toy_minute(4, [&](double t) { return vals[static_cast<std::size_t>(t)]; });
  const auto s = spoof_mirror(m, spec_of(SpoofKind::Mirror, 2));
  const auto& f = s.dataset.streams[0];
  CHECK(f[0].freq == 10.0);
  CHECK(f[1].freq == 20.0);
  CHECK(f[2].freq == 20.0);
  CHECK(f[3].freq == 10.0);
  CHECK(s.label_track == std::vector<bool>{false, false, true, true});
}

TEST_CASE("mirror on a generated minute") {
  const auto m = generate_minute(default_fleet_config(), 1);
  const auto s = spoof_mirror(m, spec_of(SpoofKind::Mirror, 1800));
  const auto& src = m.streams[0];
  const auto& dst = s.dataset.streams[0];
  // Continuous at the seam: the first replayed frame is the last genuine one.
  CHECK(dst[1800].freq == src[1799].freq);
  for (std::size_t k = 0; k < 1800; ++k) {
    REQUIRE(dst[1800 + k].freq == src[1799 - k].freq);
    REQUIRE(dst[1800 + k].va.angle() == src[1799 - k].va.angle());
    REQUIRE(dst[k].freq == src[k].freq);
  }
  CHECK(s.is_spoofed(0, 1800));
  CHECK_FALSE(s.is_spoofed(0, 1799));
  CHECK_FALSE(s.is_spoofed(1, 2000));

  auto bad = spec_of(SpoofKind::Mirror, 1000);
  CHECK_THROWS_AS(spoof_mirror(m, bad), ValidationError);
}

TEST_CASE("polynomial spoof reproduces an exact cubic") {
  auto cubic = [](double t) { return 60.0 + 1e-3 * t - 2e-6 * t * t + 3e-10 * t * t * t; };
  const auto m = toy_minute(400, cubic);
  auto spec = spec_of(SpoofKind::PolyFit, 200);
  spec.polyfit_noise = false;
  spec.crossfade_cycles = 0;
  const auto s = spoof_polyfit(m, spec);
  for (std::size_t k = 200; k < 400; ++k) {
    const double t = static_cast<double>(k);
    REQUIRE(s.dataset.streams[0][k].freq == doctest::Approx(cubic(t)).epsilon(1e-9));
  }
  // A constant channel stays constant.
  for (std::size_t k = 200; k < 400; ++k) REQUIRE(s.dataset.streams[0][k].rocof == doctest::Approx(0.0));
}

TEST_CASE("cubic fit agrees with a QR least-squares oracle") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0.0, 0.01);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 10 + static_cast<std::size_t>(trial) * 97;
    std::vector<double> y(n);
    for (std::size_t t = 0; t < n; ++t) y[t] = 60.0 + std::sin(0.01 * static_cast<double>(t)) + noise(rng);
    const auto fit = fit_cubic(y);
    const auto ref = qr_cubic(y);
    for (double t = 0.0; t < 2.0 * static_cast<double>(n); t += 1.0)
      REQUIRE(fit(t) == doctest::Approx(ref(t)).epsilon(1e-9));
  }
}

TEST_CASE("polynomial cross-fade starts at the last genuine sample") {
  const auto m = generate_minute(default_fleet_config(), 2);
  auto spec = spec_of(SpoofKind::PolyFit, 1800);
  spec.noise_seed = 3;
  const auto s = spoof_polyfit(m, spec);
  CHECK(s.dataset.streams[0][1800].freq == doctest::Approx(m.streams[0][1799].freq).epsilon(1e-12));
  for (std::size_t k = 0; k < 1800; ++k) REQUIRE(s.dataset.streams[0][k].freq == m.streams[0][k].freq);
  // Same seed, same output.
  const auto again = spoof_polyfit(m, spec);
  for (std::size_t k = 1800; k < 3600; ++k) REQUIRE(again.dataset.streams[0][k].freq == s.dataset.streams[0][k].freq);
}

TEST_CASE("dilation x2 lands on genuine samples and halves slopes") {
  auto ramp = [](double t) { return 59.95 + 1e-4 * t; };
  const auto m = toy_minute(600, ramp);
  auto spec = spec_of(SpoofKind::Dilate, 300);
  spec.dilation = {2, 1};
  const auto s = spoof_dilate(m, spec);
  const auto& f = s.dataset.streams[0];
  for (std::size_t k = 0; 300 + k < 600; k += 2) REQUIRE(f[300 + k].freq == m.streams[0][300 + k / 2].freq);
  for (std::size_t k = 300; k + 1 < 600; ++k)
    REQUIRE(f[k + 1].freq - f[k].freq == doctest::Approx(0.5e-4).epsilon(1e-6));
}

TEST_CASE("dilation x3/2 interpolates linearly") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(59.98, 60.02);
  std::vector<double> vals(900);
  for (auto& v : vals) v = u(rng);
  const auto m = toy_minute(900, [&](double t) { return vals[static_cast<std::size_t>(t)]; });
  auto spec = spec_of(SpoofKind::Dilate, 450);
  spec.dilation = parse_ratio("3/2");
  const auto s = spoof_dilate(m, spec);
  for (std::size_t k = 0; 450 + k < 900; ++k) {
    const double src = 450.0 + 2.0 * static_cast<double>(k) / 3.0;
    const auto i0 = static_cast<std::size_t>(std::floor(src + 1e-12));
    const double frac = src - static_cast<double>(i0);
    const double want = frac < 1e-12 ? vals[i0] : vals[i0] * (1.0 - frac) + vals[i0 + 1] * frac;
    REQUIRE(std::abs(s.dataset.streams[0][450 + k].freq - want) <= 1e-12);
  }
}

TEST_CASE("non-target PMUs are untouched") {
  const auto m = generate_minute(default_fleet_config(), 4);
  for (const auto& entry : nine_spoof_suite()) {
    const auto spec = suite_spec(entry, 4, m.pmu_count(), 7);
    CHECK(spec.target_pmu == 3);
    const auto s = apply_spoof(m, spec);
    for (int p = 0; p < m.pmu_count(); ++p) {
      if (p == spec.target_pmu) continue;
      const auto& a = m.streams[static_cast<std::size_t>(p)];
      const auto& b = s.dataset.streams[static_cast<std::size_t>(p)];
      for (std::size_t k = 0; k < a.size(); ++k) {
        REQUIRE(a[k].freq == b[k].freq);
        REQUIRE(a[k].va.angle() == b[k].va.angle());
        REQUIRE(a[k].vc.magnitude() == b[k].vc.magnitude());
      }
    }
    std::size_t spoofed = 0;
    for (bool l : s.label_track) spoofed += l;
    CHECK(spoofed == 1800);
  }
}

TEST_CASE("target PMU rotates with the minute") {
  const auto& e = suite_entry("S3.2");
  CHECK(e.dilation == DilationRatio{3, 2});
  CHECK(suite_spec(e, 1, 10, 7).target_pmu == 0);
  CHECK(suite_spec(e, 10, 10, 7).target_pmu == 9);
  CHECK(suite_spec(e, 11, 10, 7).target_pmu == 0);
  CHECK(suite_spec(e, 14, 10, 7).start_cycle == 1800);
  CHECK(nine_spoof_suite().size() == 9);
  CHECK_THROWS_AS(suite_entry("S4"), ValidationError);
}

TEST_CASE("ratio and kind parsing") {
  CHECK(parse_ratio("2") == DilationRatio{2, 1});
  CHECK(parse_ratio("9/8") == DilationRatio{9, 8});
  CHECK(to_string(parse_ratio("9/8")) == "9/8");
  CHECK(to_string(parse_ratio("2")) == "2");
  for (const char* bad : {"1", "2/3", "1/1", "x", "3/0", "3/", "", "-2"})
    CHECK_THROWS_AS(parse_ratio(bad), ValidationError);
  CHECK(parse_spoof_kind("mirror") == SpoofKind::Mirror);
  CHECK_THROWS_AS(parse_spoof_kind("replay"), ValidationError);
}
