#include "phasor_sentinel/spoof.hpp"

#include <cassert>
#include <charconv>
#include <cmath>
#include <numeric>
#include <random>

#include "phasor_sentinel/error.hpp"

namespace phasor_sentinel {

namespace {

// The eight stored channels of a frame, in frames-CSV order.
constexpr int kRawChannels = 8;

bool raw_is_angle(int ch) { return ch == 1 || ch == 3 || ch == 5; }

double raw_get(const PhasorFrame& f, int ch) {
  switch (ch) {
    case 0: return f.va.magnitude();
    case 1: return f.va.angle();
    case 2: return f.vb.magnitude();
    case 3: return f.vb.angle();
    case 4: return f.vc.magnitude();
    case 5: return f.vc.angle();
    case 6: return f.freq;
    default: return f.rocof;
  }
}

std::vector<double> raw_series(const std::vector<PhasorFrame>& stream, int ch) {
  std::vector<double> out(stream.size());
  for (std::size_t k = 0; k < stream.size(); ++k) out[k] = raw_get(stream[k], ch);
  if (raw_is_angle(ch)) unwrap_in_place(out);
  return out;
}

// Writes the eight channel series back into the target stream over [start, end).
void store(std::vector<PhasorFrame>& stream, const std::array<std::vector<double>, kRawChannels>& ch,
           std::int64_t start) {
  for (auto k = static_cast<std::size_t>(start); k < stream.size(); ++k) {
    auto mag = [&](int c) { return std::max(0.0, ch[static_cast<std::size_t>(c)][k]); };
    auto ang = [&](int c) { return ch[static_cast<std::size_t>(c)][k]; };
    auto& f = stream[k];
    f.va = Phasor(mag(0), ang(1));
    f.vb = Phasor(mag(2), ang(3));
    f.vc = Phasor(mag(4), ang(5));
    f.freq = ch[6][k];
    f.rocof = ch[7][k];
  }
}

SpoofedMinute make_result(const MinuteDataset& minute, const SpoofSpec& spec) {
  SpoofedMinute out;
  out.dataset = minute;
  out.spec = spec;
  out.label_track.assign(static_cast<std::size_t>(minute.cycles()), false);
  for (auto c = static_cast<std::size_t>(spec.start_cycle); c < out.label_track.size(); ++c) {
    out.label_track[c] = true;
  }
  return out;
}

void expect_kind(const SpoofSpec& spec, SpoofKind kind) {
  if (spec.kind != kind) throw ValidationError("spoof spec kind does not match the requested spoof");
}

}  // namespace

DilationRatio parse_ratio(const std::string& text) {
  DilationRatio r{0, 1};
  const auto slash = text.find('/');
  auto parse_int = [&](std::string_view s, int& out) {
    const auto* end = s.data() + s.size();
    const auto res = std::from_chars(s.data(), end, out);
    if (res.ec != std::errc() || res.ptr != end) throw ValidationError("bad dilation ratio '" + text + "'");
  };
  if (slash == std::string::npos) {
    parse_int(text, r.num);
  } else {
    parse_int(std::string_view(text).substr(0, slash), r.num);
    parse_int(std::string_view(text).substr(slash + 1), r.den);
  }
  if (r.den <= 0 || r.num <= r.den) {
    throw ValidationError("dilation ratio must be a fraction greater than 1, got '" + text + "'");
  }
  return r;
}

std::string to_string(const DilationRatio& r) {
  return r.den == 1 ? std::to_string(r.num) : std::to_string(r.num) + "/" + std::to_string(r.den);
}

std::string to_string(SpoofKind kind) {
  switch (kind) {
    case SpoofKind::Mirror: return "mirror";
    case SpoofKind::PolyFit: return "polyfit";
    case SpoofKind::Dilate: return "dilate";
  }
  return "?";
}

SpoofKind parse_spoof_kind(const std::string& text) {
  if (text == "mirror") return SpoofKind::Mirror;
  if (text == "polyfit" || text == "poly" || text == "polynomial") return SpoofKind::PolyFit;
  if (text == "dilate" || text == "dilation") return SpoofKind::Dilate;
  throw ValidationError("unknown spoof kind '" + text + "'");
}

void validate(const SpoofSpec& spec, const MinuteDataset& minute) {
  if (spec.target_pmu < 0 || spec.target_pmu >= minute.pmu_count()) {
    throw ValidationError("spoof target PMU out of range");
  }
  const auto n = minute.cycles();
  if (spec.start_cycle < 1 || spec.start_cycle >= n) {
    throw ValidationError("spoof start cycle must lie inside the minute");
  }
  if (spec.kind == SpoofKind::Mirror && spec.start_cycle < n - spec.start_cycle) {
    throw ValidationError("mirror spoof needs at least as much genuine data as it replays");
  }
  if (spec.kind == SpoofKind::PolyFit && spec.start_cycle < 4) {
    throw ValidationError("polynomial spoof needs at least 4 genuine cycles");
  }
  if (spec.kind == SpoofKind::Dilate && (spec.dilation.den <= 0 || spec.dilation.num <= spec.dilation.den)) {
    throw ValidationError("dilation ratio must be greater than 1");
  }
  if (spec.crossfade_cycles < 0) throw ValidationError("crossfade must be nonnegative");
}

SpoofedMinute unspoofed(MinuteDataset minute, int target_pmu) {
  SpoofedMinute out;
  out.label_track.assign(static_cast<std::size_t>(minute.cycles()), false);
  out.dataset = std::move(minute);
  out.spec.target_pmu = target_pmu;
  out.spec.start_cycle = out.dataset.cycles();
  return out;
}

SpoofedMinute spoof_mirror(const MinuteDataset& minute, const SpoofSpec& spec) {
  expect_kind(spec, SpoofKind::Mirror);
  validate(spec, minute);
  auto out = make_result(minute, spec);
  const auto& src = minute.streams[static_cast<std::size_t>(spec.target_pmu)];
  auto& dst = out.dataset.streams[static_cast<std::size_t>(spec.target_pmu)];
  const auto start = static_cast<std::size_t>(spec.start_cycle);
  for (std::size_t k = 0; start + k < dst.size(); ++k) {
    const auto& from = src[start - 1 - k];
    auto& to = dst[start + k];
    to.va = from.va;
    to.vb = from.vb;
    to.vc = from.vc;
    to.freq = from.freq;
    to.rocof = from.rocof;
  }
  return out;
}

double CubicFit::operator()(double t) const {
  const double u = (t - center) / half_span;
  return coef[0] + u * (coef[1] + u * (coef[2] + u * coef[3]));
}

CubicFit fit_cubic(const std::vector<double>& samples) {
  const std::size_t n = samples.size();
  assert(n >= 4);
  CubicFit fit;
  fit.center = static_cast<double>(n - 1) / 2.0;
  fit.half_span = std::max(fit.center, 0.5);

  // Normal equations A^T A c = A^T y over u in [-1, 1].
  std::array<std::array<double, 4>, 4> m{};
  std::array<double, 4> rhs{};
  for (std::size_t t = 0; t < n; ++t) {
    const double u = (static_cast<double>(t) - fit.center) / fit.half_span;
    const std::array<double, 4> pw = {1.0, u, u * u, u * u * u};
    for (int i = 0; i < 4; ++i) {
      rhs[i] += pw[i] * samples[t];
      for (int j = 0; j < 4; ++j) m[i][j] += pw[i] * pw[j];
    }
  }
  // Cholesky; the Gram matrix is positive definite for >= 4 distinct abscissae.
  std::array<std::array<double, 4>, 4> l{};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = m[i][j];
      for (int k = 0; k < j; ++k) s -= l[i][k] * l[j][k];
      if (i == j) {
        assert(s > 0.0 && "singular normal equations");
        l[i][i] = std::sqrt(s);
      } else {
        l[i][j] = s / l[j][j];
      }
    }
  }
  std::array<double, 4> z{};
  for (int i = 0; i < 4; ++i) {
    double s = rhs[i];
    for (int k = 0; k < i; ++k) s -= l[i][k] * z[k];
    z[i] = s / l[i][i];
  }
  for (int i = 3; i >= 0; --i) {
    double s = z[i];
    for (int k = i + 1; k < 4; ++k) s -= l[k][i] * fit.coef[k];
    fit.coef[i] = s / l[i][i];
  }

  double ss = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double r = samples[t] - fit(static_cast<double>(t));
    ss += r * r;
  }
  fit.residual_sd = std::sqrt(ss / static_cast<double>(n));
  return fit;
}

SpoofedMinute spoof_polyfit(const MinuteDataset& minute, const SpoofSpec& spec) {
  expect_kind(spec, SpoofKind::PolyFit);
  validate(spec, minute);
  auto out = make_result(minute, spec);
  const auto& src = minute.streams[static_cast<std::size_t>(spec.target_pmu)];
  const auto start = static_cast<std::size_t>(spec.start_cycle);

  std::array<std::vector<double>, kRawChannels> channels;
  for (int ch = 0; ch < kRawChannels; ++ch) {
    auto series = raw_series(src, ch);
    const std::vector<double> genuine(series.begin(), series.begin() + static_cast<std::ptrdiff_t>(start));
    const auto fit = fit_cubic(genuine);
    std::seed_seq seq{static_cast<std::uint32_t>(spec.noise_seed),
                      static_cast<std::uint32_t>(spec.noise_seed >> 32), static_cast<std::uint32_t>(ch)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal(0.0, fit.residual_sd > 0.0 ? fit.residual_sd : 1.0);
    const double anchor = series[start - 1];
    for (std::size_t k = 0; start + k < series.size(); ++k) {
      double value = fit(static_cast<double>(start + k));
      if (spec.polyfit_noise && fit.residual_sd > 0.0) value += normal(rng);
      const double w = spec.crossfade_cycles > 0
                           ? std::min(1.0, static_cast<double>(k) / spec.crossfade_cycles)
                           : 1.0;
      series[start + k] = anchor + (value - anchor) * w;
    }
    channels[static_cast<std::size_t>(ch)] = std::move(series);
  }
  store(out.dataset.streams[static_cast<std::size_t>(spec.target_pmu)], channels, spec.start_cycle);
  return out;
}

SpoofedMinute spoof_dilate(const MinuteDataset& minute, const SpoofSpec& spec) {
  expect_kind(spec, SpoofKind::Dilate);
  validate(spec, minute);
  auto out = make_result(minute, spec);
  const auto& src = minute.streams[static_cast<std::size_t>(spec.target_pmu)];
  const auto start = static_cast<std::size_t>(spec.start_cycle);
  const auto num = static_cast<std::size_t>(spec.dilation.num);
  const auto den = static_cast<std::size_t>(spec.dilation.den);

  std::array<std::vector<double>, kRawChannels> channels;
  for (int ch = 0; ch < kRawChannels; ++ch) {
    auto series = raw_series(src, ch);
    const auto genuine = series;
    for (std::size_t k = 0; start + k < series.size(); ++k) {
      // Source time start + k * den / num, split into whole and fractional cycles.
      const std::size_t i0 = start + (k * den) / num;
      const double frac = static_cast<double>((k * den) % num) / static_cast<double>(num);
      const double a = genuine[i0];
      series[start + k] = frac == 0.0 ? a : a + (genuine[i0 + 1] - a) * frac;
    }
    channels[static_cast<std::size_t>(ch)] = std::move(series);
  }
  store(out.dataset.streams[static_cast<std::size_t>(spec.target_pmu)], channels, spec.start_cycle);
  return out;
}

SpoofedMinute apply_spoof(const MinuteDataset& minute, const SpoofSpec& spec) {
  switch (spec.kind) {
    case SpoofKind::Mirror: return spoof_mirror(minute, spec);
    case SpoofKind::PolyFit: return spoof_polyfit(minute, spec);
    case SpoofKind::Dilate: return spoof_dilate(minute, spec);
  }
  throw ValidationError("unknown spoof kind");
}

const std::vector<SuiteEntry>& nine_spoof_suite() {
  static const std::vector<SuiteEntry> suite = {
      {"S1", "Mirroring", SpoofKind::Mirror, {2, 1}},
      {"S2", "Polynomial", SpoofKind::PolyFit, {2, 1}},
      {"S3.1", "Dilation x2", SpoofKind::Dilate, {2, 1}},
      {"S3.2", "Dilation x3/2", SpoofKind::Dilate, {3, 2}},
      {"S3.3", "Dilation x4/3", SpoofKind::Dilate, {4, 3}},
      {"S3.4", "Dilation x5/4", SpoofKind::Dilate, {5, 4}},
      {"S3.5", "Dilation x6/5", SpoofKind::Dilate, {6, 5}},
      {"S3.6", "Dilation x8/7", SpoofKind::Dilate, {8, 7}},
      {"S3.7", "Dilation x9/8", SpoofKind::Dilate, {9, 8}},
  };
  return suite;
}

const SuiteEntry& suite_entry(const std::string& code) {
  for (const auto& e : nine_spoof_suite()) {
    if (e.code == code) return e;
  }
  throw ValidationError("unknown spoof code '" + code + "'");
}

SpoofSpec suite_spec(const SuiteEntry& entry, int minute_id, int pmu_count, std::uint64_t seed) {
  SpoofSpec spec;
  spec.kind = entry.kind;
  spec.dilation = entry.dilation;
  spec.target_pmu = pmu_count > 0 ? (minute_id - 1 + pmu_count) % pmu_count : 0;
  spec.start_cycle = kCyclesPerMinute / 2;
  spec.noise_seed = seed ^ (static_cast<std::uint64_t>(minute_id) << 32);
  return spec;
}

}  // namespace phasor_sentinel
