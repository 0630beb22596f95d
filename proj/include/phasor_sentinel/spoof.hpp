#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "phasor_sentinel/fleet.hpp"

namespace phasor_sentinel {

enum class SpoofKind { Mirror, PolyFit, Dilate };

/// Playback slowdown factor num/den (> 1 means slower than real time).
struct DilationRatio {
  int num = 2;
  int den = 1;
  double value() const { return static_cast<double>(num) / den; }
  friend bool operator==(const DilationRatio&, const DilationRatio&) = default;
};

/// Parses "3/2" or "2"; throws ValidationError unless the ratio is > 1.
DilationRatio parse_ratio(const std::string& text);
std::string to_string(const DilationRatio& r);

struct SpoofSpec {
  SpoofKind kind = SpoofKind::Mirror;
  DilationRatio dilation{2, 1};
  int target_pmu = 0;
  std::int64_t start_cycle = kCyclesPerMinute / 2;
  std::uint64_t noise_seed = 0;
  /// PolyFit only: whether to add residual-scale noise to the fitted cubic.
  bool polyfit_noise = true;
  /// PolyFit only: cycles over which the cubic is ramped in from the last
  /// genuine sample. Zero disables the cross-fade.
  int crossfade_cycles = 30;
};

/// Throws ValidationError if the spec does not fit the minute.
void validate(const SpoofSpec& spec, const MinuteDataset& minute);

struct SpoofedMinute {
  MinuteDataset dataset;
  SpoofSpec spec;
  /// label_track[c] is true when the target PMU is spoofed at cycle c.
  std::vector<bool> label_track;

  bool is_spoofed(int pmu, std::int64_t cycle) const {
    return pmu == spec.target_pmu && label_track[static_cast<std::size_t>(cycle)];
  }
};

/// Genuine data wrapped with an all-false label track.
SpoofedMinute unspoofed(MinuteDataset minute, int target_pmu = 0);

/// Cycles [start, end) replay cycles start-1, start-2, ... in reverse.
SpoofedMinute spoof_mirror(const MinuteDataset& minute, const SpoofSpec& spec);
/// Cycles [start, end) follow a least-squares cubic fitted to [0, start).
SpoofedMinute spoof_polyfit(const MinuteDataset& minute, const SpoofSpec& spec);
/// Cycle start+k shows the genuine signal at time start + k/ratio.
SpoofedMinute spoof_dilate(const MinuteDataset& minute, const SpoofSpec& spec);
SpoofedMinute apply_spoof(const MinuteDataset& minute, const SpoofSpec& spec);

/// Cubic coefficients (c0..c3) of a least-squares fit in the scaled
/// abscissa u = (t - center) / half_span, which maps [0, n-1] onto [-1, 1].
struct CubicFit {
  std::array<double, 4> coef{};
  double center = 0.0;
  double half_span = 1.0;
  double residual_sd = 0.0;
  double operator()(double t) const;
};
CubicFit fit_cubic(const std::vector<double>& samples);

/// One entry of the nine-spoof evaluation suite.
struct SuiteEntry {
  std::string code;  // S1, S2, S3.1 .. S3.7
  std::string label; // Mirroring, Polynomial, Dilation x2, ...
  SpoofKind kind;
  DilationRatio dilation;
};

/// S1 mirror, S2 polynomial, S3.1-S3.7 dilation at 2, 3/2, 4/3, 5/4, 6/5, 8/7, 9/8.
const std::vector<SuiteEntry>& nine_spoof_suite();
const SuiteEntry& suite_entry(const std::string& code);

std::string to_string(SpoofKind kind);
SpoofKind parse_spoof_kind(const std::string& text);

/// Spec for a suite entry applied to one minute. The target PMU rotates
/// with the minute id so each minute spoofs a different site.
SpoofSpec suite_spec(const SuiteEntry& entry, int minute_id, int pmu_count, std::uint64_t seed);

}  // namespace phasor_sentinel
