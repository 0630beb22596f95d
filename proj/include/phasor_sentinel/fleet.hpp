#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "phasor_sentinel/phasor.hpp"

namespace phasor_sentinel {

inline constexpr int kFramesPerSecond = 60;
inline constexpr int kCyclesPerMinute = 60 * kFramesPerSecond;

/// Per-parameter values indexed by index_of(Parameter).
using ChannelArray = std::array<double, kParameterCount>;

/// Time constants and amplitudes of the stochastic processes behind the
/// synthetic fleet. All processes are Ornstein-Uhlenbeck with exact
/// discretization at the frame rate; sigmas are stationary standard
/// deviations.
struct SignalDynamics {
  // Fleet-wide frequency deviation (Hz): slow wander plus fast jitter.
  double freq_slow_tau_s = 5.0;
  double freq_slow_sigma_hz = 0.0045;
  double freq_fast_tau_s = 0.04;
  double freq_fast_sigma_hz = 0.0135;
  // Regional frequency deviation, spatially correlated by electrical distance.
  double freq_regional_tau_s = 0.5;
  double freq_regional_sigma_hz = 0.012;

  // Positive-sequence magnitude deviation (per unit).
  double vpos_slow_tau_s = 2.0;
  double vpos_slow_sigma = 0.00133;
  double vpos_fast_tau_s = 0.04;
  double vpos_fast_sigma = 0.004;
  double vpos_regional_tau_s = 0.5;
  double vpos_regional_sigma = 0.004;

  // Unbalance: |V-| and |V0| as a fraction of |V+|, with relative wander.
  double vneg_ratio_min = 0.01;
  double vneg_ratio_max = 0.03;
  double vzero_ratio_min = 0.005;
  double vzero_ratio_max = 0.02;
  double unbalance_tau_s = 1.0;
  double unbalance_relative_sigma = 0.2;
  // Angle of V- / V0 relative to V+ (radians).
  double unbalance_angle_tau_s = 3.0;
  double unbalance_angle_sigma = 0.15;

  /// Correlation length of the regional processes, in electrical-distance units.
  double regional_length = 1.0;
};

struct FleetConfig {
  int pmu_count = 10;
  int frames_per_second = kFramesPerSecond;
  int minutes = 14;
  std::uint64_t seed = 7;
  /// Symmetric pmu_count x pmu_count, zero diagonal, positive off-diagonal.
  std::vector<std::vector<double>> electrical_distance;
  /// Gaussian measurement noise per channel. Units: pu, rad, Hz, Hz/s.
  ChannelArray noise_profile{};
  /// Weight of the fleet-wide component for |V+|, |V-|, phi-, |V0|, phi0
  /// and f; the remainder is regional (|V+|, f) or per-PMU. The phi+ and
  /// ROCOF entries are unused: those channels derive from frequency.
  ChannelArray common_mode_strength{};
  SignalDynamics dynamics;
};

/// Ten PMUs laid out along a corridor; distances are |x_i - x_j|.
FleetConfig default_fleet_config();

/// Corridor distance matrix for `pmu_count` PMUs at the default spacing.
std::vector<std::vector<double>> default_electrical_distance(int pmu_count);

/// Throws ValidationError when the config violates its invariants.
void validate(const FleetConfig& config);

/// One minute of gap-free data for every PMU. Cycle indices run 0..3599
/// within the minute.
struct MinuteDataset {
  int minute_id = 0;
  /// streams[pmu][k] has cycle == k.
  std::vector<std::vector<PhasorFrame>> streams;

  int pmu_count() const { return static_cast<int>(streams.size()); }
  std::int64_t cycles() const {
    return streams.empty() ? 0 : static_cast<std::int64_t>(streams.front().size());
  }
};

/// Seed for one minute: config seed XOR minute id.
inline std::uint64_t minute_seed(std::uint64_t seed, int minute_id) {
  return seed ^ static_cast<std::uint64_t>(minute_id);
}

/// Deterministic in (config, minute_id).
MinuteDataset generate_minute(const FleetConfig& config, int minute_id);

/// Minutes 1..config.minutes; generated in parallel across minutes.
std::vector<MinuteDataset> generate_fleet(const FleetConfig& config);

}  // namespace phasor_sentinel
