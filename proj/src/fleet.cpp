#include "phasor_sentinel/fleet.hpp"

#include <cmath>
#include <random>
#include <string>

#include "phasor_sentinel/error.hpp"
#include "phasor_sentinel/parallel.hpp"

namespace phasor_sentinel {

namespace {

constexpr double kDt = 1.0 / kFramesPerSecond;

// Corridor positions for the default fleet; extra PMUs continue the spacing.
constexpr std::array<double, 10> kCorridor = {0.0, 0.15, 0.35, 0.6, 0.8, 1.1, 1.35, 1.7, 2.0, 2.4};

class OuProcess {
 public:
  OuProcess(double tau_s, double sigma) : decay_(std::exp(-kDt / tau_s)), sigma_(sigma) {
    step_sigma_ = sigma * std::sqrt(1.0 - decay_ * decay_);
  }
  void start(std::normal_distribution<double>& normal, std::mt19937_64& rng) {
    value_ = sigma_ * normal(rng);
  }
  double step(std::normal_distribution<double>& normal, std::mt19937_64& rng) {
    value_ = decay_ * value_ + step_sigma_ * normal(rng);
    return value_;
  }
  double value() const { return value_; }

 private:
  double decay_;
  double sigma_;
  double step_sigma_ = 0.0;
  double value_ = 0.0;
};

// Lower Cholesky factor of exp(-d / length), with diagonal jitter if the
// user-supplied distances do not give a positive-definite kernel.
std::vector<std::vector<double>> regional_mixing(const std::vector<std::vector<double>>& dist,
                                                 double length) {
  const std::size_t n = dist.size();
  for (double jitter : {0.0, 1e-10, 1e-8, 1e-6, 1e-4, 1e-2}) {
    std::vector<std::vector<double>> l(n, std::vector<double>(n, 0.0));
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        double s = std::exp(-dist[i][j] / length) + (i == j ? jitter : 0.0);
        for (std::size_t k = 0; k < j; ++k) s -= l[i][k] * l[j][k];
        if (i == j) {
          if (s <= 0.0) {
            ok = false;
            break;
          }
          l[i][i] = std::sqrt(s);
        } else {
          l[i][j] = s / l[j][j];
        }
      }
    }
    if (ok) {
      // Renormalize rows so every PMU's regional process keeps unit variance.
      for (auto& row : l) {
        double norm = 0.0;
        for (double v : row) norm += v * v;
        norm = std::sqrt(norm);
        for (double& v : row) v /= norm;
      }
      return l;
    }
  }
  throw ValidationError("electrical_distance does not yield a usable regional covariance");
}

}  // namespace

std::vector<std::vector<double>> default_electrical_distance(int pmu_count) {
  std::vector<double> x(static_cast<std::size_t>(std::max(pmu_count, 0)));
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = i < kCorridor.size() ? kCorridor[i]
                                : kCorridor.back() + 0.3 * static_cast<double>(i + 1 - kCorridor.size());
  }
  std::vector<std::vector<double>> d(x.size(), std::vector<double>(x.size(), 0.0));
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < x.size(); ++j) d[i][j] = std::abs(x[i] - x[j]);
  }
  return d;
}

FleetConfig default_fleet_config() {
  FleetConfig c;
  c.electrical_distance = default_electrical_distance(c.pmu_count);
  auto set = [](ChannelArray& a, Parameter p, double v) { a[static_cast<std::size_t>(index_of(p))] = v; };
  set(c.noise_profile, Parameter::VPosMag, 3e-4);
  set(c.noise_profile, Parameter::VPosAng, 5e-4);
  set(c.noise_profile, Parameter::VNegMag, 2e-4);
  set(c.noise_profile, Parameter::VNegAng, 0.05);
  set(c.noise_profile, Parameter::VZeroMag, 2e-4);
  set(c.noise_profile, Parameter::VZeroAng, 0.05);
  set(c.noise_profile, Parameter::Freq, 3e-4);
  set(c.noise_profile, Parameter::Rocof, 1.2);

  set(c.common_mode_strength, Parameter::VPosMag, 0.75);
  set(c.common_mode_strength, Parameter::VPosAng, 1.0);
  set(c.common_mode_strength, Parameter::VNegMag, 0.2);
  set(c.common_mode_strength, Parameter::VNegAng, 0.2);
  set(c.common_mode_strength, Parameter::VZeroMag, 0.2);
  set(c.common_mode_strength, Parameter::VZeroAng, 0.2);
  set(c.common_mode_strength, Parameter::Freq, 0.9);
  set(c.common_mode_strength, Parameter::Rocof, 1.0);
  return c;
}

void validate(const FleetConfig& config) {
  if (config.pmu_count < 2) throw ValidationError("pmu_count must be >= 2");
  if (config.frames_per_second != kFramesPerSecond) {
    throw ValidationError("frames_per_second is fixed at 60");
  }
  if (config.minutes < 1) throw ValidationError("minutes must be >= 1");
  const auto n = static_cast<std::size_t>(config.pmu_count);
  const auto& d = config.electrical_distance;
  if (d.size() != n) throw ValidationError("electrical_distance must be pmu_count x pmu_count");
  for (std::size_t i = 0; i < n; ++i) {
    if (d[i].size() != n) throw ValidationError("electrical_distance must be pmu_count x pmu_count");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (d[i][i] != 0.0) throw ValidationError("electrical_distance diagonal must be zero");
    for (std::size_t j = 0; j < n; ++j) {
      if (d[i][j] != d[j][i]) throw ValidationError("electrical_distance must be symmetric");
      if (i != j && !(d[i][j] > 0.0)) {
        throw ValidationError("electrical_distance off-diagonal entries must be positive");
      }
    }
  }
  for (double s : config.common_mode_strength) {
    if (!(s >= 0.0 && s <= 1.0)) throw ValidationError("common_mode_strength must lie in [0, 1]");
  }
  for (double s : config.noise_profile) {
    if (!(s >= 0.0)) throw ValidationError("noise_profile entries must be nonnegative");
  }
}

MinuteDataset generate_minute(const FleetConfig& config, int minute_id) {
  validate(config);
  const auto& dyn = config.dynamics;
  const int p = config.pmu_count;
  const auto np = static_cast<std::size_t>(p);
  auto noise = [&](Parameter q) { return config.noise_profile[static_cast<std::size_t>(index_of(q))]; };
  auto common = [&](Parameter q) {
    return config.common_mode_strength[static_cast<std::size_t>(index_of(q))];
  };

  std::mt19937_64 rng(minute_seed(config.seed, minute_id));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  const auto mixing = regional_mixing(config.electrical_distance, dyn.regional_length);

  // Static per-PMU properties.
  std::vector<double> vpos_nominal(np), phase_offset(np), vneg_ratio(np), vzero_ratio(np);
  std::vector<double> vneg_angle0(np), vzero_angle0(np);
  for (std::size_t i = 0; i < np; ++i) {
    vpos_nominal[i] = 1.0 + 0.04 * (uniform(rng) - 0.5);
    phase_offset[i] = kPi * (2.0 * uniform(rng) - 1.0);
    vneg_ratio[i] = dyn.vneg_ratio_min + (dyn.vneg_ratio_max - dyn.vneg_ratio_min) * uniform(rng);
    vzero_ratio[i] = dyn.vzero_ratio_min + (dyn.vzero_ratio_max - dyn.vzero_ratio_min) * uniform(rng);
    vneg_angle0[i] = kPi * (2.0 * uniform(rng) - 1.0);
    vzero_angle0[i] = kPi * (2.0 * uniform(rng) - 1.0);
  }

  OuProcess f_slow(dyn.freq_slow_tau_s, dyn.freq_slow_sigma_hz);
  OuProcess f_fast(dyn.freq_fast_tau_s, dyn.freq_fast_sigma_hz);
  OuProcess v_slow(dyn.vpos_slow_tau_s, dyn.vpos_slow_sigma);
  OuProcess v_fast(dyn.vpos_fast_tau_s, dyn.vpos_fast_sigma);
  OuProcess neg_mag_common(dyn.unbalance_tau_s, dyn.unbalance_relative_sigma);
  OuProcess zero_mag_common(dyn.unbalance_tau_s, dyn.unbalance_relative_sigma);
  OuProcess neg_ang_common(dyn.unbalance_angle_tau_s, dyn.unbalance_angle_sigma);
  OuProcess zero_ang_common(dyn.unbalance_angle_tau_s, dyn.unbalance_angle_sigma);
  std::vector<OuProcess> f_regional(np, OuProcess(dyn.freq_regional_tau_s, dyn.freq_regional_sigma_hz));
  std::vector<OuProcess> v_regional(np, OuProcess(dyn.vpos_regional_tau_s, dyn.vpos_regional_sigma));
  std::vector<OuProcess> neg_mag(np, OuProcess(dyn.unbalance_tau_s, dyn.unbalance_relative_sigma));
  std::vector<OuProcess> zero_mag(np, OuProcess(dyn.unbalance_tau_s, dyn.unbalance_relative_sigma));
  std::vector<OuProcess> neg_ang(np, OuProcess(dyn.unbalance_angle_tau_s, dyn.unbalance_angle_sigma));
  std::vector<OuProcess> zero_ang(np, OuProcess(dyn.unbalance_angle_tau_s, dyn.unbalance_angle_sigma));

  auto all_processes = [&](auto&& fn) {
    fn(f_slow);
    fn(f_fast);
    fn(v_slow);
    fn(v_fast);
    fn(neg_mag_common);
    fn(zero_mag_common);
    fn(neg_ang_common);
    fn(zero_ang_common);
    for (std::size_t i = 0; i < np; ++i) {
      fn(f_regional[i]);
      fn(v_regional[i]);
      fn(neg_mag[i]);
      fn(zero_mag[i]);
      fn(neg_ang[i]);
      fn(zero_ang[i]);
    }
  };
  all_processes([&](OuProcess& proc) { proc.start(normal, rng); });

  const double sf = common(Parameter::Freq);
  const double sv = common(Parameter::VPosMag);
  const double s_neg_mag = common(Parameter::VNegMag);
  const double s_zero_mag = common(Parameter::VZeroMag);
  const double s_neg_ang = common(Parameter::VNegAng);
  const double s_zero_ang = common(Parameter::VZeroAng);

  MinuteDataset out;
  out.minute_id = minute_id;
  out.streams.assign(np, {});
  for (auto& s : out.streams) s.reserve(kCyclesPerMinute);

  std::vector<double> phase(phase_offset);
  std::vector<double> prev_freq(np, 0.0);
  std::vector<double> regional_f(np), regional_v(np);

  // Cycle -1 is a warm-up step that seeds the ROCOF difference.
  for (int cycle = -1; cycle < kCyclesPerMinute; ++cycle) {
    all_processes([&](OuProcess& proc) { proc.step(normal, rng); });
    for (std::size_t i = 0; i < np; ++i) {
      double rf = 0.0, rv = 0.0;
      for (std::size_t k = 0; k <= i; ++k) {
        rf += mixing[i][k] * f_regional[k].value();
        rv += mixing[i][k] * v_regional[k].value();
      }
      regional_f[i] = rf;
      regional_v[i] = rv;
    }
    const double f_common = f_slow.value() + f_fast.value();
    const double v_common = v_slow.value() + v_fast.value();

    for (std::size_t i = 0; i < np; ++i) {
      const double df = sf * f_common + (1.0 - sf) * regional_f[i];
      phase[i] += 2.0 * kPi * df * kDt;
      const double freq = 60.0 + df + noise(Parameter::Freq) * normal(rng);
      const double rocof = (freq - prev_freq[i]) * kFramesPerSecond + noise(Parameter::Rocof) * normal(rng);
      prev_freq[i] = freq;

      const double vpos = vpos_nominal[i] + sv * v_common + (1.0 - sv) * regional_v[i] +
                          noise(Parameter::VPosMag) * normal(rng);
      const double phi_pos = phase[i] + noise(Parameter::VPosAng) * normal(rng);

      const double neg_rel = s_neg_mag * neg_mag_common.value() + (1.0 - s_neg_mag) * neg_mag[i].value();
      const double zero_rel =
          s_zero_mag * zero_mag_common.value() + (1.0 - s_zero_mag) * zero_mag[i].value();
      const double vneg = std::max(0.0, vneg_ratio[i] * vpos * (1.0 + neg_rel) +
                                            noise(Parameter::VNegMag) * normal(rng));
      const double vzero = std::max(0.0, vzero_ratio[i] * vpos * (1.0 + zero_rel) +
                                             noise(Parameter::VZeroMag) * normal(rng));
      const double phi_neg = phase[i] + vneg_angle0[i] + s_neg_ang * neg_ang_common.value() +
                             (1.0 - s_neg_ang) * neg_ang[i].value() + noise(Parameter::VNegAng) * normal(rng);
      const double phi_zero = phase[i] + vzero_angle0[i] + s_zero_ang * zero_ang_common.value() +
                              (1.0 - s_zero_ang) * zero_ang[i].value() +
                              noise(Parameter::VZeroAng) * normal(rng);

      if (cycle < 0) continue;
      SequenceSet seq{Phasor(vpos, phi_pos), Phasor(vneg, phi_neg), Phasor(vzero, phi_zero)};
      const auto phases = inverse_fortescue(seq);
      PhasorFrame frame;
      frame.pmu_id = static_cast<int>(i);
      frame.cycle = cycle;
      frame.va = phases[0];
      frame.vb = phases[1];
      frame.vc = phases[2];
      frame.freq = freq;
      frame.rocof = rocof;
      out.streams[i].push_back(frame);
    }
  }
  return out;
}

std::vector<MinuteDataset> generate_fleet(const FleetConfig& config) {
  validate(config);
  std::vector<MinuteDataset> minutes(static_cast<std::size_t>(config.minutes));
  parallel_for(config.minutes, [&](std::int64_t m) {
    minutes[static_cast<std::size_t>(m)] = generate_minute(config, static_cast<int>(m) + 1);
  });
  return minutes;
}

}  // namespace phasor_sentinel
