#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <numbers>
#include <span>
#include <string_view>
#include <vector>

namespace phasor_sentinel {

inline constexpr double kPi = std::numbers::pi;

/// Wrap an angle into (-pi, pi].
double wrap_angle(double radians);

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Polar phasor. Magnitude is kept nonnegative and the angle normalized
/// into (-pi, pi] by every constructor and arithmetic operator.
class Phasor {
 public:
  Phasor() = default;
  Phasor(double magnitude, double angle_rad);

  static Phasor from_complex(std::complex<double> z);

  double magnitude() const { return magnitude_; }
  double angle() const { return angle_; }
  std::complex<double> to_complex() const { return std::polar(magnitude_, angle_); }

  Phasor operator+(const Phasor& other) const;
  Phasor operator-(const Phasor& other) const;
  Phasor operator*(double k) const;
  /// Rotate by theta radians.
  Phasor rotated(double theta) const { return Phasor(magnitude_, angle_ + theta); }

 private:
  double magnitude_ = 0.0;
  double angle_ = 0.0;
};

/// One PMU's measurements for one reporting cycle (60 frames/s).
struct PhasorFrame {
  int pmu_id = 0;
  std::int64_t cycle = 0;
  Phasor va, vb, vc;
  double freq = 60.0;   // Hz
  double rocof = 0.0;   // Hz/s
};

struct SequenceSet {
  Phasor v_pos, v_neg, v_zero;
};

/// The eight analysis channels, in the fixed report order.
enum class Parameter : int {
  VPosMag = 0,
  VPosAng,
  VNegMag,
  VNegAng,
  VZeroMag,
  VZeroAng,
  Freq,
  Rocof,
};

inline constexpr int kParameterCount = 8;

inline constexpr std::array<Parameter, kParameterCount> kAllParameters = {
    Parameter::VPosMag, Parameter::VPosAng, Parameter::VNegMag,  Parameter::VNegAng,
    Parameter::VZeroMag, Parameter::VZeroAng, Parameter::Freq, Parameter::Rocof};

constexpr int index_of(Parameter p) { return static_cast<int>(p); }

constexpr bool is_angle(Parameter p) {
  return p == Parameter::VPosAng || p == Parameter::VNegAng || p == Parameter::VZeroAng;
}

/// Short machine name: vpos_mag, vpos_ang, ..., freq, rocof.
std::string_view parameter_name(Parameter p);
/// Inverse of parameter_name; throws ValidationError on unknown names.
Parameter parse_parameter(std::string_view name);

/// Symmetrical components of a three-phase set (a = 1 at 120 degrees):
///   V0 = (Va + Vb + Vc) / 3
///   V+ = (Va + a Vb + a^2 Vc) / 3
///   V- = (Va + a^2 Vb + a Vc) / 3
SequenceSet fortescue(const Phasor& va, const Phasor& vb, const Phasor& vc);

/// Phase quantities from sequence components.
std::array<Phasor, 3> inverse_fortescue(const SequenceSet& seq);

double extract_channel(const PhasorFrame& frame, Parameter param);
double extract_channel(const PhasorFrame& frame, const SequenceSet& seq, Parameter param);

/// Cumulative unwrap: removes +-2pi jumps between consecutive samples.
std::vector<double> unwrap_angles(std::span<const double> wrapped);
void unwrap_in_place(std::span<double> angles);

/// Sample-at-a-time form of unwrap_in_place.
class AngleUnwrapper {
 public:
  double push(double raw);

 private:
  bool started_ = false;
  double prev_raw_ = 0.0;
  double offset_ = 0.0;
};

}  // namespace phasor_sentinel
