#include "phasor_sentinel/phasor.hpp"

#include <cmath>
#include <string>

#include "phasor_sentinel/error.hpp"

namespace phasor_sentinel {

namespace {

const std::complex<double> kA = std::polar(1.0, 2.0 * kPi / 3.0);
const std::complex<double> kA2 = kA * kA;

constexpr std::array<std::string_view, kParameterCount> kNames = {
    "vpos_mag", "vpos_ang", "vneg_mag", "vneg_ang", "vzero_mag", "vzero_ang", "freq", "rocof"};

}  // namespace

double wrap_angle(double radians) {
  if (radians > -kPi && radians <= kPi) return radians;
  double w = std::remainder(radians, 2.0 * kPi);  // [-pi, pi]
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

Phasor::Phasor(double magnitude, double angle_rad) {
  if (magnitude < 0.0) {
    magnitude = -magnitude;
    angle_rad += kPi;
  }
  magnitude_ = magnitude;
  angle_ = wrap_angle(angle_rad);
}

Phasor Phasor::from_complex(std::complex<double> z) { return Phasor(std::abs(z), std::arg(z)); }

Phasor Phasor::operator+(const Phasor& other) const {
  return from_complex(to_complex() + other.to_complex());
}

Phasor Phasor::operator-(const Phasor& other) const {
  return from_complex(to_complex() - other.to_complex());
}

Phasor Phasor::operator*(double k) const { return Phasor(magnitude_ * k, angle_); }

std::string_view parameter_name(Parameter p) { return kNames[static_cast<std::size_t>(index_of(p))]; }

Parameter parse_parameter(std::string_view name) {
  for (int i = 0; i < kParameterCount; ++i) {
    if (kNames[static_cast<std::size_t>(i)] == name) return static_cast<Parameter>(i);
  }
  throw ValidationError("unknown parameter '" + std::string(name) + "'");
}

SequenceSet fortescue(const Phasor& va, const Phasor& vb, const Phasor& vc) {
  const auto a = va.to_complex();
  const auto b = vb.to_complex();
  const auto c = vc.to_complex();
  SequenceSet seq;
  seq.v_zero = Phasor::from_complex((a + b + c) / 3.0);
  seq.v_pos = Phasor::from_complex((a + kA * b + kA2 * c) / 3.0);
  seq.v_neg = Phasor::from_complex((a + kA2 * b + kA * c) / 3.0);
  return seq;
}

std::array<Phasor, 3> inverse_fortescue(const SequenceSet& seq) {
  const auto z = seq.v_zero.to_complex();
  const auto p = seq.v_pos.to_complex();
  const auto n = seq.v_neg.to_complex();
  return {Phasor::from_complex(z + p + n), Phasor::from_complex(z + kA2 * p + kA * n),
          Phasor::from_complex(z + kA * p + kA2 * n)};
}

double extract_channel(const PhasorFrame& frame, const SequenceSet& seq, Parameter param) {
  switch (param) {
    case Parameter::VPosMag: return seq.v_pos.magnitude();
    case Parameter::VPosAng: return seq.v_pos.angle();
    case Parameter::VNegMag: return seq.v_neg.magnitude();
    case Parameter::VNegAng: return seq.v_neg.angle();
    case Parameter::VZeroMag: return seq.v_zero.magnitude();
    case Parameter::VZeroAng: return seq.v_zero.angle();
    case Parameter::Freq: return frame.freq;
    case Parameter::Rocof: return frame.rocof;
  }
  return 0.0;
}

double extract_channel(const PhasorFrame& frame, Parameter param) {
  if (param == Parameter::Freq) return frame.freq;
  if (param == Parameter::Rocof) return frame.rocof;
  return extract_channel(frame, fortescue(frame.va, frame.vb, frame.vc), param);
}

double AngleUnwrapper::push(double raw) {
  if (started_) {
    const double jump = raw - prev_raw_;
    if (std::abs(jump) > kPi) offset_ -= 2.0 * kPi * std::round(jump / (2.0 * kPi));
  }
  started_ = true;
  prev_raw_ = raw;
  return raw + offset_;
}

void unwrap_in_place(std::span<double> angles) {
  AngleUnwrapper u;
  for (double& a : angles) a = u.push(a);
}

std::vector<double> unwrap_angles(std::span<const double> wrapped) {
  std::vector<double> out(wrapped.begin(), wrapped.end());
  unwrap_in_place(out);
  return out;
}

}  // namespace phasor_sentinel
