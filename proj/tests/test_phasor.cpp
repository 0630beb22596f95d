#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "phasor_sentinel/error.hpp"
#include "phasor_sentinel/phasor.hpp"

using namespace phasor_sentinel;

namespace {

double deg(double d) { return deg_to_rad(d); }

void check_close(std::complex<double> got, std::complex<double> want, double tol) {
  CHECK(std::abs(got - want) <= tol);
}

}  // namespace

TEST_CASE("wrap_angle lands in (-pi, pi]") {
  CHECK(wrap_angle(kPi) == doctest::Approx(kPi));
  CHECK(wrap_angle(-kPi) == doctest::Approx(kPi));
  CHECK(wrap_angle(3 * kPi) == doctest::Approx(kPi));
  CHECK(wrap_angle(2 * kPi + 0.25) == doctest::Approx(0.25));
  CHECK(wrap_angle(-2 * kPi - 0.25) == doctest::Approx(-0.25));
  for (double a = -20.0; a < 20.0; a += 0.37) {
    const double w = wrap_angle(a);
    CHECK(w > -kPi);
    CHECK(w <= kPi);
    CHECK(std::abs(std::remainder(w - a, 2 * kPi)) < 1e-12);
  }
}

TEST_CASE("negative magnitude flips the angle") {
  Phasor p(-2.0, 0.5);
  CHECK(p.magnitude() == 2.0);
  CHECK(p.angle() == doctest::Approx(0.5 - kPi));
}

TEST_CASE("balanced set has only a positive-sequence component") {
  const auto s = fortescue(Phasor(1, 0), Phasor(1, deg(-120)), Phasor(1, deg(120)));
  CHECK(s.v_pos.magnitude() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(s.v_pos.angle()) < 1e-12);
  CHECK(s.v_neg.magnitude() < 1e-12);
  CHECK(s.v_zero.magnitude() < 1e-12);
}

TEST_CASE("common-mode set is pure zero sequence") {
  const auto s = fortescue(Phasor(1, 0.3), Phasor(1, 0.3), Phasor(1, 0.3));
  CHECK(s.v_zero.magnitude() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.v_zero.angle() == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(s.v_pos.magnitude() < 1e-12);
  CHECK(s.v_neg.magnitude() < 1e-12);
}

TEST_CASE("sagged phase b matches the complex-arithmetic oracle") {
  const Phasor va(1, 0), vb(0.9, deg(-120)), vc(1, deg(120));
  const auto s = fortescue(va, vb, vc);
  const auto o = oracle::fortescue(std::polar(1.0, 0.0), std::polar(0.9, deg(-120)), std::polar(1.0, deg(120)));
  check_close(s.v_pos.to_complex(), o.pos, 1e-12);
  check_close(s.v_neg.to_complex(), o.neg, 1e-12);
  check_close(s.v_zero.to_complex(), o.zero, 1e-12);
  // A 10% sag on one phase splits as 2/3 : 1/3 : 1/3 of the deficit.
  CHECK(s.v_pos.magnitude() == doctest::Approx(1.0 - 0.1 / 3).epsilon(1e-12));
  CHECK(s.v_neg.magnitude() == doctest::Approx(0.1 / 3).epsilon(1e-12));
  CHECK(s.v_zero.magnitude() == doctest::Approx(0.1 / 3).epsilon(1e-12));
}

TEST_CASE("random triples: oracle agreement and round trip") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> mag(0.1, 2.0), ang(-kPi, kPi);
  for (int t = 0; t < 10000; ++t) {
    const Phasor va(mag(rng), ang(rng)), vb(mag(rng), ang(rng)), vc(mag(rng), ang(rng));
    const auto s = fortescue(va, vb, vc);
    const auto o = oracle::fortescue(va.to_complex(), vb.to_complex(), vc.to_complex());
    check_close(s.v_pos.to_complex(), o.pos, 1e-12);
    check_close(s.v_neg.to_complex(), o.neg, 1e-12);
    check_close(s.v_zero.to_complex(), o.zero, 1e-12);
    const auto back = inverse_fortescue(s);
    check_close(back[0].to_complex(), va.to_complex(), 1e-12);
    check_close(back[1].to_complex(), vb.to_complex(), 1e-12);
    check_close(back[2].to_complex(), vc.to_complex(), 1e-12);
  }
}

TEST_CASE("rotation and scaling act on every sequence alike") {
  const Phasor va(1.1, 0.2), vb(0.8, -2.0), vc(0.95, 2.2);
  const auto base = fortescue(va, vb, vc);
  const double theta = 0.7, k = 2.5;
  const auto rot = fortescue(va.rotated(theta), vb.rotated(theta), vc.rotated(theta));
  const auto scaled = fortescue(va * k, vb * k, vc * k);
  const auto turn = std::polar(1.0, theta);
  check_close(rot.v_pos.to_complex(), base.v_pos.to_complex() * turn, 1e-12);
  check_close(rot.v_neg.to_complex(), base.v_neg.to_complex() * turn, 1e-12);
  check_close(rot.v_zero.to_complex(), base.v_zero.to_complex() * turn, 1e-12);
  CHECK(scaled.v_pos.magnitude() == doctest::Approx(k * base.v_pos.magnitude()).epsilon(1e-12));
  CHECK(scaled.v_neg.magnitude() == doctest::Approx(k * base.v_neg.magnitude()).epsilon(1e-12));
  CHECK(scaled.v_zero.magnitude() == doctest::Approx(k * base.v_zero.magnitude()).epsilon(1e-12));
}

TEST_CASE("phasor arithmetic matches complex arithmetic") {
  const Phasor a(1.2, 0.4), b(0.7, -2.9);
  check_close((a + b).to_complex(), a.to_complex() + b.to_complex(), 1e-14);
  check_close((a - b).to_complex(), a.to_complex() - b.to_complex(), 1e-14);
  const auto z = Phasor::from_complex({-1.0, -0.0});
  CHECK(z.angle() == doctest::Approx(kPi));
}

TEST_CASE("extract_channel") {
  PhasorFrame f;
  f.va = Phasor(1, deg(10));
  f.vb = Phasor(1, deg(-110));
  f.vc = Phasor(1, deg(130));
  f.freq = 60.02;
  f.rocof = -0.1;
  CHECK(extract_channel(f, Parameter::VPosMag) == doctest::Approx(1.0));
  CHECK(extract_channel(f, Parameter::VPosAng) == doctest::Approx(deg(10)));
  CHECK(extract_channel(f, Parameter::VNegMag) < 1e-12);
  CHECK(extract_channel(f, Parameter::Freq) == 60.02);
  CHECK(extract_channel(f, Parameter::Rocof) == -0.1);
}

TEST_CASE("parameter names round trip") {
  for (auto p : kAllParameters) CHECK(parse_parameter(parameter_name(p)) == p);
  CHECK(parameter_name(Parameter::VPosMag) == "vpos_mag");
  CHECK(parameter_name(Parameter::Rocof) == "rocof");
  CHECK_THROWS_AS(parse_parameter("phase_b"), ValidationError);
}

TEST_CASE("unwrap removes 2pi jumps") {
  // A steady ramp of 0.5 rad per sample, wrapped.
  std::vector<double> truth, wrapped;
  for (int k = 0; k < 200; ++k) {
    truth.push_back(-3.0 + 0.5 * k);
    wrapped.push_back(wrap_angle(truth.back()));
  }
  const auto un = unwrap_angles(wrapped);
  for (std::size_t k = 0; k < truth.size(); ++k) CHECK(un[k] == doctest::Approx(truth[k]).epsilon(1e-12));

  AngleUnwrapper u;
  for (std::size_t k = 0; k < truth.size(); ++k) CHECK(u.push(wrapped[k]) == un[k]);

  const std::vector<double> still = {0.1, 0.2, -0.1};
  CHECK(unwrap_angles(still) == still);
}
