#include <cmath>

#include "doctest.h"
#include "nanofock/constants.hpp"
#include "nanofock/device.hpp"
#include "nanofock/electrostatics.hpp"
#include "nanofock/error.hpp"

using namespace nanofock;
namespace c = nanofock::constants;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

BeamSpec nanotube_beam(double length) {
  BeamSpec b;
  b.length = length;
  b.kappa_tilde = cnt_radius(10, 0) / std::sqrt(2.0);
  b.sound_speed = 21000.0;
  b.quality_factor = 5e6;
  b.linear_mass_density = cnt_linear_mass_density(10, 0);
  return b;
}

CavitySpec toroid() {
  CavitySpec cav;
  cav.finesse = 3e6;
  cav.round_trip_length = 1.35e-3;
  cav.refractive_index = 1.44;
  cav.wavelength = 1.1e-6;
  cav.waist = 1.4e-6;
  cav.surface_field_ratio = 0.4;
  cav.gap = 50e-9;
  cav.external_coupling_fraction = 0.1;
  return cav;
}

DeviceSpec fig2_device() {
  DeviceSpec d;
  d.beam = nanotube_beam(1.0e-6);
  d.softening.zeta = 4.0;
  d.softening.polarizability = {142.0 * c::polarizability_unit_4pi_eps0_A2,
                                10.9 * c::polarizability_unit_4pi_eps0_A2};
  d.cavity = toroid();
  d.temperature = 0.020;
  for (auto det : {Detuning::blue(1), Detuning::red(2), Detuning::red(3)}) {
    DriveSpec s;
    s.detuning = det;
    s.coupling = kTwoPi * 21e3;
    d.lasers.push_back(s);
  }
  return d;
}

double khz(double omega) { return omega / kTwoPi / 1e3; }

}  // namespace

TEST_CASE("base frequency of the nanotube beam") {
  const BeamSpec b = nanotube_beam(1.0e-6);
  const double w0 = base_frequency(b);
  const double expected = 21000.0 * (0.39e-9 / std::sqrt(2.0)) * std::pow(4.73 / 1e-6, 2);
  CHECK(w0 == doctest::Approx(expected).epsilon(0.01));
  CHECK(w0 / kTwoPi / 1e6 == doctest::Approx(20.6).epsilon(0.01));
  CHECK(std::abs(w0 / 4.0 / kTwoPi - 5.23e6) < 0.05 * 5.23e6);
  CHECK(base_frequency(nanotube_beam(2.0e-6)) == doctest::Approx(w0 / 4.0).epsilon(1e-14));
}

TEST_CASE("mode shape normalization") {
  CHECK(clamped_mode_shape(0.5, 1.0) == doctest::Approx(1.0));
  CHECK(std::abs(clamped_mode_shape(0.0, 1.0)) < 1e-12);
  CHECK(std::abs(clamped_mode_shape(1.0, 1.0)) < 1e-9);
  CHECK(clamped_mode_shape_factor() == doctest::Approx(0.3965).epsilon(1e-3));
}

TEST_CASE("nonlinearity per phonon") {
  const BeamSpec b = nanotube_beam(1.0e-6);
  const double w0 = base_frequency(b);
  const double l1 = nonlinearity_per_phonon(b, w0);
  const double l4 = nonlinearity_per_phonon(b, w0 / 4.0);
  CHECK(l4 / l1 == doctest::Approx(16.0).epsilon(1e-12));
  CHECK(std::abs(khz(l4) - 209.0) < 0.1 * 209.0);
  const double m = effective_mass(b);
  const double closed = 0.045 * c::hbar * w0 * w0 / (m * b.kappa_tilde * b.kappa_tilde * std::pow(w0 / 4.0, 2));
  CHECK(l4 == doctest::Approx(closed).epsilon(1e-12));
  for (double z : {1.5, 2.0, 7.0}) {
    const double w = w0 / z;
    CHECK(nonlinearity_per_phonon(b, w) * w * w == doctest::Approx(l1 * w0 * w0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(nonlinearity_per_phonon(b, 0.0), ArgumentError);
}

TEST_CASE("moderate device frequency") {
  const BeamSpec b = nanotube_beam(1.7e-6);
  const double w = base_frequency(b) / 3.3;
  CHECK(std::abs(w / kTwoPi - 2.13e6) < 0.1 * 2.13e6);
}

TEST_CASE("softening and buckling") {
  const BeamSpec b = nanotube_beam(1.0e-6);
  const double w0 = base_frequency(b);
  const double m = effective_mass(b);
  SofteningSpec s;
  s.zeta = 4.0;
  CHECK(softened_frequency(b, s) == doctest::Approx(w0 / 4.0).epsilon(1e-15));
  CHECK(softened_frequency_from_quadratic(b, -0.375 * m * w0 * w0) == doctest::Approx(w0 / 2.0).epsilon(1e-12));
  const double crit = critical_quadratic(b);
  CHECK(crit == doctest::Approx(0.5 * m * w0 * w0).epsilon(1e-15));
  CHECK(softened_frequency_from_quadratic(b, -0.9999 * crit) == doctest::Approx(1e-2 * w0).epsilon(1e-9));

  double previous = w0;
  for (double f : {0.1, 0.5, 0.9, 0.99, 0.999999}) {
    const double w = softened_frequency_from_quadratic(b, -f * crit);
    CHECK(w < previous);
    CHECK(nonlinearity_per_phonon(b, w) > nonlinearity_per_phonon(b, previous));
    previous = w;
  }
  try {
    softened_frequency_from_quadratic(b, -crit);
    FAIL("expected a buckling error");
  } catch (const BucklingError& e) {
    CHECK(e.critical_quadratic() == doctest::Approx(crit));
  }
  CHECK_THROWS_AS(softened_frequency_from_quadratic(b, -1.5 * crit), BucklingError);
  CHECK_THROWS_AS(softened_frequency_from_quadratic(b, 1e-9), ArgumentError);
}

TEST_CASE("electrostatic expansion") {
  const BeamSpec b = nanotube_beam(1.0e-6);
  const Polarizability alpha{1e-30, 2e-31};

  const auto flat = [](double) { return AxialFieldSample{3e6, 0.0, 0.0}; };
  const auto e0 = electrostatic_quadratic(FieldModel(flat, flat), alpha, b);
  CHECK(e0.linear == 0.0);
  CHECK(e0.quadratic == 0.0);

  // E = E0 + e2 x^2 / 2 gives W = -(a/2)(E0^2 + E0 e2 x^2 + ...), so W'' = -a E0 e2 at x = 0.
  const double E0 = 2e6, e2 = 4e20;
  const auto curved = [=](double) { return AxialFieldSample{E0, 0.0, e2}; };
  const auto zero = [](double) { return AxialFieldSample{}; };
  const auto eq = electrostatic_quadratic(FieldModel(curved, zero), alpha, b);
  const double c_coeff = 0.5 * alpha.parallel * E0 * e2;
  CHECK(eq.quadratic == doctest::Approx(-c_coeff * clamped_mode_shape_factor() * b.length).epsilon(1e-8));
  CHECK(eq.linear == 0.0);

  const GaussianLobe lobe{1e7, 0.5e-6, 0.2e-6, 20e-9, 15e-9};
  const FieldModel field = FieldModel::gaussian_lobes({lobe}, {});
  const FieldModel tuned = tune_field_to_softening(field, alpha, b, 4.0);
  const double v2 = electrostatic_quadratic(tuned, alpha, b).quadratic;
  CHECK(-v2 == doctest::Approx((1.0 - 1.0 / 16.0) * critical_quadratic(b)).epsilon(1e-6));
  SofteningSpec s;
  s.field_model = tuned;
  s.polarizability = alpha;
  CHECK(softened_frequency(b, s) == doctest::Approx(base_frequency(b) / 4.0).epsilon(1e-6));
}

TEST_CASE("cavity linewidth") {
  CavitySpec cav = toroid();
  CHECK(std::abs(khz(cavity_linewidth(cav)) - 52.3) < 0.05 * 52.3);
  CHECK(khz(cavity_linewidth(cav)) == doctest::Approx(51.3).epsilon(0.01));
  const double k = cavity_linewidth(cav);
  cav.finesse /= 2.0;
  CHECK(cavity_linewidth(cav) == doctest::Approx(2.0 * k).epsilon(1e-15));
  cav.finesse = 2e6;
  cav.round_trip_length = 1.8e-3;
  CHECK(khz(cavity_linewidth(cav)) == doctest::Approx(57.9).epsilon(0.01));
}

TEST_CASE("optomechanical coupling") {
  CavitySpec cav = toroid();
  const double omega_l = optical_frequency(cav);
  const double a = 142.0 * c::polarizability_unit_4pi_eps0_A2;
  const double g0 = coupling_G0(cav, a, 1e-6, omega_l).value;
  CHECK(g0 > 0.0);
  cav.gap = 1.0;
  CHECK(coupling_G0(cav, a, 1e-6, omega_l).value == 0.0);

  cav = toroid();
  const double kperp = evanescent_decay(cav);
  CHECK(kperp == doctest::Approx(kTwoPi / 1.1e-6 * std::sqrt(1.44 * 1.44 - 1.0)));
  const double corr = std::sqrt((cav.gap + cav.waist) / (cav.gap + 0.5 / kperp + cav.waist));
  cav.gap += 0.5 / kperp;
  CHECK(coupling_G0(cav, a, 1e-6, omega_l).value == doctest::Approx(g0 * std::exp(-1.0) * corr).epsilon(1e-12));

  const double kappa = kTwoPi * 50e3;
  CHECK(std::abs(enhanced_coupling(g0, 1e-12, kappa, 0.1 * kappa, 0.0, 0.0, omega_l).g) == 0.0);
  const auto on = enhanced_coupling(g0, 1e-12, kappa, 0.1 * kappa, 0.0, 1e-3, omega_l);
  CHECK(on.photon_number == doctest::Approx(4.0 / (kappa * kappa) * 1e-3 * 0.1 * kappa / (c::hbar * omega_l)));
  const auto half = enhanced_coupling(g0, 1e-12, kappa, 0.1 * kappa, kappa / 2.0, 1e-3, omega_l);
  CHECK(half.photon_number == doctest::Approx(on.photon_number / 2.0));
  const auto quad = enhanced_coupling(g0, 1e-12, kappa, 0.1 * kappa, kappa, 4e-3, omega_l);
  const auto base = enhanced_coupling(g0, 1e-12, kappa, 0.1 * kappa, kappa, 1e-3, omega_l);
  CHECK(std::abs(quad.g) == doctest::Approx(2.0 * std::abs(base.g)));

  DeviceSpec dev = fig2_device();
  for (auto& l : dev.lasers) {
    l.coupling.reset();
    l.input_power = 1.2;
  }
  const DerivedParams d = derive(dev);
  for (const auto& l : d.lasers) {
    CHECK(l.coupling_from_power);
    CHECK(khz(std::abs(l.g)) > 21.0 / 3.0);
    CHECK(khz(std::abs(l.g)) < 21.0 * 3.0);
  }
}

TEST_CASE("electrode absorption") {
  const CavitySpec cav = toroid();
  const ElectrodeSpec el{10e-9, 2e-5, 1.0 * std::numbers::pi / 180.0};
  const auto f = degraded_finesse(cav, el);
  CHECK(f.absorbed_ratio / 2.0 < 1.0 / cav.finesse);
  CHECK(f.finesse < cav.finesse);
  CHECK(degraded_finesse(cav, {10e-9, 0.0, 0.1}).finesse == doctest::Approx(cav.finesse).epsilon(1e-15));
  CHECK(degraded_finesse(cav, {10e-9, 2e-5, 0.0}).absorbed_ratio == 0.0);
}

TEST_CASE("thermal occupancy") {
  const double w = kTwoPi * 5e6;
  CHECK(thermal_occupancy(0.0, w) == 0.0);
  const double t_ln2 = c::hbar * w / (c::boltzmann * std::log(2.0));
  CHECK(thermal_occupancy(t_ln2, w) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(thermal_occupancy(0.020, kTwoPi * 5.44e6) == doctest::Approx(76.1).epsilon(0.01));
  const double t_hot = 20.0 * c::hbar * w / c::boltzmann;
  CHECK(thermal_occupancy(t_hot, w) == doctest::Approx(20.0 - 0.5).epsilon(0.01));
  CHECK(thermal_occupancy(0.02, w) < thermal_occupancy(0.03, w));
  CHECK_THROWS_AS(thermal_occupancy(-1.0, w), ArgumentError);
}

TEST_CASE("symbolic detunings") {
  CHECK(Detuning::parse_symbolic("+delta_1")->kind == Detuning::Kind::Blue);
  CHECK(Detuning::parse_symbolic("-delta_3")->level == 3);
  CHECK_FALSE(Detuning::parse_symbolic("5 kHz").has_value());
  CHECK(Detuning::red(2).resolve(10.0, 1.0) == doctest::Approx(-11.0));
  CHECK(Detuning::blue(1).resolve(10.0, 1.0) == doctest::Approx(10.0));
}

TEST_CASE("derived device parameters") {
  const DerivedParams d = derive(fig2_device());
  CHECK(std::abs(d.omega_m / kTwoPi - 5.23e6) < 0.05 * 5.23e6);
  CHECK(std::abs(khz(d.lambda) - 209.0) < 0.1 * 209.0);
  CHECK(std::abs(khz(d.kappa) - 52.3) < 0.05 * 52.3);
  CHECK(d.omega_m_shifted == doctest::Approx(d.omega_m + d.lambda));
  CHECK(d.gamma_m == doctest::Approx(d.omega_m / 5e6));
  CHECK(d.nbar == doctest::Approx(76.0).epsilon(0.02));
  CHECK(d.lasers[0].detuning == doctest::Approx(d.transition_frequency(1)));
  CHECK(d.lasers[2].detuning == doctest::Approx(-d.transition_frequency(3)));
  CHECK(d.transition_frequency(3) - d.transition_frequency(2) == doctest::Approx(d.lambda));
}

TEST_CASE("regime checks") {
  QuotedParameters q;
  q.omega_m = kTwoPi * 5.23e6;
  q.lambda = kTwoPi * 209e3;
  q.kappa = kTwoPi * 52.3e3;
  q.quality_factor = 5e6;
  q.temperature = 0.020;
  for (auto det : {Detuning::blue(1), Detuning::red(2), Detuning::red(3)}) q.lasers.push_back({det, kTwoPi * 21e3});
  const auto base = regime_check(derive_from_quoted(q), 6);
  CHECK_FALSE(base.any_failed());
  CHECK(base.at("cavity_dominated_damping").ratio == doctest::Approx(0.009).epsilon(0.05));
  CHECK_THROWS_AS(base.at("missing"), ArgumentError);

  QuotedParameters strong = q;
  const double g = kTwoPi * 21e3;
  strong.lambda = g * g / q.kappa;
  const auto r = regime_check(derive_from_quoted(strong), 6);
  CHECK(r.at("strong_nonlinearity").status == CheckStatus::Fail);
  CHECK(r.at("rwa").status != CheckStatus::Fail);

  QuotedParameters wide = q;
  wide.kappa = q.omega_m;
  for (auto& l : wide.lasers) l.second = g * std::sqrt(wide.kappa / q.kappa);
  const auto rw = regime_check(derive_from_quoted(wide), 6);
  CHECK(rw.at("resolved_sideband").status == CheckStatus::Fail);
  CHECK(rw.at("cavity_dominated_damping").status == CheckStatus::Pass);

  CHECK_THROWS_AS(regime_check(derive_from_quoted(q), 6, {0.5, 0.1}), ArgumentError);
}
