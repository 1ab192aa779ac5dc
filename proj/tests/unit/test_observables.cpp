#include <algorithm>
#include <cmath>
#include <numbers>

#include <unsupported/Eigen/MatrixFunctions>

#include "doctest.h"
#include "nanofock/error.hpp"
#include "nanofock/spectrum.hpp"
#include "nanofock/wigner.hpp"

using namespace nanofock;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kTwoOverPi = 2.0 / std::numbers::pi;

DerivedParams fig2(double probe_detuning = 0.0, double lambda = kTwoPi * 209e3) {
  QuotedParameters q;
  q.omega_m = kTwoPi * 5.23e6;
  q.lambda = lambda;
  q.kappa = kTwoPi * 52.3e3;
  q.quality_factor = 5e6;
  q.temperature = 0.020;
  for (auto det : {Detuning::blue(1), Detuning::red(2), Detuning::red(3)}) q.lasers.push_back({det, kTwoPi * 21e3});
  q.probe = {Detuning::absolute(probe_detuning), kTwoPi * 2e3};
  return derive_from_quoted(q);
}

double alternating_sum(const std::vector<double>& p) {
  double s = 0.0;
  for (std::size_t n = 0; n < p.size(); ++n) s += (n % 2 == 0 ? 1.0 : -1.0) * p[n];
  return kTwoOverPi * s;
}

}  // namespace

TEST_CASE("wigner origin values") {
  CHECK(wigner_origin(std::vector<double>{1.0}) == doctest::Approx(kTwoOverPi).epsilon(1e-15));
  CHECK(wigner_origin(std::vector<double>{0.0, 1.0}) == doctest::Approx(-kTwoOverPi).epsilon(1e-15));
  const std::vector<double> p{0.1, 0.6, 0.2, 0.07, 0.03};
  CHECK(std::abs(wigner_origin(p) - alternating_sum(p)) < 1e-12);
  const auto w = wigner_from_populations(p, QuadratureGrid::for_levels(p.size()));
  CHECK(std::abs(w.origin_value - alternating_sum(p)) < 1e-12);
  CHECK_THROWS_AS(wigner_from_populations(std::vector<double>{0.5, 0.4}, QuadratureGrid{}), ArgumentError);
}

TEST_CASE("wigner radial profiles") {
  for (double r : {0.0, 0.3, 1.1, 2.5}) {
    const double g = std::exp(-2.0 * r * r);
    CHECK(wigner_radial(std::vector<double>{1.0}, r) == doctest::Approx(kTwoOverPi * g).epsilon(1e-13));
    // L_1(x) = 1 - x with x = 4 r^2.
    CHECK(wigner_radial(std::vector<double>{0.0, 1.0}, r) ==
          doctest::Approx(-kTwoOverPi * g * (1.0 - 4.0 * r * r)).epsilon(1e-13));
  }
  // Large-n stability: |W| never exceeds 2/pi.
  std::vector<double> p(200, 0.0);
  p[199] = 1.0;
  for (double r : {0.0, 1.0, 5.0, 7.05, 10.0}) CHECK(std::abs(wigner_radial(p, r)) <= kTwoOverPi + 1e-9);
}

TEST_CASE("wigner grid normalization") {
  const std::vector<double> vac{1.0};
  const auto w = wigner_from_populations(vac, QuadratureGrid::for_levels(1));
  CHECK(w.integral == doctest::Approx(1.0).epsilon(1e-3));
  CHECK_FALSE(w.warning.has_value());
  CHECK(w.values.maxCoeff() <= kTwoOverPi + 1e-9);

  const std::vector<double> p{0.027, 0.949, 0.0235, 0.0005};
  const auto wp = wigner_from_populations(p, QuadratureGrid::for_levels(p.size()));
  CHECK(std::abs(wp.integral - 1.0) < 1e-3);
  CHECK(wp.min_value == doctest::Approx(wp.origin_value));

  QuadratureGrid tiny = QuadratureGrid::square(0.5, 21);
  const auto wt = wigner_from_populations(vac, tiny);
  CHECK(wt.warning.has_value());
}

TEST_CASE("wigner from density matrices") {
  const FockSpace s(40, "m");
  const auto th = DensityMatrix::thermal(s, 1.0);
  const QuadratureGrid grid = QuadratureGrid::square(3.0, 41);
  const auto wt = wigner_from_density_matrix(th, grid);
  CHECK(wt.origin_value == doctest::Approx(kTwoOverPi / 3.0).epsilon(1e-10));
  const auto pops = th.populations();
  const auto wd = wigner_from_populations(pops, grid);
  CHECK((wt.values - wd.values).cwiseAbs().maxCoeff() < 1e-10);

  const std::complex<double> beta(0.8, -0.5);
  const DenseMatrix b = annihilation(s).to_dense();
  const DenseMatrix gen = beta * b.adjoint() - std::conj(beta) * b;
  ComplexVector vac = ComplexVector::Zero(40);
  vac(0) = 1.0;
  const ComplexVector psi = gen.exp() * vac;
  const auto wc = wigner_from_density_matrix(DensityMatrix::pure(CompositeSpace(s), psi), grid);
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.nx; ++i)
    for (std::size_t j = 0; j < grid.np; ++j) {
      const double dx = grid.x(i) - beta.real(), dp = grid.p(j) - beta.imag();
      const double exact = kTwoOverPi * std::exp(-2.0 * (dx * dx + dp * dp));
      worst = std::max(worst, std::abs(wc.values(static_cast<long>(i), static_cast<long>(j)) - exact));
    }
  CHECK(worst < 1e-9);
  CHECK(wc.min_value > -1e-9);

  const CompositeSpace two({FockSpace(2, "a"), FockSpace(2, "b")});
  CHECK_THROWS_AS(wigner_from_density_matrix(DensityMatrix(two, DenseMatrix::Identity(4, 4) / 4.0), grid),
                  ArgumentError);
}

TEST_CASE("linewidth formula") {
  RateTable t;
  t.delta.assign(5, 1.0);
  t.plus.assign(5, std::vector<double>{0.0});
  t.minus = t.plus;
  const double gamma = 0.3;
  auto g = linewidths(t, gamma, 0.0, 3);
  for (std::size_t n = 1; n <= 3; ++n) CHECK(g[n] == doctest::Approx(gamma * (2.0 * n - 1.0)));
  t.minus[1][0] = 2.5;
  g = linewidths(t, 0.0, 0.0, 2);
  CHECK(g[1] == doctest::Approx(2.5));
  CHECK(g[2] == doctest::Approx(2.5));
  CHECK_THROWS_AS(linewidths(t, 0.0, 0.0, 4), ArgumentError);

  const DerivedParams d = fig2();
  const RateTable r = transition_rates(d, d.lasers, 5);
  const auto gf = linewidths(r, d.gamma_m, d.nbar, 4);
  for (std::size_t n = 1; n <= 4; ++n) CHECK(gf[n] > 0.0);
  CHECK(gf[1] < 0.1 * d.lambda);
}

TEST_CASE("power spectrum structure") {
  const DerivedParams d = fig2();
  const std::vector<double> p{0.05, 0.9, 0.05};
  const auto grid = sideband_grid(d, p.size());
  const SpectrumData s = power_spectrum(p, d, grid);
  CHECK(s.peaks.size() == 2);
  CHECK(s.resolvable());
  CHECK(s.warnings.empty());
  for (double v : s.values) CHECK(v >= 0.0);
  CHECK(s.peaks[1].delta - s.peaks[0].delta == doctest::Approx(d.lambda));
  for (const auto& pk : s.peaks) CHECK(pk.probe_plus == doctest::Approx(pk.probe_minus).epsilon(1e-12));

  // Resonant probe: peak-height ratio gives the population ratio.
  CHECK(s.peaks[0].height_plus / s.peaks[0].height_minus == doctest::Approx(p[1] / p[0]).epsilon(1e-12));

  const std::vector<double> ground{1.0, 0.0, 0.0};
  const SpectrumData sg = power_spectrum(ground, d, grid);
  for (const auto& pk : sg.peaks) CHECK(pk.height_plus == 0.0);
  CHECK(sg.peaks[0].height_minus > 0.0);
  const double top = *std::max_element(sg.values.begin(), sg.values.end());
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (grid[i] > 0.0) CHECK(sg.values[i] < 1e-6 * top);

  const std::vector<double> q{0.3, 0.3, 0.4};
  std::vector<double> mix(3);
  for (int k = 0; k < 3; ++k) mix[k] = 0.25 * p[k] + 0.75 * q[k];
  const SpectrumData sp = power_spectrum(p, d, grid), sq = power_spectrum(q, d, grid), sm = power_spectrum(mix, d, grid);
  for (std::size_t i = 0; i < grid.size(); i += 97)
    CHECK(sm.values[i] == doctest::Approx(0.25 * sp.values[i] + 0.75 * sq.values[i]).epsilon(1e-12));

  DerivedParams none = d;
  none.probe.reset();
  CHECK_THROWS_AS(power_spectrum(p, none, grid), ArgumentError);
}

TEST_CASE("lorentzian weight integrates to 2 pi n A P") {
  const DerivedParams d = fig2();
  const std::vector<double> p{0.2, 0.8};
  const auto grid = sideband_grid(d, 2, 10, 400.0);
  const SpectrumData s = power_spectrum(p, d, grid);
  double plus = 0.0, minus = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double a = 0.5 * (s.values[i] + s.values[i - 1]) * (grid[i] - grid[i - 1]);
    if (grid[i - 1] > 0.0) plus += a;
    if (grid[i] < 0.0) minus += a;
  }
  const auto& pk = s.peaks[0];
  CHECK(plus == doctest::Approx(kTwoPi * pk.probe_minus * p[1]).epsilon(0.01));
  CHECK(minus == doctest::Approx(kTwoPi * pk.probe_plus * p[0]).epsilon(0.01));
}

TEST_CASE("spectrum inversion") {
  const DerivedParams d = fig2();
  const std::vector<double> p{0.05, 0.9, 0.05};
  const SpectrumData s = power_spectrum(p, d, sideband_grid(d, 3));
  const Reconstruction r = populations_from_spectrum(s);
  REQUIRE(r.populations.size() == 3);
  for (std::size_t n = 0; n < 3; ++n) CHECK(std::abs(r.populations[n] - p[n]) < 0.02);
  CHECK(r.highest_line == 2);
  CHECK(r.wigner_origin == doctest::Approx(wigner_origin(r.populations)));

  const std::vector<double> ground{1.0, 0.0};
  const Reconstruction rg = populations_from_spectrum(power_spectrum(ground, d, sideband_grid(d, 2)));
  REQUIRE(rg.populations.size() == 1);
  CHECK(rg.populations[0] == doctest::Approx(1.0));

  const DerivedParams off = fig2(kTwoPi * 20e3);
  const Reconstruction ro = populations_from_spectrum(power_spectrum(p, off, sideband_grid(off, 3)));
  CHECK_FALSE(ro.warnings.empty());
  for (std::size_t n = 0; n < 3; ++n) CHECK(std::abs(ro.populations[n] - p[n]) < 0.02);

  const DerivedParams blurred = fig2(0.0, kTwoPi * 10e3);
  const SpectrumData sb = power_spectrum(p, blurred, sideband_grid(blurred, 3));
  CHECK_FALSE(sb.resolvable());
  CHECK_THROWS_AS(populations_from_spectrum(sb), PreconditionError);

  SpectrumData coarse = power_spectrum(p, d, sideband_grid(d, 3, 2));
  std::vector<double> sparse_x, sparse_y;
  for (std::size_t i = 0; i < coarse.offsets.size(); i += 50) {
    sparse_x.push_back(coarse.offsets[i]);
    sparse_y.push_back(coarse.values[i]);
  }
  coarse.offsets = sparse_x;
  coarse.values = sparse_y;
  CHECK_THROWS_AS(populations_from_spectrum(coarse), PreconditionError);
}
