#include "nanofock/wigner.hpp"

#include <cmath>
#include <sstream>

#include "nanofock/constants.hpp"
#include "nanofock/error.hpp"

namespace nanofock {

QuadratureGrid QuadratureGrid::square(double r, std::size_t points) {
  return {-r, r, -r, r, points, points};
}

QuadratureGrid QuadratureGrid::for_levels(std::size_t levels, std::size_t points) {
  return square(4.0 + std::sqrt(static_cast<double>(levels)), points);
}

void QuadratureGrid::validate() const {
  if (nx < 2 || np < 2) throw ArgumentError("quadrature grid needs at least two points per axis");
  if (!(x_max > x_min) || !(p_max > p_min)) throw ArgumentError("quadrature grid ranges must be increasing");
}

double QuadratureGrid::dx() const { return (x_max - x_min) / static_cast<double>(nx - 1); }
double QuadratureGrid::dp() const { return (p_max - p_min) / static_cast<double>(np - 1); }
double QuadratureGrid::x(std::size_t i) const { return x_min + dx() * static_cast<double>(i); }
double QuadratureGrid::p(std::size_t j) const { return p_min + dp() * static_cast<double>(j); }

namespace {

void check_populations(std::span<const double> populations) {
  if (populations.empty()) throw ArgumentError("wigner: empty population vector");
  double total = 0.0;
  for (double v : populations) {
    if (!(v >= -1e-12)) throw ArgumentError("wigner: negative population");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ArgumentError("wigner: populations are not normalized");
}

void summarize(WignerData& w) {
  const auto& g = w.grid;
  w.min_value = w.values(0, 0);
  w.min_x = g.x(0);
  w.min_p = g.p(0);
  double sum = 0.0;
  for (std::size_t i = 0; i < g.nx; ++i)
    for (std::size_t j = 0; j < g.np; ++j) {
      const double v = w.values(static_cast<long>(i), static_cast<long>(j));
      if (v < w.min_value) {
        w.min_value = v;
        w.min_x = g.x(i);
        w.min_p = g.p(j);
      }
      const double wx = (i == 0 || i + 1 == g.nx) ? 0.5 : 1.0;
      const double wp = (j == 0 || j + 1 == g.np) ? 0.5 : 1.0;
      sum += wx * wp * v;
    }
  w.integral = sum * g.dx() * g.dp();
  if (std::abs(w.integral - 1.0) > 1e-3) {
    std::ostringstream msg;
    msg << "grid integral of W is " << w.integral << "; the grid is too coarse or too small for the state";
    w.warning = msg.str();
  }
}

}  // namespace

double wigner_origin(std::span<const double> populations) {
  double s = 0.0;
  for (std::size_t n = 0; n < populations.size(); ++n) s += (n % 2 == 0 ? 1.0 : -1.0) * populations[n];
  return 2.0 / constants::pi * s;
}

double wigner_radial(std::span<const double> populations, double r) {
  const double x = 4.0 * r * r;
  // Scaled Laguerre values e^{-x/2} L_n(x) stay bounded by 1.
  double prev = 0.0;
  double cur = std::exp(-0.5 * x);
  double s = populations.empty() ? 0.0 : populations[0] * cur;
  for (std::size_t n = 0; n + 1 < populations.size(); ++n) {
    const double dn = static_cast<double>(n);
    const double next = ((2.0 * dn + 1.0 - x) * cur - dn * prev) / (dn + 1.0);
    prev = cur;
    cur = next;
    s += ((n + 1) % 2 == 0 ? 1.0 : -1.0) * populations[n + 1] * cur;
  }
  return 2.0 / constants::pi * s;
}

WignerData wigner_from_populations(std::span<const double> populations, const QuadratureGrid& grid) {
  check_populations(populations);
  grid.validate();
  WignerData w;
  w.grid = grid;
  w.values.resize(static_cast<long>(grid.nx), static_cast<long>(grid.np));
  for (std::size_t i = 0; i < grid.nx; ++i)
    for (std::size_t j = 0; j < grid.np; ++j)
      w.values(static_cast<long>(i), static_cast<long>(j)) = wigner_radial(populations, std::hypot(grid.x(i), grid.p(j)));
  w.origin_value = wigner_origin(populations);
  summarize(w);
  return w;
}

WignerData wigner_from_density_matrix(const DensityMatrix& rho, const QuadratureGrid& grid) {
  if (rho.space().size() != 1) throw ArgumentError("wigner_from_density_matrix needs a single-mode state");
  const DenseMatrix& m = rho.matrix();
  if ((m - m.adjoint()).norm() > 1e-12 * std::max(1.0, m.norm()))
    throw ArgumentError("wigner_from_density_matrix: density matrix is not Hermitian");
  grid.validate();
  const long d = m.rows();
  std::vector<double> diag(static_cast<std::size_t>(d));
  for (long n = 0; n < d; ++n) diag[static_cast<std::size_t>(n)] = m(n, n).real();

  WignerData w;
  w.grid = grid;
  w.values.resize(static_cast<long>(grid.nx), static_cast<long>(grid.np));
  std::vector<Complex> list(static_cast<std::size_t>(d));
  std::vector<double> sq(static_cast<std::size_t>(d));
  for (long n = 0; n < d; ++n) sq[static_cast<std::size_t>(n)] = std::sqrt(static_cast<double>(n));
  // Iterative evaluation of the displaced-parity matrix elements, row by row of rho.
  for (std::size_t i = 0; i < grid.nx; ++i)
    for (std::size_t j = 0; j < grid.np; ++j) {
      const Complex a(grid.x(i), grid.p(j));
      list[0] = std::exp(-2.0 * std::norm(a)) / constants::pi;
      double s = m(0, 0).real() * list[0].real();
      for (long n = 1; n < d; ++n) {
        const auto un = static_cast<std::size_t>(n);
        list[un] = 2.0 * a * list[un - 1] / sq[un];
        s += 2.0 * (m(0, n) * list[un]).real();
      }
      for (long mm = 1; mm < d; ++mm) {
        const auto um = static_cast<std::size_t>(mm);
        Complex temp = list[um];
        list[um] = (2.0 * std::conj(a) * temp - sq[um] * list[um - 1]) / sq[um];
        s += (m(mm, mm) * list[um]).real();
        for (long n = mm + 1; n < d; ++n) {
          const auto un = static_cast<std::size_t>(n);
          const Complex temp2 = (2.0 * a * list[un - 1] - sq[um] * temp) / sq[un];
          temp = list[un];
          list[un] = temp2;
          s += 2.0 * (m(mm, n) * list[un]).real();
        }
      }
      w.values(static_cast<long>(i), static_cast<long>(j)) = 2.0 * s;
    }
  w.origin_value = wigner_origin(diag);
  summarize(w);
  return w;
}

}  // namespace nanofock
