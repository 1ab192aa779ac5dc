#pragma once

// Wigner quasiprobability in the alpha-plane convention: the grid coordinates are
// x = Re(alpha), p = Im(alpha), the vacuum is (2/pi) exp(-2|alpha|^2) and |W| <= 2/pi.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nanofock/fock.hpp"

namespace nanofock {

struct QuadratureGrid {
  double x_min = -4.0;
  double x_max = 4.0;
  double p_min = -4.0;
  double p_max = 4.0;
  std::size_t nx = 161;
  std::size_t np = 161;

  /// Square grid on [-r, r]^2 with `points` samples per axis.
  static QuadratureGrid square(double r, std::size_t points);
  /// Square grid reaching r = 4 + sqrt(levels), wide enough for the normalization check.
  static QuadratureGrid for_levels(std::size_t levels, std::size_t points = 161);

  void validate() const;
  double dx() const;
  double dp() const;
  double x(std::size_t i) const;
  double p(std::size_t j) const;
};

struct WignerData {
  QuadratureGrid grid;
  /// values(i, j) = W(x_i, p_j).
  Eigen::MatrixXd values;
  double origin_value = 0.0;
  double min_value = 0.0;
  double min_x = 0.0;
  double min_p = 0.0;
  /// Trapezoidal integral over the grid.
  double integral = 0.0;
  /// Set when the integral misses 1 by more than 1e-3.
  std::optional<std::string> warning;
};

/// (2/pi) sum_n (-1)^n P_n.
double wigner_origin(std::span<const double> populations);

/// W at radius r for a Fock-diagonal state, via the Laguerre recurrence with exp(-2 r^2) folded in.
double wigner_radial(std::span<const double> populations, double r);

WignerData wigner_from_populations(std::span<const double> populations, const QuadratureGrid& grid);

/// General single-mode state; reduces to the population path when rho is diagonal.
WignerData wigner_from_density_matrix(const DensityMatrix& rho, const QuadratureGrid& grid);

}  // namespace nanofock
