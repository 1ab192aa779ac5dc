#pragma once

// Probe output spectrum of the Fock-resolved sidebands and its inversion back
// to populations. Frequencies are stored as offsets omega - omega_L (rad/s).

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nanofock/liouvillian.hpp"

namespace nanofock {

/// Concatenates the laser columns of two tables built on the same delta_n.
RateTable merge_rate_tables(const RateTable& a, const RateTable& b);

/// Gamma_n for n = 1..n_max (index 0 unused) from total rates A_+-^n summed over lasers.
/// Needs rates up to level n_max + 1.
std::vector<double> linewidths(const RateTable& rates, double gamma_m, double nbar, std::size_t n_max);

struct SpectrumPeak {
  std::size_t n = 0;
  double delta = 0.0;  // peaks at offsets +delta (phonon removing) and -delta (phonon adding)
  double linewidth = 0.0;
  double probe_plus = 0.0;   // A_+^n of the probe
  double probe_minus = 0.0;  // A_-^n of the probe
  /// Own-line peak values: 4 n A_-^n P_n / Gamma_n and 4 n A_+^n P_{n-1} / Gamma_n.
  double height_plus = 0.0;
  double height_minus = 0.0;
};

struct SpectrumData {
  double laser_frequency = 0.0;
  std::vector<double> offsets;
  std::vector<double> values;
  std::vector<SpectrumPeak> peaks;
  /// lambda, used by the resolvability check.
  double line_spacing = 0.0;
  std::vector<std::string> warnings;

  /// True when lambda >= 3 Gamma_n for every tabulated line.
  bool resolvable() const;
};

struct SpectrumOptions {
  /// Adds the probe rates to Gamma_n.
  bool probe_in_linewidth = true;
};

/// Lorentzian sum on `offsets` for levels n = 1..P.size()-1.
SpectrumData power_spectrum(std::span<const double> populations, const DerivedParams& derived,
                            std::span<const double> offsets, const SpectrumOptions& options = {});

/// Two windows around -delta_n and +delta_n sampling the narrowest line with `points_per_linewidth` points.
std::vector<double> sideband_grid(const DerivedParams& derived, std::size_t levels, std::size_t points_per_linewidth = 10,
                                  double margin_linewidths = 40.0, const SpectrumOptions& options = {});

struct Reconstruction {
  std::vector<double> populations;
  std::vector<double> uncertainties;
  double wigner_origin = 0.0;
  std::size_t highest_line = 0;
  std::vector<std::string> warnings;
};

/// Deconvolves the peak values at the predicted centers, then chains the ratios
/// P_n / P_{n-1} = (S_n^+ / S_n^-) (A_+^n / A_-^n) and normalizes.
/// Throws PreconditionError when a used line violates lambda >= 3 Gamma_n.
Reconstruction populations_from_spectrum(const SpectrumData& spectrum, double detection_threshold = 1e-6);

}  // namespace nanofock
