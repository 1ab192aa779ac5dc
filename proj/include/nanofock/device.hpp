#pragma once

// Device parameters: from beam, field, cavity and laser inputs to the rates
// entering the master equations. All frequencies and rates are angular (rad/s),
// all other quantities SI.

#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "nanofock/electrostatics.hpp"

namespace nanofock {

struct BeamSpec {
  double length = 0.0;       // m
  double kappa_tilde = 0.0;  // m, transverse scale (R/sqrt(2) for a nanotube)
  double sound_speed = 0.0;  // m/s
  double quality_factor = 0.0;
  std::optional<double> effective_mass;       // kg
  std::optional<double> linear_mass_density;  // kg/m
  std::optional<double> mode_shape_factor;    // int phi0^2 dy / L; defaults to the clamped-clamped value

  void validate() const;
};

/// Clamped-clamped fundamental mode, normalized to unit midpoint deflection.
double clamped_mode_shape(double y, double length);
/// int_0^L phi0^2 dy / L for the unit-midpoint normalization (about 0.3965).
double clamped_mode_shape_factor();

double cnt_radius(int n, int m);
/// Mass per length of an (n, m) single-walled nanotube from the graphene areal density.
double cnt_linear_mass_density(int n, int m);

double effective_mass(const BeamSpec& beam);
/// omega_m0 = c_s * kappa_tilde * (4.73 / L)^2.
double base_frequency(const BeamSpec& beam);
/// Quartic coefficient beta = 0.060 m* omega_m0^2 / kappa_tilde^2, N/m^3.
double duffing_coefficient(const BeamSpec& beam);
double zero_point_motion(const BeamSpec& beam, double omega_m);
/// lambda = 3 beta x_zpm^4 / hbar.
double nonlinearity_per_phonon(const BeamSpec& beam, double omega_m);

/// Either a direct factor zeta, a direct quadratic coefficient, or a field model.
struct SofteningSpec {
  std::optional<double> zeta;
  std::optional<double> quadratic;  // V_es,2 in N/m
  std::optional<FieldModel> field_model;
  Polarizability polarizability;

  void validate() const;
};

/// |V_es,2| at which the beam buckles: m* omega_m0^2 / 2.
double critical_quadratic(const BeamSpec& beam);
double softened_frequency_from_quadratic(const BeamSpec& beam, double quadratic);
double softened_frequency(const BeamSpec& beam, const SofteningSpec& softening);

struct CavitySpec {
  double finesse = 0.0;
  double round_trip_length = 0.0;  // m
  double refractive_index = 1.44;
  double wavelength = 0.0;  // m
  double waist = 0.0;       // m, a_c
  double surface_field_ratio = 0.0;
  double gap = 0.0;  // m
  std::optional<double> evanescent_decay;  // 1/m
  double external_coupling_fraction = 0.0;

  void validate() const;
};

/// kappa = 2 pi c / (n_r L_c F).
double cavity_linewidth(const CavitySpec& cavity);
/// Supplied value, else (2 pi / lambda) sqrt(n_r^2 - 1).
double evanescent_decay(const CavitySpec& cavity);
double optical_frequency(const CavitySpec& cavity);

struct CouplingEstimate {
  double value = 0.0;  // G_0, rad/s per m
  double correction_factor = 0.0;
  double mode_volume = 0.0;
  bool order_of_magnitude = true;
};

CouplingEstimate coupling_G0(const CavitySpec& cavity, double alpha_parallel, double length, double omega_optical);

/// Laser detuning, either absolute or pinned to a sideband +delta_n / -delta_n.
struct Detuning {
  enum class Kind { Absolute, Blue, Red };
  Kind kind = Kind::Absolute;
  double value = 0.0;  // rad/s, Absolute only
  std::size_t level = 0;

  static Detuning absolute(double value) { return {Kind::Absolute, value, 0}; }
  static Detuning blue(std::size_t n) { return {Kind::Blue, 0.0, n}; }
  static Detuning red(std::size_t n) { return {Kind::Red, 0.0, n}; }
  /// Parses "+delta_3", "-delta_1".
  static std::optional<Detuning> parse_symbolic(const std::string& text);

  double resolve(double omega_shifted, double lambda) const;
  std::string describe() const;
};

struct DriveSpec {
  double input_power = 0.0;  // W
  Detuning detuning;
  std::optional<double> laser_frequency;  // rad/s; defaults to the cavity optical frequency
  std::optional<double> coupling;         // |g_m|, rad/s; overrides the power-based estimate
};

struct EnhancedCoupling {
  std::complex<double> g;
  std::complex<double> alpha;
  double photon_number = 0.0;
};

/// g = 2 alpha x_zpm G0 with alpha = sqrt(P kappa_ex / hbar omega_L) / (Delta + i kappa/2).
EnhancedCoupling enhanced_coupling(double G0, double x_zpm, double kappa, double kappa_ex, double detuning,
                                   double input_power, double laser_frequency);

struct ElectrodeSpec {
  double diameter = 0.0;         // m
  double conductivity_2d = 0.0;  // 1/Ohm
  double misalignment = 0.0;     // rad
};

struct FinesseEstimate {
  double finesse = 0.0;
  double absorbed_ratio = 0.0;  // P_a / P_c
  double circulating_power = 0.0;
  double absorbed_power = 0.0;
};

/// Finesse with electrode absorption; `photon_number` and `laser_frequency` only feed the power estimate.
FinesseEstimate degraded_finesse(const CavitySpec& cavity, const ElectrodeSpec& electrode, double photon_number = 0.0,
                                 double laser_frequency = 0.0);

/// Bose number 1 / (exp(hbar omega / k_B T) - 1); zero at T = 0.
double thermal_occupancy(double temperature, double omega);

/// Values that replace derived ones, for reproducing quoted parameter sets.
struct ParameterOverrides {
  std::optional<double> omega_m;
  std::optional<double> lambda;
  std::optional<double> kappa;
};

struct DeviceSpec {
  BeamSpec beam;
  SofteningSpec softening;
  CavitySpec cavity;
  std::optional<ElectrodeSpec> electrode;
  std::vector<DriveSpec> lasers;
  std::optional<DriveSpec> probe;
  double temperature = 0.0;  // K
  ParameterOverrides overrides;
};

struct LaserParams {
  Detuning requested;
  double detuning = 0.0;  // rad/s
  double laser_frequency = 0.0;
  std::complex<double> alpha;
  double photon_number = 0.0;
  double G0 = 0.0;
  std::complex<double> g;
  bool coupling_from_power = false;
};

struct DerivedParams {
  double omega_m0 = 0.0;
  double omega_m = 0.0;
  double omega_m_shifted = 0.0;  // omega_m + lambda
  double lambda = 0.0;
  double gamma_m = 0.0;
  double kappa = 0.0;
  double x_zpm = 0.0;
  double beta = 0.0;
  double nbar = 0.0;
  double temperature = 0.0;
  double effective_mass = 0.0;
  double zeta = 1.0;
  double quadratic = 0.0;  // V_es,2
  std::optional<FinesseEstimate> finesse;
  std::vector<LaserParams> lasers;
  std::optional<LaserParams> probe;

  /// delta_n = omega_m' + lambda (n - 1).
  double transition_frequency(std::size_t n) const;
};

DerivedParams derive(const DeviceSpec& device);

/// Builds the drive-relevant parameters directly from quoted values.
struct QuotedParameters {
  double omega_m = 0.0;
  double lambda = 0.0;
  double kappa = 0.0;
  double quality_factor = 0.0;
  double temperature = 0.0;
  std::vector<std::pair<Detuning, double>> lasers;  // detuning, |g|
  std::optional<std::pair<Detuning, double>> probe;
};

DerivedParams derive_from_quoted(const QuotedParameters& quoted);

enum class CheckStatus { Pass, Warn, Fail };
std::string to_string(CheckStatus s);

/// Ratios at or below `pass` pass, at or below `warn` warn, above fail.
struct RegimeThresholds {
  double pass = 0.1;
  double warn = 0.5;
};

struct RegimeCheck {
  std::string name;
  std::string inequality;
  double ratio = 0.0;
  CheckStatus status = CheckStatus::Pass;
};

struct ValidationReport {
  std::vector<RegimeCheck> checks;
  RegimeThresholds thresholds;

  bool any_failed() const;
  const RegimeCheck& at(const std::string& name) const;
};

ValidationReport regime_check(const DerivedParams& derived, std::size_t n_max, RegimeThresholds thresholds = {});

}  // namespace nanofock
