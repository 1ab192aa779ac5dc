#include "nanofock/device.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <regex>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "nanofock/constants.hpp"
#include "nanofock/error.hpp"

namespace nanofock {

namespace c = constants;

namespace {
// Root of cos(x) cosh(x) = 1 for the clamped-clamped fundamental.
constexpr double kClampedRoot = 4.730040744862704;

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ArgumentError(std::string(what) + " must be positive");
}
}  // namespace

void BeamSpec::validate() const {
  require_positive(length, "beam length");
  require_positive(kappa_tilde, "beam kappa_tilde");
  require_positive(sound_speed, "beam sound_speed");
  require_positive(quality_factor, "beam quality_factor");
  if (!effective_mass && !linear_mass_density)
    throw ArgumentError("beam needs effective_mass or linear_mass_density");
  if (effective_mass) require_positive(*effective_mass, "beam effective_mass");
  if (linear_mass_density) require_positive(*linear_mass_density, "beam linear_mass_density");
  if (mode_shape_factor) require_positive(*mode_shape_factor, "beam mode_shape_factor");
  if (effective_mass && linear_mass_density) {
    const double from_density =
        mode_shape_factor.value_or(clamped_mode_shape_factor()) * *linear_mass_density * length;
    if (std::abs(from_density - *effective_mass) > 0.01 * *effective_mass)
      throw ArgumentError("beam effective_mass and linear_mass_density disagree by more than 1%");
  }
}

double clamped_mode_shape(double y, double length) {
  static const double sigma = (std::cosh(kClampedRoot) - std::cos(kClampedRoot)) /
                              (std::sinh(kClampedRoot) - std::sin(kClampedRoot));
  auto raw = [](double x) { return std::cosh(x) - std::cos(x) - sigma * (std::sinh(x) - std::sin(x)); };
  static const double midpoint = raw(0.5 * kClampedRoot);
  return raw(kClampedRoot * y / length) / midpoint;
}

double clamped_mode_shape_factor() {
  static const double factor = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [](double y) {
        const double phi = clamped_mode_shape(y, 1.0);
        return phi * phi;
      },
      0.0, 1.0, 15, 1e-14);
  return factor;
}

double cnt_radius(int n, int m) {
  if (n < 0 || m < 0 || n + m == 0) throw ArgumentError("invalid nanotube chirality");
  return c::graphene_lattice_constant * std::sqrt(static_cast<double>(n * n + n * m + m * m)) / (2.0 * c::pi);
}

double cnt_linear_mass_density(int n, int m) {
  // Two atoms per hexagonal cell of area (sqrt(3)/2) a^2.
  const double a = c::graphene_lattice_constant;
  const double areal_density = 2.0 * c::carbon_mass / (std::sqrt(3.0) / 2.0 * a * a);
  return 2.0 * c::pi * cnt_radius(n, m) * areal_density;
}

double effective_mass(const BeamSpec& beam) {
  if (beam.effective_mass) return *beam.effective_mass;
  if (!beam.linear_mass_density) throw ArgumentError("beam needs effective_mass or linear_mass_density");
  return beam.mode_shape_factor.value_or(clamped_mode_shape_factor()) * *beam.linear_mass_density * beam.length;
}

double base_frequency(const BeamSpec& beam) {
  const double k = 4.73 / beam.length;
  return beam.sound_speed * beam.kappa_tilde * k * k;
}

double duffing_coefficient(const BeamSpec& beam) {
  const double w0 = base_frequency(beam);
  return 0.060 * effective_mass(beam) * w0 * w0 / (beam.kappa_tilde * beam.kappa_tilde);
}

double zero_point_motion(const BeamSpec& beam, double omega_m) {
  return std::sqrt(c::hbar / (2.0 * effective_mass(beam) * omega_m));
}

double nonlinearity_per_phonon(const BeamSpec& beam, double omega_m) {
  require_positive(omega_m, "omega_m");
  const double x = zero_point_motion(beam, omega_m);
  return 3.0 * duffing_coefficient(beam) * x * x * x * x / c::hbar;
}

void SofteningSpec::validate() const {
  const int given = int(zeta.has_value()) + int(quadratic.has_value()) + int(field_model.has_value());
  if (given != 1) throw ArgumentError("softening needs exactly one of zeta, quadratic, field_model");
  if (zeta && !(*zeta >= 1.0)) throw ArgumentError("softening factor zeta must be >= 1");
}

double critical_quadratic(const BeamSpec& beam) {
  const double w0 = base_frequency(beam);
  return 0.5 * effective_mass(beam) * w0 * w0;
}

double softened_frequency_from_quadratic(const BeamSpec& beam, double quadratic) {
  if (quadratic > 0.0) throw ArgumentError("V_es,2 > 0 stiffens the beam; softening needs V_es,2 <= 0");
  const double critical = critical_quadratic(beam);
  if (-quadratic >= critical) {
    std::ostringstream msg;
    msg << "buckling instability: |V_es,2| = " << -quadratic << " N/m reaches the critical value " << critical
        << " N/m";
    throw BucklingError(msg.str(), critical);
  }
  const double w0 = base_frequency(beam);
  return w0 * std::sqrt(1.0 + quadratic / critical);
}

double softened_frequency(const BeamSpec& beam, const SofteningSpec& softening) {
  softening.validate();
  if (softening.zeta) return base_frequency(beam) / *softening.zeta;
  if (softening.quadratic) return softened_frequency_from_quadratic(beam, *softening.quadratic);
  const auto expansion = electrostatic_quadratic(*softening.field_model, softening.polarizability, beam);
  return softened_frequency_from_quadratic(beam, expansion.quadratic);
}

void CavitySpec::validate() const {
  require_positive(finesse, "cavity finesse");
  require_positive(round_trip_length, "cavity round_trip_length");
  require_positive(refractive_index, "cavity refractive_index");
  require_positive(wavelength, "cavity wavelength");
  require_positive(waist, "cavity waist");
  require_positive(surface_field_ratio, "cavity surface_field_ratio");
  require_positive(gap, "cavity gap");
  if (evanescent_decay) require_positive(*evanescent_decay, "cavity evanescent_decay");
  if (!(external_coupling_fraction > 0.0 && external_coupling_fraction <= 1.0))
    throw ArgumentError("cavity external_coupling_fraction must lie in (0, 1]");
}

double cavity_linewidth(const CavitySpec& cavity) {
  return 2.0 * c::pi * c::speed_of_light / (cavity.refractive_index * cavity.round_trip_length * cavity.finesse);
}

double evanescent_decay(const CavitySpec& cavity) {
  if (cavity.evanescent_decay) return *cavity.evanescent_decay;
  if (!(cavity.refractive_index > 1.0)) throw ArgumentError("evanescent decay needs refractive_index > 1");
  const double n = cavity.refractive_index;
  return 2.0 * c::pi / cavity.wavelength * std::sqrt(n * n - 1.0);
}

double optical_frequency(const CavitySpec& cavity) { return 2.0 * c::pi * c::speed_of_light / cavity.wavelength; }

CouplingEstimate coupling_G0(const CavitySpec& cavity, double alpha_parallel, double length, double omega_optical) {
  const double kperp = evanescent_decay(cavity);
  CouplingEstimate out;
  out.mode_volume = c::pi * cavity.waist * cavity.waist * cavity.round_trip_length;
  out.correction_factor = 0.17 / std::sqrt(kperp * (cavity.gap + cavity.waist));
  const double xi = cavity.surface_field_ratio;
  out.value = omega_optical * alpha_parallel * length / (c::epsilon0 * out.mode_volume) * xi * xi * kperp *
              std::exp(-2.0 * kperp * cavity.gap) * out.correction_factor;
  return out;
}

std::optional<Detuning> Detuning::parse_symbolic(const std::string& text) {
  static const std::regex pattern(R"(^\s*([+-])\s*delta_([1-9][0-9]*)\s*$)");
  std::smatch m;
  if (!std::regex_match(text, m, pattern)) return std::nullopt;
  const auto n = static_cast<std::size_t>(std::stoul(m[2].str()));
  return m[1].str() == "+" ? blue(n) : red(n);
}

double Detuning::resolve(double omega_shifted, double lambda) const {
  const double delta = omega_shifted + lambda * (static_cast<double>(level) - 1.0);
  switch (kind) {
    case Kind::Blue: return delta;
    case Kind::Red: return -delta;
    case Kind::Absolute: break;
  }
  return value;
}

std::string Detuning::describe() const {
  switch (kind) {
    case Kind::Blue: return "+delta_" + std::to_string(level);
    case Kind::Red: return "-delta_" + std::to_string(level);
    case Kind::Absolute: break;
  }
  std::ostringstream os;
  os.precision(17);
  os << value / (2.0 * c::pi) << " Hz";
  return os.str();
}

EnhancedCoupling enhanced_coupling(double G0, double x_zpm, double kappa, double kappa_ex, double detuning,
                                   double input_power, double laser_frequency) {
  if (input_power < 0.0) throw ArgumentError("input power must be >= 0");
  EnhancedCoupling out;
  if (input_power == 0.0) return out;
  const double drive = std::sqrt(input_power * kappa_ex / (c::hbar * laser_frequency));
  out.alpha = drive / std::complex<double>(detuning, kappa / 2.0);
  out.photon_number = std::norm(out.alpha);
  out.g = 2.0 * out.alpha * x_zpm * G0;
  return out;
}

FinesseEstimate degraded_finesse(const CavitySpec& cavity, const ElectrodeSpec& electrode, double photon_number,
                                 double laser_frequency) {
  if (electrode.diameter < 0.0 || electrode.conductivity_2d < 0.0 || electrode.misalignment < 0.0)
    throw ArgumentError("electrode parameters must be nonnegative");
  const double kperp = evanescent_decay(cavity);
  const double xi = cavity.surface_field_ratio;
  const double a = cavity.waist;
  FinesseEstimate out;
  out.absorbed_ratio = c::pi * electrode.conductivity_2d * electrode.diameter * xi * xi /
                       (c::speed_of_light * c::epsilon0 * a) * std::sqrt(c::pi / (kperp * a)) *
                       std::exp(-2.0 * kperp * cavity.gap) * std::sin(electrode.misalignment);
  out.finesse = 1.0 / (1.0 / cavity.finesse + out.absorbed_ratio / 2.0);
  out.circulating_power = photon_number * c::hbar * laser_frequency * c::speed_of_light /
                          (cavity.refractive_index * cavity.round_trip_length);
  out.absorbed_power = out.absorbed_ratio * out.circulating_power;
  return out;
}

double thermal_occupancy(double temperature, double omega) {
  if (temperature < 0.0) throw ArgumentError("temperature must be >= 0");
  if (temperature == 0.0) return 0.0;
  return 1.0 / std::expm1(c::hbar * omega / (c::boltzmann * temperature));
}

double DerivedParams::transition_frequency(std::size_t n) const {
  return omega_m_shifted + lambda * (static_cast<double>(n) - 1.0);
}

namespace {
LaserParams derive_laser(const DriveSpec& drive, const DerivedParams& d, const DeviceSpec& device, double kappa_ex,
                         double polarizability, std::size_t index, bool is_probe) {
  LaserParams out;
  out.requested = drive.detuning;
  out.detuning = drive.detuning.resolve(d.omega_m_shifted, d.lambda);
  out.laser_frequency = drive.laser_frequency.value_or(optical_frequency(device.cavity));
  const std::string who = is_probe ? std::string("probe") : "laser " + std::to_string(index + 1);
  if (polarizability > 0.0) out.G0 = coupling_G0(device.cavity, polarizability, device.beam.length, out.laser_frequency).value;
  if (drive.coupling) {
    if (*drive.coupling < 0.0) throw ArgumentError(who + ": coupling must be >= 0");
    out.g = *drive.coupling;
    const double per_photon = 2.0 * d.x_zpm * out.G0;
    if (per_photon > 0.0) {
      out.photon_number = std::pow(*drive.coupling / per_photon, 2);
      out.alpha = std::sqrt(out.photon_number);
    }
    return out;
  }
  if (!(out.G0 > 0.0) && drive.input_power > 0.0)
    throw ArgumentError(who + ": power-based coupling needs a parallel polarizability");
  const auto ec = enhanced_coupling(out.G0, d.x_zpm, d.kappa, kappa_ex, out.detuning, drive.input_power,
                                    out.laser_frequency);
  out.g = ec.g;
  out.alpha = ec.alpha;
  out.photon_number = ec.photon_number;
  out.coupling_from_power = true;
  return out;
}
}  // namespace

DerivedParams derive(const DeviceSpec& device) {
  device.beam.validate();
  device.cavity.validate();
  if (device.temperature < 0.0) throw ArgumentError("temperature must be >= 0");
  const auto& ov = device.overrides;

  DerivedParams d;
  d.temperature = device.temperature;
  d.omega_m0 = base_frequency(device.beam);
  d.effective_mass = effective_mass(device.beam);
  d.beta = duffing_coefficient(device.beam);
  d.omega_m = ov.omega_m ? *ov.omega_m : softened_frequency(device.beam, device.softening);
  require_positive(d.omega_m, "omega_m");
  d.zeta = d.omega_m0 / d.omega_m;
  d.quadratic = 0.5 * d.effective_mass * (d.omega_m * d.omega_m - d.omega_m0 * d.omega_m0);
  d.x_zpm = zero_point_motion(device.beam, d.omega_m);
  d.lambda = ov.lambda ? *ov.lambda : nonlinearity_per_phonon(device.beam, d.omega_m);
  d.omega_m_shifted = d.omega_m + d.lambda;
  d.nbar = thermal_occupancy(device.temperature, d.omega_m_shifted);
  d.gamma_m = d.omega_m / device.beam.quality_factor;
  d.kappa = ov.kappa ? *ov.kappa : cavity_linewidth(device.cavity);

  const double kappa_ex = device.cavity.external_coupling_fraction * d.kappa;
  const double alpha_par = device.softening.polarizability.parallel;
  for (std::size_t j = 0; j < device.lasers.size(); ++j)
    d.lasers.push_back(derive_laser(device.lasers[j], d, device, kappa_ex, alpha_par, j, false));
  if (device.probe) d.probe = derive_laser(*device.probe, d, device, kappa_ex, alpha_par, 0, true);

  if (device.electrode) {
    double photons = 0.0, weighted_frequency = 0.0;
    for (const auto& l : d.lasers) {
      photons += l.photon_number;
      weighted_frequency += l.photon_number * l.laser_frequency;
    }
    const double omega_l = photons > 0.0 ? weighted_frequency / photons : optical_frequency(device.cavity);
    d.finesse = degraded_finesse(device.cavity, *device.electrode, photons, omega_l);
  }
  return d;
}

DerivedParams derive_from_quoted(const QuotedParameters& q) {
  require_positive(q.omega_m, "omega_m");
  require_positive(q.kappa, "kappa");
  require_positive(q.quality_factor, "quality_factor");
  if (q.lambda < 0.0) throw ArgumentError("lambda must be >= 0");
  DerivedParams d;
  d.omega_m = q.omega_m;
  d.omega_m0 = q.omega_m;
  d.lambda = q.lambda;
  d.omega_m_shifted = q.omega_m + q.lambda;
  d.kappa = q.kappa;
  d.gamma_m = q.omega_m / q.quality_factor;
  d.temperature = q.temperature;
  d.nbar = thermal_occupancy(q.temperature, d.omega_m_shifted);
  auto make = [&](const std::pair<Detuning, double>& spec) {
    LaserParams l;
    l.requested = spec.first;
    l.detuning = spec.first.resolve(d.omega_m_shifted, d.lambda);
    l.g = spec.second;
    return l;
  };
  for (const auto& l : q.lasers) d.lasers.push_back(make(l));
  if (q.probe) d.probe = make(*q.probe);
  return d;
}

std::string to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Warn: return "warn";
    case CheckStatus::Fail: return "fail";
  }
  return "unknown";
}

bool ValidationReport::any_failed() const {
  return std::any_of(checks.begin(), checks.end(), [](const auto& c) { return c.status == CheckStatus::Fail; });
}

const RegimeCheck& ValidationReport::at(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return c;
  throw ArgumentError("no regime check named '" + name + "'");
}

ValidationReport regime_check(const DerivedParams& d, std::size_t n_max, RegimeThresholds thresholds) {
  if (!(thresholds.pass > 0.0 && thresholds.warn >= thresholds.pass))
    throw ArgumentError("regime thresholds must satisfy 0 < pass <= warn");
  ValidationReport report;
  report.thresholds = thresholds;
  auto add = [&](std::string name, std::string inequality, double ratio) {
    CheckStatus s = CheckStatus::Fail;
    if (ratio <= thresholds.pass) s = CheckStatus::Pass;
    else if (ratio <= thresholds.warn) s = CheckStatus::Warn;
    report.checks.push_back({std::move(name), std::move(inequality), ratio, s});
  };

  double g_max = 0.0;
  double g_min = std::numeric_limits<double>::infinity();
  for (const auto& l : d.lasers) {
    g_max = std::max(g_max, std::abs(l.g));
    g_min = std::min(g_min, std::abs(l.g));
  }
  const double inf = std::numeric_limits<double>::infinity();
  const double n = static_cast<double>(n_max);
  add("rwa", "n^2 lambda << 6 omega_m", n * n * d.lambda / (6.0 * d.omega_m));
  add("resolved_sideband", "kappa << omega_m", d.kappa / d.omega_m);
  const double weakest_cooling = d.lasers.empty() ? 0.0 : g_min * g_min / d.kappa;
  const double heating = d.nbar * d.gamma_m;
  add("cavity_dominated_damping", "nbar gamma_m << |g|^2 / kappa",
      weakest_cooling > 0.0 ? heating / weakest_cooling : (heating > 0.0 ? inf : 0.0));
  add("adiabatic_elimination", "|g| << kappa", g_max / d.kappa);
  add("strong_nonlinearity", "|g|^2 / kappa << lambda",
      d.lambda > 0.0 ? g_max * g_max / d.kappa / d.lambda : (g_max > 0.0 ? inf : 0.0));
  return report;
}

}  // namespace nanofock
