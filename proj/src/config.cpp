#include "nanofock/config.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include <openssl/evp.h>

#include "nanofock/constants.hpp"
#include "nanofock/error.hpp"

namespace nanofock {

using nlohmann::json;
namespace c = constants;

std::string to_string(Dimension d) {
  switch (d) {
    case Dimension::Length: return "length";
    case Dimension::InverseLength: return "inverse length";
    case Dimension::AngularFrequency: return "frequency";
    case Dimension::Power: return "power";
    case Dimension::Temperature: return "temperature";
    case Dimension::Mass: return "mass";
    case Dimension::LinearDensity: return "linear mass density";
    case Dimension::Speed: return "speed";
    case Dimension::Stiffness: return "stiffness";
    case Dimension::Conductance: return "conductance";
    case Dimension::Angle: return "angle";
    case Dimension::Polarizability: return "polarizability per length";
    case Dimension::ElectricField: return "electric field";
  }
  return "unknown";
}

double polarizability_unit_factor() { return c::polarizability_unit_4pi_eps0_A2; }

namespace {

const std::map<std::string, double>& unit_table(Dimension d) {
  static const std::map<Dimension, std::map<std::string, double>> tables = {
      {Dimension::Length,
       {{"m", 1.0}, {"cm", 1e-2}, {"mm", 1e-3}, {"um", 1e-6}, {"µm", 1e-6}, {"nm", 1e-9}, {"pm", 1e-12},
        {"A", 1e-10}, {"Å", 1e-10}}},
      {Dimension::InverseLength, {{"1/m", 1.0}, {"1/mm", 1e3}, {"1/um", 1e6}, {"1/µm", 1e6}, {"1/nm", 1e9}}},
      {Dimension::AngularFrequency,
       {{"Hz", c::two_pi}, {"kHz", c::two_pi * 1e3}, {"MHz", c::two_pi * 1e6}, {"GHz", c::two_pi * 1e9},
        {"THz", c::two_pi * 1e12}, {"rad/s", 1.0}, {"krad/s", 1e3}, {"Mrad/s", 1e6}}},
      {Dimension::Power, {{"W", 1.0}, {"mW", 1e-3}, {"uW", 1e-6}, {"µW", 1e-6}, {"nW", 1e-9}, {"pW", 1e-12}}},
      {Dimension::Temperature, {{"K", 1.0}, {"mK", 1e-3}, {"uK", 1e-6}, {"µK", 1e-6}}},
      {Dimension::Mass, {{"kg", 1.0}, {"g", 1e-3}}},
      {Dimension::LinearDensity, {{"kg/m", 1.0}}},
      {Dimension::Speed, {{"m/s", 1.0}, {"km/s", 1e3}}},
      {Dimension::Stiffness, {{"N/m", 1.0}}},
      {Dimension::Conductance, {{"S", 1.0}, {"1/Ohm", 1.0}}},
      {Dimension::Angle, {{"rad", 1.0}, {"mrad", 1e-3}, {"deg", c::pi / 180.0}}},
      {Dimension::Polarizability,
       {{"F*m", 1.0}, {"4pi_eps0_A2", c::polarizability_unit_4pi_eps0_A2},
        {"4pi_eps0*A^2", c::polarizability_unit_4pi_eps0_A2}}},
      {Dimension::ElectricField, {{"V/m", 1.0}, {"kV/m", 1e3}, {"MV/m", 1e6}}},
  };
  return tables.at(d);
}

std::string unit_list(Dimension d) {
  std::string out;
  for (const auto& [name, factor] : unit_table(d)) out += (out.empty() ? "" : ", ") + name;
  return out;
}

std::string join(const std::string& base, const std::string& key) { return base.empty() ? key : base + "." + key; }

// Strict view of a JSON object: every key must be consumed.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_, "expected an object");
  }

  const std::string& path() const { return path_; }
  std::string path(const std::string& key) const { return join(path_, key); }
  bool has(const std::string& key) const { return j_.contains(key); }

  const json& raw(const std::string& key) {
    used_.insert(key);
    if (!j_.contains(key)) throw ConfigError(path(key), "required field is missing");
    return j_.at(key);
  }
  const json* optional_raw(const std::string& key) {
    if (!j_.contains(key)) return nullptr;
    used_.insert(key);
    return &j_.at(key);
  }

  double quantity(const std::string& key, Dimension d) { return to_quantity(raw(key), d, path(key)); }
  std::optional<double> optional_quantity(const std::string& key, Dimension d) {
    const json* v = optional_raw(key);
    if (!v) return std::nullopt;
    return to_quantity(*v, d, path(key));
  }
  double number(const std::string& key) { return to_number(raw(key), path(key)); }
  double number_or(const std::string& key, double fallback) {
    const json* v = optional_raw(key);
    return v ? to_number(*v, path(key)) : fallback;
  }
  std::size_t count_or(const std::string& key, std::size_t fallback) {
    const json* v = optional_raw(key);
    if (!v) return fallback;
    if (!v->is_number_integer() || v->get<long long>() < 0)
      throw ConfigError(path(key), "expected a non-negative integer");
    return static_cast<std::size_t>(v->get<long long>());
  }
  bool flag_or(const std::string& key, bool fallback) {
    const json* v = optional_raw(key);
    if (!v) return fallback;
    if (!v->is_boolean()) throw ConfigError(path(key), "expected true or false");
    return v->get<bool>();
  }
  std::string text(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_string()) throw ConfigError(path(key), "expected a string");
    return v.get<std::string>();
  }

  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!used_.count(key)) throw ConfigError(path(key), "unknown field");
  }

  static double to_quantity(const json& v, Dimension d, const std::string& path) {
    if (v.is_number())
      throw ConfigError(path, "bare number not accepted for a " + to_string(d) + "; write it with a unit (" +
                                  unit_list(d) + ")");
    if (!v.is_string()) throw ConfigError(path, "expected a quantity string such as \"5.23 MHz\"");
    return parse_quantity(v.get<std::string>(), d, path);
  }
  static double to_number(const json& v, const std::string& path) {
    if (!v.is_number()) throw ConfigError(path, "expected a dimensionless number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(path, "expected a finite number");
    return x;
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

template <class F>
auto guarded(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const ArgumentError& e) {
    throw ConfigError(path, e.what());
  }
}

BeamSpec parse_beam(Section s) {
  BeamSpec b;
  std::optional<std::pair<int, int>> chirality;
  if (const json* ch = s.optional_raw("chirality")) {
    if (!ch->is_array() || ch->size() != 2 || !(*ch)[0].is_number_integer() || !(*ch)[1].is_number_integer())
      throw ConfigError(s.path("chirality"), "expected [n, m]");
    chirality = std::make_pair((*ch)[0].get<int>(), (*ch)[1].get<int>());
    if (chirality->first < 0 || chirality->second < 0 || chirality->first + chirality->second == 0)
      throw ConfigError(s.path("chirality"), "indices must be non-negative and not both zero");
  }
  b.length = s.quantity("length", Dimension::Length);
  b.sound_speed = s.quantity("sound_speed", Dimension::Speed);
  b.quality_factor = s.number("quality_factor");
  if (auto kt = s.optional_quantity("kappa_tilde", Dimension::Length)) {
    b.kappa_tilde = *kt;
  } else if (chirality) {
    b.kappa_tilde = cnt_radius(chirality->first, chirality->second) / std::sqrt(2.0);
  } else {
    throw ConfigError(s.path("kappa_tilde"), "required unless chirality is given");
  }
  b.effective_mass = s.optional_quantity("effective_mass", Dimension::Mass);
  b.linear_mass_density = s.optional_quantity("linear_mass_density", Dimension::LinearDensity);
  if (!b.linear_mass_density && chirality) b.linear_mass_density = cnt_linear_mass_density(chirality->first, chirality->second);
  if (const json* f = s.optional_raw("mode_shape_factor")) b.mode_shape_factor = Section::to_number(*f, s.path("mode_shape_factor"));
  s.finish();
  guarded(s.path(), [&] { b.validate(); return 0; });
  return b;
}

GaussianLobe parse_lobe(Section s) {
  GaussianLobe g;
  g.peak_field = s.quantity("peak_field", Dimension::ElectricField);
  g.center = s.quantity("center", Dimension::Length);
  g.axial_width = s.quantity("axial_width", Dimension::Length);
  g.transverse_offset = s.quantity("transverse_offset", Dimension::Length);
  g.transverse_width = s.quantity("transverse_width", Dimension::Length);
  s.finish();
  if (!(g.axial_width > 0.0) || !(g.transverse_width > 0.0))
    throw ConfigError(s.path(), "lobe widths must be positive");
  return g;
}

std::vector<GaussianLobe> parse_lobes(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path, "expected a list of lobes");
  std::vector<GaussianLobe> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(parse_lobe(Section(v[i], path + "[" + std::to_string(i) + "]")));
  return out;
}

std::vector<double> si_array(const json& v, const std::string& path, std::size_t expected) {
  if (!v.is_array()) throw ConfigError(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(Section::to_number(v[i], path + "[" + std::to_string(i) + "]"));
  if (expected && out.size() != expected) throw ConfigError(path, "length must match the y grid");
  return out;
}

SampledAxialField parse_samples(Section s, const std::vector<double>& y) {
  SampledAxialField f;
  f.y = y;
  const auto value = si_array(s.raw("value"), s.path("value"), y.size());
  const auto d1 = si_array(s.raw("d1"), s.path("d1"), y.size());
  const auto d2 = si_array(s.raw("d2"), s.path("d2"), y.size());
  s.finish();
  for (std::size_t i = 0; i < y.size(); ++i) f.samples.push_back({value[i], d1[i], d2[i]});
  return f;
}

FieldModel parse_field_model(Section s, const BeamSpec& beam, const Polarizability& alpha) {
  const bool lobes = s.has("gaussian_lobes");
  const bool sampled = s.has("sampled");
  if (lobes == sampled) throw ConfigError(s.path(), "give exactly one of gaussian_lobes or sampled");
  std::optional<FieldModel> model;
  if (lobes) {
    Section g(s.raw("gaussian_lobes"), s.path("gaussian_lobes"));
    auto par = g.optional_raw("parallel");
    auto perp = g.optional_raw("perpendicular");
    g.finish();
    model = FieldModel::gaussian_lobes(par ? parse_lobes(*par, g.path("parallel")) : std::vector<GaussianLobe>{},
                                       perp ? parse_lobes(*perp, g.path("perpendicular")) : std::vector<GaussianLobe>{});
  } else {
    Section g(s.raw("sampled"), s.path("sampled"));
    if (g.text("units") != "SI")
      throw ConfigError(g.path("units"), "sampled fields must declare \"units\": \"SI\" (m, V/m, V/m^2, V/m^3)");
    const auto y = si_array(g.raw("y"), g.path("y"), 0);
    if (y.size() < 2 || !std::is_sorted(y.begin(), y.end())) throw ConfigError(g.path("y"), "need an increasing grid");
    const auto par = parse_samples(Section(g.raw("parallel"), g.path("parallel")), y);
    const auto perp = parse_samples(Section(g.raw("perpendicular"), g.path("perpendicular")), y);
    g.finish();
    model = FieldModel::sampled(par, perp);
  }
  if (const json* z = s.optional_raw("tune_to_zeta")) {
    const double zeta = Section::to_number(*z, s.path("tune_to_zeta"));
    model = guarded(s.path("tune_to_zeta"), [&] { return tune_field_to_softening(*model, alpha, beam, zeta); });
  }
  s.finish();
  return *model;
}

SofteningSpec parse_softening(Section s, const BeamSpec& beam) {
  SofteningSpec out;
  if (const json* p = s.optional_raw("polarizability")) {
    Section ps(*p, s.path("polarizability"));
    out.polarizability.parallel = ps.quantity("parallel", Dimension::Polarizability);
    out.polarizability.perpendicular = ps.quantity("perpendicular", Dimension::Polarizability);
    ps.finish();
  }
  if (const json* z = s.optional_raw("zeta")) out.zeta = Section::to_number(*z, s.path("zeta"));
  out.quadratic = s.optional_quantity("quadratic", Dimension::Stiffness);
  if (const json* f = s.optional_raw("field_model"))
    out.field_model = parse_field_model(Section(*f, s.path("field_model")), beam, out.polarizability);
  s.finish();
  guarded(s.path(), [&] { out.validate(); return 0; });
  return out;
}

CavitySpec parse_cavity(Section s) {
  CavitySpec cv;
  cv.finesse = s.number("finesse");
  cv.round_trip_length = s.quantity("round_trip_length", Dimension::Length);
  cv.refractive_index = s.number_or("refractive_index", cv.refractive_index);
  cv.wavelength = s.quantity("wavelength", Dimension::Length);
  cv.waist = s.quantity("waist", Dimension::Length);
  cv.surface_field_ratio = s.number("surface_field_ratio");
  cv.gap = s.quantity("gap", Dimension::Length);
  cv.evanescent_decay = s.optional_quantity("evanescent_decay", Dimension::InverseLength);
  cv.external_coupling_fraction = s.number("external_coupling_fraction");
  s.finish();
  guarded(s.path(), [&] { cv.validate(); return 0; });
  return cv;
}

ElectrodeSpec parse_electrode(Section s) {
  ElectrodeSpec e;
  e.diameter = s.quantity("diameter", Dimension::Length);
  e.conductivity_2d = s.quantity("conductivity_2d", Dimension::Conductance);
  e.misalignment = s.quantity("misalignment", Dimension::Angle);
  s.finish();
  if (e.diameter < 0.0 || e.conductivity_2d < 0.0 || e.misalignment < 0.0)
    throw ConfigError(s.path(), "electrode parameters must be non-negative");
  return e;
}

Detuning parse_detuning(const json& v, const std::string& path) {
  if (v.is_string()) {
    if (auto sym = Detuning::parse_symbolic(v.get<std::string>())) return *sym;
    return Detuning::absolute(parse_quantity(v.get<std::string>(), Dimension::AngularFrequency, path));
  }
  return Detuning::absolute(Section::to_quantity(v, Dimension::AngularFrequency, path));
}

DriveSpec parse_drive(Section s) {
  DriveSpec d;
  d.detuning = parse_detuning(s.raw("detuning"), s.path("detuning"));
  d.coupling = s.optional_quantity("coupling", Dimension::AngularFrequency);
  if (auto p = s.optional_quantity("input_power", Dimension::Power)) d.input_power = *p;
  d.laser_frequency = s.optional_quantity("laser_frequency", Dimension::AngularFrequency);
  if (!d.coupling && !s.has("input_power")) throw ConfigError(s.path(), "give coupling or input_power");
  s.finish();
  if (d.input_power < 0.0) throw ConfigError(s.path("input_power"), "must be >= 0");
  if (d.coupling && *d.coupling < 0.0) throw ConfigError(s.path("coupling"), "must be >= 0");
  return d;
}

DeviceSpec parse_device(Section s) {
  DeviceSpec d;
  d.beam = parse_beam(Section(s.raw("beam"), s.path("beam")));
  d.softening = parse_softening(Section(s.raw("softening"), s.path("softening")), d.beam);
  d.cavity = parse_cavity(Section(s.raw("cavity"), s.path("cavity")));
  if (const json* e = s.optional_raw("electrode")) d.electrode = parse_electrode(Section(*e, s.path("electrode")));
  d.temperature = s.quantity("temperature", Dimension::Temperature);
  if (d.temperature < 0.0) throw ConfigError(s.path("temperature"), "must be >= 0");
  if (const json* l = s.optional_raw("lasers")) {
    if (!l->is_array()) throw ConfigError(s.path("lasers"), "expected a list of drives");
    for (std::size_t i = 0; i < l->size(); ++i)
      d.lasers.push_back(parse_drive(Section((*l)[i], s.path("lasers") + "[" + std::to_string(i) + "]")));
  }
  if (const json* p = s.optional_raw("probe")) d.probe = parse_drive(Section(*p, s.path("probe")));
  s.finish();
  return d;
}

ParameterOverrides parse_overrides(Section s) {
  ParameterOverrides o;
  o.omega_m = s.optional_quantity("omega_m", Dimension::AngularFrequency);
  o.lambda = s.optional_quantity("lambda", Dimension::AngularFrequency);
  o.kappa = s.optional_quantity("kappa", Dimension::AngularFrequency);
  s.finish();
  for (const auto& [name, v] : {std::pair{"omega_m", o.omega_m}, {"lambda", o.lambda}, {"kappa", o.kappa}})
    if (v && !(*v > 0.0)) throw ConfigError(s.path(name), "must be positive");
  return o;
}

SimulationSettings parse_simulation(Section s) {
  SimulationSettings sim;
  sim.mech_truncation = s.count_or("mech_truncation", sim.mech_truncation);
  if (sim.mech_truncation < 3) throw ConfigError(s.path("mech_truncation"), "must be >= 3");
  sim.cavity_truncation = s.count_or("cavity_truncation", sim.cavity_truncation);
  if (sim.cavity_truncation < 2) throw ConfigError(s.path("cavity_truncation"), "must be >= 2");
  if (const json* m = s.optional_raw("solver")) {
    if (!m->is_string()) throw ConfigError(s.path("solver"), "expected a string");
    sim.solver = guarded(s.path("solver"), [&] { return parse_solver_method(m->get<std::string>()); });
  }
  sim.include_reduced_shifts = s.flag_or("include_reduced_shifts", sim.include_reduced_shifts);
  sim.spectrum.probe_in_linewidth = s.flag_or("probe_in_linewidth", sim.spectrum.probe_in_linewidth);
  sim.spectrum_points_per_linewidth = s.count_or("spectrum_points_per_linewidth", sim.spectrum_points_per_linewidth);
  if (sim.spectrum_points_per_linewidth < 3)
    throw ConfigError(s.path("spectrum_points_per_linewidth"), "must be >= 3");
  sim.wigner_points = s.count_or("wigner_points", sim.wigner_points);
  if (sim.wigner_points < 3) throw ConfigError(s.path("wigner_points"), "must be >= 3");
  if (const json* e = s.optional_raw("wigner_extent")) {
    sim.wigner_extent = Section::to_number(*e, s.path("wigner_extent"));
    if (!(*sim.wigner_extent > 0.0)) throw ConfigError(s.path("wigner_extent"), "must be positive");
  }
  sim.regime_levels = s.count_or("regime_levels", sim.regime_levels);
  if (sim.regime_levels < 1) throw ConfigError(s.path("regime_levels"), "must be >= 1");
  sim.thresholds.pass = s.number_or("regime_pass", sim.thresholds.pass);
  sim.thresholds.warn = s.number_or("regime_warn", sim.thresholds.warn);
  if (!(sim.thresholds.pass > 0.0) || !(sim.thresholds.warn >= sim.thresholds.pass))
    throw ConfigError(s.path("regime_warn"), "need 0 < regime_pass <= regime_warn");
  sim.converge_tolerance = s.number_or("converge_tolerance", sim.converge_tolerance);
  if (!(sim.converge_tolerance > 0.0)) throw ConfigError(s.path("converge_tolerance"), "must be positive");
  sim.converge_max_truncation = s.count_or("converge_max_truncation", sim.converge_max_truncation);
  sim.max_superoperator_nonzeros = s.number_or("max_superoperator_nonzeros", sim.max_superoperator_nonzeros);
  if (const json* p = s.optional_raw("selftest_populations")) {
    sim.selftest_populations = si_array(*p, s.path("selftest_populations"), 0);
    double total = 0.0;
    for (double v : sim.selftest_populations) {
      if (v < 0.0) throw ConfigError(s.path("selftest_populations"), "populations must be >= 0");
      total += v;
    }
    if (sim.selftest_populations.size() < 2 || std::abs(total - 1.0) > 1e-9)
      throw ConfigError(s.path("selftest_populations"), "need at least two populations summing to 1");
  }
  s.finish();
  return sim;
}

// Splits "12.5 mK" into its number and unit for interpolated sweep ranges.
std::pair<double, std::string> split_quantity(const json& v, const std::string& path) {
  if (v.is_number()) return {v.get<double>(), ""};
  static const std::regex re(R"(^\s*([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)\s*(.*?)\s*$)");
  std::smatch m;
  const std::string s = v.is_string() ? v.get<std::string>() : std::string();
  if (!v.is_string() || !std::regex_match(s, m, re)) throw ConfigError(path, "expected a number or quantity");
  return {std::stod(m[1].str()), m[2].str()};
}

SweepSpec parse_sweep(Section s) {
  SweepSpec sw;
  sw.parameter = s.text("parameter");
  if (const json* v = s.optional_raw("values")) {
    if (!v->is_array() || v->empty()) throw ConfigError(s.path("values"), "expected a non-empty list");
    sw.values.assign(v->begin(), v->end());
    if (s.has("from") || s.has("to") || s.has("steps"))
      throw ConfigError(s.path(), "give either values or from/to/steps");
  } else {
    const auto [a, ua] = split_quantity(s.raw("from"), s.path("from"));
    const auto [b, ub] = split_quantity(s.raw("to"), s.path("to"));
    if (ua != ub) throw ConfigError(s.path("to"), "from and to must use the same unit");
    const std::size_t steps = s.count_or("steps", 0);
    if (steps < 2) throw ConfigError(s.path("steps"), "need at least 2 steps");
    for (std::size_t i = 0; i < steps; ++i) {
      const double x = a + (b - a) * static_cast<double>(i) / static_cast<double>(steps - 1);
      if (ua.empty()) {
        sw.values.emplace_back(x);
      } else {
        std::ostringstream os;
        os << std::setprecision(17) << x << ' ' << ua;
        sw.values.emplace_back(os.str());
      }
    }
  }
  s.finish();
  return sw;
}

}  // namespace

double parse_quantity(const std::string& text, Dimension dimension, const std::string& path) {
  static const std::regex re(R"(^\s*([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)\s*(.*?)\s*$)");
  std::smatch m;
  if (!std::regex_match(text, m, re))
    throw ConfigError(path, "cannot parse quantity '" + text + "'; expected '<number> <unit>'");
  const std::string unit = m[2].str();
  if (unit.empty())
    throw ConfigError(path, "bare number '" + text + "' not accepted for a " + to_string(dimension) +
                                "; add a unit (" + unit_list(dimension) + ")");
  const auto& table = unit_table(dimension);
  const auto it = table.find(unit);
  if (it == table.end())
    throw ConfigError(path, "unit '" + unit + "' is not a " + to_string(dimension) + " unit (" + unit_list(dimension) +
                                ")");
  const double value = std::stod(m[1].str()) * it->second;
  if (!std::isfinite(value)) throw ConfigError(path, "quantity is not finite");
  return value;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 digest failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return os.str();
}

RunConfig parse_config(const json& document) {
  Section root(document, "");
  RunConfig rc;
  rc.source = document;
  if (const json* v = root.optional_raw("schema_version")) {
    if (!v->is_number_integer() || v->get<int>() != kConfigSchemaVersion)
      throw ConfigError("schema_version", "unsupported schema version (expected " +
                                              std::to_string(kConfigSchemaVersion) + ")");
  }
  root.optional_raw("description");
  rc.device = parse_device(Section(root.raw("device"), "device"));
  if (const json* o = root.optional_raw("overrides")) rc.device.overrides = parse_overrides(Section(*o, "overrides"));
  if (const json* s = root.optional_raw("simulation")) rc.simulation = parse_simulation(Section(*s, "simulation"));
  if (const json* o = root.optional_raw("output")) {
    Section out(*o, "output");
    if (out.has("directory")) rc.output.directory = out.text("directory");
    out.finish();
  }
  if (const json* s = root.optional_raw("sweep")) {
    rc.sweep = parse_sweep(Section(*s, "sweep"));
    with_value(document, rc.sweep->parameter, rc.sweep->values.front());
  }
  root.finish();
  rc.hash = sha256_hex(document.dump());
  return rc;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError("", "'" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

json with_value(const json& document, const std::string& path, const json& value) {
  static const std::regex token(R"(([A-Za-z_][A-Za-z0-9_]*)(\[(\d+)\])?)");
  json out = document;
  json* node = &out;
  std::stringstream ss(path);
  std::string part, walked;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  if (parts.empty()) throw ConfigError(path, "empty sweep parameter path");
  for (std::size_t i = 0; i < parts.size(); ++i) {
    std::smatch m;
    if (!std::regex_match(parts[i], m, token)) throw ConfigError(path, "malformed path segment '" + parts[i] + "'");
    walked = join(walked, parts[i]);
    const std::string key = m[1].str();
    const bool last = i + 1 == parts.size();
    if (!node->is_object() || (!node->contains(key) && !(last && !m[2].matched)))
      throw ConfigError(path, "no field '" + key + "' in the configuration");
    node = &(*node)[key];
    if (m[2].matched) {
      const auto idx = static_cast<std::size_t>(std::stoul(m[3].str()));
      if (!node->is_array() || idx >= node->size()) throw ConfigError(walked, "index out of range");
      node = &(*node)[idx];
    }
  }
  *node = value;
  return out;
}

SystemConfig system_config(const RunConfig& config, const DerivedParams& derived, std::size_t mech_truncation) {
  SystemConfig sc = SystemConfig::uniform(derived, mech_truncation, config.simulation.cavity_truncation);
  sc.include_reduced_shifts = config.simulation.include_reduced_shifts;
  sc.max_superoperator_nonzeros = config.simulation.max_superoperator_nonzeros;
  return sc;
}

namespace {
json quantity_schema(Dimension d) {
  std::string alternatives;
  for (const auto& [name, factor] : unit_table(d)) {
    std::string escaped;
    for (char ch : name) {
      if (std::string("^$\\.*+?()[]{}|/").find(ch) != std::string::npos) escaped += '\\';
      escaped += ch;
    }
    alternatives += (alternatives.empty() ? "" : "|") + escaped;
  }
  return {{"type", "string"},
          {"description", to_string(d) + " with unit: " + unit_list(d)},
          {"pattern", R"(^\s*[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?\s*()" + alternatives + R"()\s*$)"}};
}

json object_schema(json properties, std::vector<std::string> required = {}) {
  json o = {{"type", "object"}, {"additionalProperties", false}, {"properties", std::move(properties)}};
  if (!required.empty()) o["required"] = required;
  return o;
}
}  // namespace

json config_schema() {
  const json number = {{"type", "number"}};
  const json count = {{"type", "integer"}, {"minimum", 0}};
  const json boolean = {{"type", "boolean"}};
  const json detuning = {
      {"description", "\"+delta_n\" (blue sideband of level n), \"-delta_n\" (red sideband), or a frequency"},
      {"anyOf", {{{"type", "string"}, {"pattern", R"(^\s*[+-]\s*delta_?\d+\s*$)"}},
                 quantity_schema(Dimension::AngularFrequency)}}};
  const json drive = object_schema({{"detuning", detuning},
                                    {"coupling", quantity_schema(Dimension::AngularFrequency)},
                                    {"input_power", quantity_schema(Dimension::Power)},
                                    {"laser_frequency", quantity_schema(Dimension::AngularFrequency)}},
                                   {"detuning"});
  const json lobe = object_schema({{"peak_field", quantity_schema(Dimension::ElectricField)},
                                   {"center", quantity_schema(Dimension::Length)},
                                   {"axial_width", quantity_schema(Dimension::Length)},
                                   {"transverse_offset", quantity_schema(Dimension::Length)},
                                   {"transverse_width", quantity_schema(Dimension::Length)}},
                                  {"peak_field", "center", "axial_width", "transverse_offset", "transverse_width"});
  const json samples = object_schema({{"value", {{"type", "array"}, {"items", number}}},
                                      {"d1", {{"type", "array"}, {"items", number}}},
                                      {"d2", {{"type", "array"}, {"items", number}}}},
                                     {"value", "d1", "d2"});
  const json field_model = object_schema(
      {{"gaussian_lobes", object_schema({{"parallel", {{"type", "array"}, {"items", lobe}}},
                                         {"perpendicular", {{"type", "array"}, {"items", lobe}}}})},
       {"sampled", object_schema({{"units", {{"const", "SI"}}},
                                  {"y", {{"type", "array"}, {"items", number}}},
                                  {"parallel", samples},
                                  {"perpendicular", samples}},
                                 {"units", "y", "parallel", "perpendicular"})},
       {"tune_to_zeta", number}});
  const json device = object_schema(
      {{"beam", object_schema({{"length", quantity_schema(Dimension::Length)},
                               {"sound_speed", quantity_schema(Dimension::Speed)},
                               {"quality_factor", number},
                               {"chirality", {{"type", "array"}, {"items", count}, {"minItems", 2}, {"maxItems", 2}}},
                               {"kappa_tilde", quantity_schema(Dimension::Length)},
                               {"effective_mass", quantity_schema(Dimension::Mass)},
                               {"linear_mass_density", quantity_schema(Dimension::LinearDensity)},
                               {"mode_shape_factor", number}},
                              {"length", "sound_speed", "quality_factor"})},
       {"softening",
        object_schema({{"zeta", number},
                       {"quadratic", quantity_schema(Dimension::Stiffness)},
                       {"field_model", field_model},
                       {"polarizability", object_schema({{"parallel", quantity_schema(Dimension::Polarizability)},
                                                         {"perpendicular", quantity_schema(Dimension::Polarizability)}},
                                                        {"parallel", "perpendicular"})}})},
       {"cavity", object_schema({{"finesse", number},
                                 {"round_trip_length", quantity_schema(Dimension::Length)},
                                 {"refractive_index", number},
                                 {"wavelength", quantity_schema(Dimension::Length)},
                                 {"waist", quantity_schema(Dimension::Length)},
                                 {"surface_field_ratio", number},
                                 {"gap", quantity_schema(Dimension::Length)},
                                 {"evanescent_decay", quantity_schema(Dimension::InverseLength)},
                                 {"external_coupling_fraction", {{"type", "number"}, {"exclusiveMinimum", 0}, {"maximum", 1}}}},
                                {"finesse", "round_trip_length", "wavelength", "waist", "surface_field_ratio", "gap",
                                 "external_coupling_fraction"})},
       {"electrode", object_schema({{"diameter", quantity_schema(Dimension::Length)},
                                    {"conductivity_2d", quantity_schema(Dimension::Conductance)},
                                    {"misalignment", quantity_schema(Dimension::Angle)}},
                                   {"diameter", "conductivity_2d", "misalignment"})},
       {"temperature", quantity_schema(Dimension::Temperature)},
       {"lasers", {{"type", "array"}, {"items", drive}}},
       {"probe", drive}},
      {"beam", "softening", "cavity", "temperature"});
  const json simulation = object_schema({{"mech_truncation", count},
                                         {"cavity_truncation", count},
                                         {"solver", {{"enum", {"auto", "dense", "sparse-direct", "iterative"}}}},
                                         {"include_reduced_shifts", boolean},
                                         {"probe_in_linewidth", boolean},
                                         {"spectrum_points_per_linewidth", count},
                                         {"wigner_points", count},
                                         {"wigner_extent", number},
                                         {"regime_levels", count},
                                         {"regime_pass", number},
                                         {"regime_warn", number},
                                         {"converge_tolerance", number},
                                         {"converge_max_truncation", count},
                                         {"max_superoperator_nonzeros", number},
                                         {"selftest_populations", {{"type", "array"}, {"items", number}}}});
  json schema = object_schema(
      {{"schema_version", {{"const", kConfigSchemaVersion}}},
       {"description", {{"type", "string"}}},
       {"device", device},
       {"overrides", object_schema({{"omega_m", quantity_schema(Dimension::AngularFrequency)},
                                    {"lambda", quantity_schema(Dimension::AngularFrequency)},
                                    {"kappa", quantity_schema(Dimension::AngularFrequency)}})},
       {"simulation", simulation},
       {"output", object_schema({{"directory", {{"type", "string"}}}})},
       {"sweep", object_schema({{"parameter", {{"type", "string"}}},
                                {"values", {{"type", "array"}, {"minItems", 1}}},
                                {"from", {{"type", {"number", "string"}}}},
                                {"to", {{"type", {"number", "string"}}}},
                                {"steps", count}},
                               {"parameter"})}},
      {"device"});
  schema["$schema"] = "https://json-schema.org/draft/2020-12/schema";
  schema["title"] = "nanofock run configuration";
  return schema;
}

}  // namespace nanofock
