#include "nanofock/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#include "nanofock/constants.hpp"
#include "nanofock/error.hpp"
#include "nanofock/spectrum.hpp"

#ifndef NANOFOCK_VERSION
#define NANOFOCK_VERSION "0.0.0"
#endif

namespace nanofock {

using nlohmann::json;
namespace fs = std::filesystem;
namespace c = constants;

std::string version() { return NANOFOCK_VERSION; }

namespace {

constexpr int kOutputSchemaVersion = 1;
constexpr double kCompareTolerance = 0.05;
constexpr double kSelftestTolerance = 0.02;

json angular(double v) { return {{"value", v}, {"unit", "rad/s"}, {"hz", v / c::two_pi}}; }
json with_unit(double v, const char* unit) { return {{"value", v}, {"unit", unit}}; }

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch == '\n' ? ' ' : ch;
  }
  return out + "\"";
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

std::string csv_comment(const std::string& kind, const std::string& hash, const std::string& extra = {}) {
  return "# nanofock " + kind + " schema_version=" + std::to_string(kOutputSchemaVersion) + " config_sha256=" + hash +
         (extra.empty() ? "" : " " + extra);
}

json populations_json(const SteadyState& s) {
  json j = {{"truncation", s.populations.size()},
            {"populations", s.populations},
            {"wigner_origin", wigner_origin(s.populations)},
            {"residual", s.residual},
            {"generator_norm", s.generator_norm},
            {"solver", to_json(s.diagnostics)}};
  return j;
}

double max_abs_difference(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t n = 0; n < std::max(a.size(), b.size()); ++n) {
    const double x = n < a.size() ? a[n] : 0.0;
    const double y = n < b.size() ? b[n] : 0.0;
    m = std::max(m, std::abs(x - y));
  }
  return m;
}

template <class Solve>
SteadyState converged(const RunConfig& rc, bool converge, Solve solve, const char* what) {
  std::size_t n = rc.simulation.mech_truncation;
  if (!converge) return solve(n);
  std::optional<SteadyState> prev;
  double last_drift = std::numeric_limits<double>::infinity();
  for (; n <= rc.simulation.converge_max_truncation; n *= 2) {
    try {
      SteadyState cur = solve(n);
      if (prev) {
        last_drift = max_abs_difference(prev->populations, cur.populations);
        if (last_drift < rc.simulation.converge_tolerance) return cur;
      }
      prev = std::move(cur);
    } catch (const TruncationError&) {
      prev.reset();
    }
  }
  std::ostringstream msg;
  msg << what << " populations did not converge below " << rc.simulation.converge_tolerance
      << " before the truncation cap " << rc.simulation.converge_max_truncation << " (last drift " << last_drift << ")";
  throw ConvergenceError(msg.str(), {last_drift});
}

struct Context {
  std::string command;
  const CommandOptions& options;
  std::ostream& out;
  std::ostream& err;
  RunConfig config;
  fs::path dir;
  json manifest = json::object();
  std::vector<std::string> outputs;

  void warn(const std::string& msg) {
    err << "warning: " << msg << '\n';
    manifest["warnings"].push_back(msg);
  }
  fs::path file(const std::string& name) {
    outputs.push_back(name);
    return dir / name;
  }
  json header(const std::string& schema) const {
    return {{"schema", "nanofock." + schema}, {"schema_version", kOutputSchemaVersion}, {"config_sha256", config.hash}};
  }
};

std::pair<DerivedParams, ValidationReport> derive_and_check(Context& ctx) {
  DerivedParams d = derive(ctx.config.device);
  ValidationReport report = regime_check(d, ctx.config.simulation.regime_levels, ctx.config.simulation.thresholds);
  ctx.manifest["derived"] = to_json(d);
  ctx.manifest["validation"] = to_json(report);
  return {std::move(d), std::move(report)};
}

void print_report(std::ostream& out, const ValidationReport& report) {
  for (const auto& chk : report.checks)
    out << "  " << std::left << std::setw(26) << chk.name << std::setw(6) << to_string(chk.status) << " ratio "
        << std::setprecision(4) << chk.ratio << "  (" << chk.inequality << ")\n";
}

int cmd_device(Context& ctx) {
  auto [d, report] = derive_and_check(ctx);
  json doc = ctx.header("derived");
  doc["derived"] = to_json(d);
  doc["validation"] = to_json(report);
  write_json(ctx.file("derived.json"), doc);
  auto hz = [](double v) { return v / c::two_pi; };
  ctx.out << std::setprecision(6) << "omega_m0/2pi = " << hz(d.omega_m0) << " Hz\n"
          << "omega_m/2pi  = " << hz(d.omega_m) << " Hz (zeta " << d.zeta << ")\n"
          << "lambda/2pi   = " << hz(d.lambda) << " Hz\n"
          << "kappa/2pi    = " << hz(d.kappa) << " Hz\n"
          << "gamma_m/2pi  = " << hz(d.gamma_m) << " Hz\n"
          << "nbar         = " << d.nbar << "\n"
          << "x_zpm        = " << d.x_zpm << " m\n";
  for (std::size_t j = 0; j < d.lasers.size(); ++j)
    ctx.out << "laser " << j + 1 << ": detuning " << d.lasers[j].requested.describe() << " = "
            << hz(d.lasers[j].detuning) << " Hz, |g|/2pi = " << hz(std::abs(d.lasers[j].g)) << " Hz\n";
  ctx.out << "regime checks:\n";
  print_report(ctx.out, report);
  return report.any_failed() ? kExitRegimeFailure : kExitSuccess;
}

int cmd_validate(Context& ctx) {
  auto [d, report] = derive_and_check(ctx);
  json doc = ctx.header("validation");
  doc["validation"] = to_json(report);
  ctx.out << doc.dump(2) << '\n';
  return report.any_failed() ? kExitRegimeFailure : kExitSuccess;
}

void note_regime(Context& ctx, const ValidationReport& report) {
  for (const auto& chk : report.checks)
    if (chk.status == CheckStatus::Fail)
      ctx.warn("regime check '" + chk.name + "' fails (" + chk.inequality + ", ratio " + format_double(chk.ratio) +
               "); results may be outside the model's validity");
}

void write_wigner_csv(Context& ctx, const WignerData& w, const std::string& source) {
  std::ofstream os(ctx.file("wigner.csv"));
  os << csv_comment("wigner", ctx.config.hash, "convention=alpha-plane source=" + source) << '\n' << "x,p,w\n";
  for (std::size_t i = 0; i < w.grid.nx; ++i)
    for (std::size_t j = 0; j < w.grid.np; ++j)
      os << format_double(w.grid.x(i)) << ',' << format_double(w.grid.p(j)) << ','
         << format_double(w.values(static_cast<long>(i), static_cast<long>(j))) << '\n';
}

json wigner_summary(const WignerData& w, const std::string& source) {
  json j = {{"source", source},
            {"origin_value", w.origin_value},
            {"min_value", w.min_value},
            {"min_location", {w.min_x, w.min_p}},
            {"grid_integral", w.integral},
            {"grid", {{"x_min", w.grid.x_min}, {"x_max", w.grid.x_max}, {"nx", w.grid.nx},
                      {"p_min", w.grid.p_min}, {"p_max", w.grid.p_max}, {"np", w.grid.np}}}};
  if (w.warning) j["warning"] = *w.warning;
  return j;
}

int cmd_steady(Context& ctx) {
  auto [d, report] = derive_and_check(ctx);
  note_regime(ctx, report);
  const auto& sim = ctx.config.simulation;
  const bool full = ctx.options.full || ctx.options.compare;
  json doc = ctx.header("populations");
  json solvers = json::array();

  const SteadyState reduced = reduced_populations(ctx.config, d, ctx.options.converge);
  doc["reduced"] = populations_json(reduced);
  solvers.push_back({{"path", "reduced"}, {"diagnostics", to_json(reduced.diagnostics)}, {"residual", reduced.residual}});
  ctx.out << std::setprecision(6) << "reduced populations (N = " << reduced.populations.size() << "):";
  for (double p : reduced.populations) ctx.out << ' ' << p;
  ctx.out << "\nW(0,0) = " << wigner_origin(reduced.populations) << '\n';

  std::optional<SteadyState> full_state;
  if (full) {
    full_state = full_populations(ctx.config, d, ctx.options.converge);
    doc["full"] = populations_json(*full_state);
    doc["full"]["min_eigenvalue"] = full_state->diagnostics.min_eigenvalue;
    doc["full"]["clipped_weight"] = full_state->diagnostics.clipped_weight;
    solvers.push_back(
        {{"path", "full"}, {"diagnostics", to_json(full_state->diagnostics)}, {"residual", full_state->residual}});
    ctx.out << "full master-equation populations (N = " << full_state->populations.size() << "):";
    for (double p : full_state->populations) ctx.out << ' ' << p;
    ctx.out << '\n';
  }
  if (ctx.options.compare) {
    const auto rows = compare_populations(reduced.populations, full_state->populations);
    json table = json::array();
    double worst = 0.0;
    for (const auto& r : rows) {
      table.push_back({{"n", r.n}, {"reduced", r.reduced}, {"full", r.full}, {"abs_diff", r.abs_diff}});
      worst = std::max(worst, r.abs_diff);
    }
    doc["comparison"] = {{"per_level", table}, {"max_abs_diff", worst}, {"tolerance", kCompareTolerance},
                         {"within_tolerance", worst <= kCompareTolerance}};
    ctx.out << "n   reduced      full         |diff|\n";
    for (const auto& r : rows)
      ctx.out << std::left << std::setw(4) << r.n << std::setw(13) << r.reduced << std::setw(13) << r.full << r.abs_diff
              << '\n';
    if (worst > kCompareTolerance)
      ctx.warn("reduced and full populations differ by " + format_double(worst) + " (> " +
               format_double(kCompareTolerance) + ")");
  }

  WignerData w;
  std::string source;
  if (full_state) {
    const DensityMatrix mech = partial_trace(*full_state->rho, 0);
    w = wigner_from_density_matrix(mech, wigner_grid(sim, mech.dim()));
    source = "full";
  } else {
    w = wigner_from_populations(reduced.populations, wigner_grid(sim, reduced.populations.size()));
    source = "reduced";
  }
  if (w.warning) ctx.warn(*w.warning);
  doc["wigner"] = wigner_summary(w, source);
  ctx.manifest["solver"] = solvers;
  write_json(ctx.file("populations.json"), doc);
  write_wigner_csv(ctx, w, source);
  ctx.out << "Wigner (" << source << "): W(0,0) = " << w.origin_value << ", min " << w.min_value << '\n';
  return kExitSuccess;
}

json peaks_json(const SpectrumData& s) {
  json peaks = json::array();
  for (const auto& pk : s.peaks)
    peaks.push_back({{"n", pk.n},
                     {"offset_plus_hz", pk.delta / c::two_pi},
                     {"offset_minus_hz", -pk.delta / c::two_pi},
                     {"linewidth_hz", pk.linewidth / c::two_pi},
                     {"height_plus", pk.height_plus},
                     {"height_minus", pk.height_minus},
                     {"probe_rate_plus_per_s", pk.probe_plus},
                     {"probe_rate_minus_per_s", pk.probe_minus}});
  return peaks;
}

int cmd_spectrum(Context& ctx) {
  if (!ctx.config.device.probe) throw ConfigError("device.probe", "the spectrum command needs a probe laser");
  auto [d, report] = derive_and_check(ctx);
  note_regime(ctx, report);
  const auto& sim = ctx.config.simulation;
  int code = kExitSuccess;

  const SteadyState reduced = reduced_populations(ctx.config, d, ctx.options.converge);
  ctx.manifest["solver"] = json::array(
      {{{"path", "reduced"}, {"diagnostics", to_json(reduced.diagnostics)}, {"residual", reduced.residual}}});
  const auto grid =
      sideband_grid(d, reduced.populations.size(), sim.spectrum_points_per_linewidth, 40.0, sim.spectrum);
  const SpectrumData spec = power_spectrum(reduced.populations, d, grid, sim.spectrum);
  for (const auto& w : spec.warnings) ctx.warn(w);

  json doc = ctx.header("peaks");
  doc["laser_frequency_hz"] = spec.laser_frequency / c::two_pi;
  doc["line_spacing_hz"] = spec.line_spacing / c::two_pi;
  doc["resolvable"] = spec.resolvable();
  doc["populations"] = reduced.populations;
  doc["peaks"] = peaks_json(spec);
  try {
    const Reconstruction r = populations_from_spectrum(spec);
    for (const auto& w : r.warnings) ctx.warn(w);
    doc["inversion"] = {{"populations", r.populations},
                        {"uncertainties", r.uncertainties},
                        {"wigner_origin", r.wigner_origin},
                        {"highest_line", r.highest_line},
                        {"warnings", r.warnings}};
    ctx.out << std::setprecision(6) << "recovered populations:";
    for (double p : r.populations) ctx.out << ' ' << p;
    ctx.out << "\nrecovered W(0,0) = " << r.wigner_origin << '\n';
  } catch (const PreconditionError& e) {
    doc["inversion"] = {{"error", e.what()}};
    ctx.err << "inversion refused: " << e.what() << '\n';
    code = kExitPreconditionFailure;
  }
  if (ctx.options.selftest) {
    std::vector<double> recovered;
    try {
      const double e = spectrum_selftest(d, sim, sim.selftest_populations, &recovered);
      const bool ok = e < kSelftestTolerance;
      doc["selftest"] = {{"input", sim.selftest_populations}, {"recovered", recovered}, {"max_abs_error", e},
                         {"tolerance", kSelftestTolerance}, {"passed", ok}};
      ctx.out << "selftest: max per-level inversion error " << e << (ok ? " (pass)" : " (FAIL)") << '\n';
      if (!ok && code == kExitSuccess) code = kExitSolverFailure;
    } catch (const PreconditionError& e) {
      doc["selftest"] = {{"input", sim.selftest_populations}, {"error", e.what()}, {"passed", false}};
      ctx.err << "selftest refused: " << e.what() << '\n';
      code = kExitPreconditionFailure;
    }
  }
  write_json(ctx.file("peaks.json"), doc);
  std::ofstream os(ctx.file("spectrum.csv"));
  os << csv_comment("spectrum", ctx.config.hash, "laser_frequency_hz=" + format_double(spec.laser_frequency / c::two_pi))
     << '\n'
     << "offset_hz,value\n";
  for (std::size_t i = 0; i < spec.offsets.size(); ++i)
    os << format_double(spec.offsets[i] / c::two_pi) << ',' << format_double(spec.values[i]) << '\n';
  ctx.out << spec.peaks.size() << " sideband pairs, resolvable: " << (spec.resolvable() ? "yes" : "no") << '\n';
  return code;
}

struct SweepRow {
  std::string value;
  std::string status = "ok";
  std::string error;
  std::vector<double> numbers;
  std::string regime;
};

const std::vector<std::string> kSweepColumns = {"omega_m_hz", "lambda_hz", "kappa_hz", "nbar", "g_max_hz",
                                                "truncation", "p0",        "p1",       "p2",   "p_peak_level",
                                                "p_peak",     "w00"};

SweepRow sweep_point(const RunConfig& base, const json& value, bool converge) {
  SweepRow row;
  row.value = value.is_string() ? value.get<std::string>() : value.dump();
  try {
    const RunConfig rc = parse_config(with_value(base.source, base.sweep->parameter, value));
    const DerivedParams d = derive(rc.device);
    const ValidationReport report = regime_check(d, rc.simulation.regime_levels, rc.simulation.thresholds);
    row.regime = report.any_failed() ? "fail" : "pass";
    double g_max = 0.0;
    for (const auto& l : d.lasers) g_max = std::max(g_max, std::abs(l.g));
    const SteadyState s = reduced_populations(rc, d, converge);
    const auto& p = s.populations;
    const auto peak = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
    row.numbers = {d.omega_m / c::two_pi,
                   d.lambda / c::two_pi,
                   d.kappa / c::two_pi,
                   d.nbar,
                   g_max / c::two_pi,
                   static_cast<double>(p.size()),
                   p[0],
                   p[1],
                   p[2],
                   static_cast<double>(peak),
                   p[peak],
                   wigner_origin(p)};
  } catch (const std::exception& e) {
    row.status = "error";
    row.error = e.what();
  }
  return row;
}

int cmd_sweep(Context& ctx) {
  if (!ctx.config.sweep) throw ConfigError("sweep", "the sweep command needs a sweep section");
  const auto& values = ctx.config.sweep->values;
  std::vector<SweepRow> rows(values.size());
  std::size_t workers = ctx.options.threads ? ctx.options.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, values.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < values.size(); i = next++) rows[i] = sweep_point(ctx.config, values[i], ctx.options.converge);
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  std::ofstream os(ctx.file("sweep.csv"));
  os << csv_comment("sweep", ctx.config.hash, "parameter=" + ctx.config.sweep->parameter) << '\n'
     << "index,value,status";
  for (const auto& col : kSweepColumns) os << ',' << col;
  os << ",regime,error\n";
  std::size_t failures = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    os << i << ',' << csv_escape(r.value) << ',' << r.status;
    for (std::size_t k = 0; k < kSweepColumns.size(); ++k)
      os << ',' << (k < r.numbers.size() ? format_double(r.numbers[k]) : "");
    os << ',' << r.regime << ',' << csv_escape(r.error) << '\n';
    if (r.status != "ok") {
      ++failures;
      ctx.warn("sweep point " + std::to_string(i) + " (" + r.value + ") failed: " + r.error);
    }
  }
  ctx.manifest["sweep"] = {{"parameter", ctx.config.sweep->parameter}, {"points", rows.size()}, {"failed", failures},
                           {"threads", workers}};
  ctx.out << "sweep over " << ctx.config.sweep->parameter << ": " << rows.size() << " points, " << failures
          << " failed\n";
  return kExitSuccess;
}

}  // namespace

json to_json(const DerivedParams& d) {
  json lasers = json::array();
  auto laser_json = [](const LaserParams& l) {
    return json{{"requested_detuning", l.requested.describe()},
                {"detuning", angular(l.detuning)},
                {"laser_frequency", angular(l.laser_frequency)},
                {"alpha", {{"re", l.alpha.real()}, {"im", l.alpha.imag()}}},
                {"photon_number", l.photon_number},
                {"G0", {{"value", l.G0}, {"unit", "rad/s/m"}, {"order_of_magnitude", true}}},
                {"g", {{"re", l.g.real()}, {"im", l.g.imag()}, {"abs", angular(std::abs(l.g))}}},
                {"coupling_source", l.coupling_from_power ? "input_power" : "coupling"}};
  };
  for (const auto& l : d.lasers) lasers.push_back(laser_json(l));
  json j = {{"omega_m0", angular(d.omega_m0)},
            {"omega_m", angular(d.omega_m)},
            {"omega_m_shifted", angular(d.omega_m_shifted)},
            {"lambda", angular(d.lambda)},
            {"gamma_m", angular(d.gamma_m)},
            {"kappa", angular(d.kappa)},
            {"x_zpm", with_unit(d.x_zpm, "m")},
            {"beta", with_unit(d.beta, "N/m^3")},
            {"nbar", d.nbar},
            {"temperature", with_unit(d.temperature, "K")},
            {"effective_mass", with_unit(d.effective_mass, "kg")},
            {"zeta", d.zeta},
            {"quadratic", with_unit(d.quadratic, "N/m")},
            {"lasers", lasers}};
  json deltas = json::array();
  for (std::size_t n = 1; n <= 10; ++n) deltas.push_back({{"n", n}, {"hz", d.transition_frequency(n) / c::two_pi}});
  j["delta_n"] = deltas;
  if (d.probe) j["probe"] = laser_json(*d.probe);
  if (d.finesse)
    j["finesse"] = {{"finesse", d.finesse->finesse},
                    {"absorbed_ratio", d.finesse->absorbed_ratio},
                    {"circulating_power", with_unit(d.finesse->circulating_power, "W")},
                    {"absorbed_power", with_unit(d.finesse->absorbed_power, "W")}};
  return j;
}

json to_json(const ValidationReport& r) {
  json checks = json::array();
  for (const auto& chk : r.checks)
    checks.push_back({{"name", chk.name}, {"inequality", chk.inequality}, {"ratio", chk.ratio},
                      {"status", to_string(chk.status)}});
  return {{"checks", checks},
          {"thresholds", {{"pass", r.thresholds.pass}, {"warn", r.thresholds.warn}}},
          {"any_failed", r.any_failed()}};
}

json to_json(const SolverDiagnostics& s) {
  json j = {{"method", s.method}, {"iterations", s.iterations}, {"clipped_weight", s.clipped_weight}};
  if (!s.residual_history.empty()) j["final_relative_residual"] = s.residual_history.back();
  if (s.smallest_singular_values)
    j["smallest_singular_values"] = {s.smallest_singular_values->first, s.smallest_singular_values->second};
  return j;
}

SteadyState reduced_populations(const RunConfig& config, const DerivedParams& derived, bool converge) {
  return converged(config, converge, [&](std::size_t n) {
    return reduced_steady_populations(system_config(config, derived, n), n - 1);
  }, "reduced");
}

SteadyState full_populations(const RunConfig& config, const DerivedParams& derived, bool converge) {
  SolveOptions opts;
  opts.method = config.simulation.solver;
  return converged(config, converge, [&](std::size_t n) {
    return steady_state_solve(build_full_liouvillian(system_config(config, derived, n)), opts);
  }, "full master-equation");
}

std::vector<ComparisonRow> compare_populations(const std::vector<double>& reduced, const std::vector<double>& full) {
  std::vector<ComparisonRow> rows;
  for (std::size_t n = 0; n < std::max(reduced.size(), full.size()); ++n) {
    ComparisonRow r;
    r.n = n;
    r.reduced = n < reduced.size() ? reduced[n] : 0.0;
    r.full = n < full.size() ? full[n] : 0.0;
    r.abs_diff = std::abs(r.reduced - r.full);
    rows.push_back(r);
  }
  return rows;
}

QuadratureGrid wigner_grid(const SimulationSettings& simulation, std::size_t levels) {
  if (simulation.wigner_extent) return QuadratureGrid::square(*simulation.wigner_extent, simulation.wigner_points);
  return QuadratureGrid::for_levels(levels, simulation.wigner_points);
}

double spectrum_selftest(const DerivedParams& derived, const SimulationSettings& simulation,
                         const std::vector<double>& populations, std::vector<double>* recovered) {
  const auto grid =
      sideband_grid(derived, populations.size(), simulation.spectrum_points_per_linewidth, 40.0, simulation.spectrum);
  const SpectrumData spec = power_spectrum(populations, derived, grid, simulation.spectrum);
  const Reconstruction r = populations_from_spectrum(spec);
  if (recovered) *recovered = r.populations;
  return max_abs_difference(populations, r.populations);
}

int run_command(const std::string& command, const fs::path& config_path, const CommandOptions& options,
                std::ostream& out, std::ostream& err) {
  Context ctx{command, options, out, err, {}, {}, json::object(), {}};
  ctx.manifest["warnings"] = json::array();
  const std::string started = utc_now();
  std::optional<fs::path> dir = options.out_dir;
  int code = kExitSuccess;
  std::string status = "ok";
  auto fail = [&](int c, const std::string& kind, const std::exception& e) {
    code = c;
    status = kind;
    ctx.manifest["error"] = e.what();
    err << "error (" << kind << "): " << e.what() << '\n';
  };
  try {
    static const std::vector<std::string> commands = {"device", "validate", "steady", "spectrum", "sweep"};
    if (std::find(commands.begin(), commands.end(), command) == commands.end())
      throw ConfigError("", "unknown command '" + command + "'");
    ctx.config = load_config(config_path);
    dir = options.out_dir.value_or(fs::path(ctx.config.output.directory));
    ctx.dir = *dir;
    fs::create_directories(ctx.dir);
    if (command == "device") code = cmd_device(ctx);
    else if (command == "validate") code = cmd_validate(ctx);
    else if (command == "steady") code = cmd_steady(ctx);
    else if (command == "spectrum") code = cmd_spectrum(ctx);
    else code = cmd_sweep(ctx);
    if (code == kExitRegimeFailure) status = "regime-failure";
    else if (code == kExitPreconditionFailure) status = "precondition-failure";
    else if (code == kExitSolverFailure) status = "solver-failure";
  } catch (const ConfigError& e) {
    fail(kExitConfigError, "config-error", e);
  } catch (const BucklingError& e) {
    fail(kExitRegimeFailure, "regime-failure", e);
    ctx.manifest["critical_quadratic_n_per_m"] = e.critical_quadratic();
  } catch (const PreconditionError& e) {
    fail(kExitPreconditionFailure, "precondition-failure", e);
  } catch (const ArgumentError& e) {
    fail(kExitConfigError, "config-error", e);
  } catch (const std::exception& e) {
    fail(kExitSolverFailure, "solver-failure", e);
  }

  if (dir) {
    try {
      ctx.dir = *dir;
      fs::create_directories(ctx.dir);
      json m = {{"schema", "nanofock.manifest"},
                {"schema_version", kOutputSchemaVersion},
                {"tool", "nanofock"},
                {"version", version()},
                {"command", command},
                {"config_path", config_path.string()},
                {"config_sha256", ctx.config.hash},
                {"flags", {{"full", options.full}, {"compare", options.compare}, {"converge", options.converge},
                           {"selftest", options.selftest}, {"threads", options.threads}}},
                {"conventions", {{"frequencies", "angular values in rad/s; fields named *_hz are ordinary frequencies"},
                                 {"wigner", "alpha-plane, W(0,0) = 2/pi for the vacuum"},
                                 {"polarizability_unit", "4pi_eps0_A2 = " + format_double(polarizability_unit_factor()) + " F*m"},
                                 {"effective_mass", "m* = (int phi0^2 dy / L) * mu * L, unit-midpoint mode shape"}}},
                {"outputs", ctx.outputs},
                {"exit_code", code},
                {"status", status},
                {"started_at", started},
                {"finished_at", utc_now()}};
      m.update(ctx.manifest);
      write_json(ctx.dir / "manifest.json", m);
    } catch (const std::exception& e) {
      err << "error: could not write the manifest: " << e.what() << '\n';
      if (code == kExitSuccess) code = kExitSolverFailure;
    }
  }
  return code;
}

}  // namespace nanofock
