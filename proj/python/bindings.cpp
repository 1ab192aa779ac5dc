#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "nanofock/config.hpp"
#include "nanofock/error.hpp"
#include "nanofock/pipeline.hpp"
#include "nanofock/spectrum.hpp"
#include "nanofock/wigner.hpp"

namespace py = pybind11;
using namespace nanofock;

namespace {

Detuning to_detuning(const py::object& v) {
  if (py::isinstance<py::str>(v)) {
    const auto text = v.cast<std::string>();
    if (auto d = Detuning::parse_symbolic(text)) return *d;
    throw ArgumentError("detuning '" + text + "' is neither +delta_n/-delta_n nor a number in rad/s");
  }
  return Detuning::absolute(v.cast<double>());
}

std::pair<Detuning, double> to_drive(const py::tuple& t) {
  if (t.size() != 2) throw ArgumentError("a drive is a (detuning, |g|) pair");
  return {to_detuning(t[0]), t[1].cast<double>()};
}

DerivedParams quoted(double omega_m, double lambda, double kappa, double quality_factor, double temperature,
                     const std::vector<py::tuple>& lasers, const std::optional<py::tuple>& probe) {
  QuotedParameters q;
  q.omega_m = omega_m;
  q.lambda = lambda;
  q.kappa = kappa;
  q.quality_factor = quality_factor;
  q.temperature = temperature;
  for (const auto& l : lasers) q.lasers.push_back(to_drive(l));
  if (probe) q.probe = to_drive(*probe);
  return derive_from_quoted(q);
}

py::object json_to_python(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

py::dict wigner_dict(const WignerData& w) {
  py::dict d;
  std::vector<double> xs(w.grid.nx), ps(w.grid.np);
  for (std::size_t i = 0; i < w.grid.nx; ++i) xs[i] = w.grid.x(i);
  for (std::size_t j = 0; j < w.grid.np; ++j) ps[j] = w.grid.p(j);
  d["x"] = xs;
  d["p"] = ps;
  d["values"] = w.values;
  d["origin"] = w.origin_value;
  d["min"] = w.min_value;
  d["integral"] = w.integral;
  d["warning"] = w.warning;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Fock-state preparation in driven nanomechanical resonators";
  m.attr("__version__") = version();

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ArgumentError>(m, "ArgumentError", PyExc_ValueError);
  py::register_exception<BucklingError>(m, "BucklingError", PyExc_ValueError);
  py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_RuntimeError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<MemoryGuardError>(m, "MemoryGuardError", PyExc_MemoryError);

  py::class_<DerivedParams>(m, "Derived")
      .def_readonly("omega_m0", &DerivedParams::omega_m0)
      .def_readonly("omega_m", &DerivedParams::omega_m)
      .def_readonly("omega_m_shifted", &DerivedParams::omega_m_shifted)
      .def_readonly("lambda_", &DerivedParams::lambda)
      .def_readonly("gamma_m", &DerivedParams::gamma_m)
      .def_readonly("kappa", &DerivedParams::kappa)
      .def_readonly("x_zpm", &DerivedParams::x_zpm)
      .def_readonly("nbar", &DerivedParams::nbar)
      .def_readonly("effective_mass", &DerivedParams::effective_mass)
      .def_property_readonly("couplings",
                             [](const DerivedParams& d) {
                               std::vector<double> g;
                               for (const auto& l : d.lasers) g.push_back(std::abs(l.g));
                               return g;
                             })
      .def_property_readonly("detunings",
                             [](const DerivedParams& d) {
                               std::vector<double> v;
                               for (const auto& l : d.lasers) v.push_back(l.detuning);
                               return v;
                             })
      .def("transition_frequency", &DerivedParams::transition_frequency, py::arg("n"))
      .def("to_dict", [](const DerivedParams& d) { return json_to_python(to_json(d)); });

  m.def("quoted", &quoted, py::arg("omega_m"), py::arg("lambda_"), py::arg("kappa"), py::arg("quality_factor"),
        py::arg("temperature"), py::arg("lasers"), py::arg("probe") = py::none(),
        "Parameters from quoted values. Frequencies in rad/s; each drive is (detuning, |g|) with the detuning "
        "either a number or '+delta_n' / '-delta_n'.");
  m.def("derive", [](const std::filesystem::path& config) { return derive(load_config(config).device); },
        py::arg("config"), "Derived parameters from a run configuration file.");
  m.def("validate",
        [](const DerivedParams& d, std::size_t n_max) { return json_to_python(to_json(regime_check(d, n_max))); },
        py::arg("derived"), py::arg("n_max") = 6);

  m.def("reduced_populations",
        [](const DerivedParams& d, std::size_t truncation) {
          return reduced_steady_populations(SystemConfig::uniform(d, truncation), truncation - 1).populations;
        },
        py::arg("derived"), py::arg("truncation") = 10);
  m.def("full_populations",
        [](const DerivedParams& d, std::size_t truncation, std::size_t cavity_dim) {
          py::gil_scoped_release release;
          return steady_state_solve(build_full_liouvillian(SystemConfig::uniform(d, truncation, cavity_dim)))
              .populations;
        },
        py::arg("derived"), py::arg("truncation") = 8, py::arg("cavity_dim") = 2);

  m.def("wigner_origin", [](const std::vector<double>& p) { return wigner_origin(p); }, py::arg("populations"));
  m.def("wigner",
        [](const std::vector<double>& p, std::optional<double> extent, std::size_t points) {
          const QuadratureGrid g =
              extent ? QuadratureGrid::square(*extent, points) : QuadratureGrid::for_levels(p.size(), points);
          return wigner_dict(wigner_from_populations(p, g));
        },
        py::arg("populations"), py::arg("extent") = py::none(), py::arg("points") = 161);

  m.def("spectrum",
        [](const std::vector<double>& p, const DerivedParams& d, std::optional<std::vector<double>> offsets) {
          const std::vector<double> grid = offsets ? *offsets : sideband_grid(d, p.size());
          const SpectrumData s = power_spectrum(p, d, grid);
          py::dict out;
          out["offsets"] = s.offsets;
          out["values"] = s.values;
          out["resolvable"] = s.resolvable();
          out["warnings"] = s.warnings;
          py::list peaks;
          for (const auto& pk : s.peaks) {
            py::dict row;
            row["n"] = pk.n;
            row["delta"] = pk.delta;
            row["linewidth"] = pk.linewidth;
            row["height_plus"] = pk.height_plus;
            row["height_minus"] = pk.height_minus;
            peaks.append(row);
          }
          out["peaks"] = peaks;
          return out;
        },
        py::arg("populations"), py::arg("derived"), py::arg("offsets") = py::none());
  m.def("spectrum_round_trip",
        [](const std::vector<double>& p, const DerivedParams& d) {
          const SpectrumData s = power_spectrum(p, d, sideband_grid(d, p.size()));
          return populations_from_spectrum(s).populations;
        },
        py::arg("populations"), py::arg("derived"), "Synthesizes a spectrum and inverts it back to populations.");

  m.def("run",
        [](const std::string& command, const std::filesystem::path& config, std::optional<std::filesystem::path> out,
           bool full, bool compare, bool converge, bool selftest, std::size_t threads) {
          CommandOptions o;
          o.out_dir = out;
          o.full = full;
          o.compare = compare;
          o.converge = converge;
          o.selftest = selftest;
          o.threads = threads;
          std::ostringstream so, se;
          int code;
          {
            py::gil_scoped_release release;
            code = run_command(command, config, o, so, se);
          }
          return py::make_tuple(code, so.str(), se.str());
        },
        py::arg("command"), py::arg("config"), py::arg("out") = py::none(), py::arg("full") = false,
        py::arg("compare") = false, py::arg("converge") = false, py::arg("selftest") = false, py::arg("threads") = 0,
        "Runs a CLI command; returns (exit_code, stdout, stderr).");
  m.def("config_schema", [] { return json_to_python(config_schema()); });
}
