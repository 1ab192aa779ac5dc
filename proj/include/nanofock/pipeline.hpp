#pragma once

// Command orchestration shared by the command-line tool and the Python module.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "nanofock/config.hpp"
#include "nanofock/wigner.hpp"

namespace nanofock {

std::string version();

enum ExitCode : int {
  kExitSuccess = 0,
  kExitConfigError = 1,
  kExitRegimeFailure = 2,
  kExitPreconditionFailure = 3,
  kExitSolverFailure = 4,
};

struct CommandOptions {
  /// Overrides output.directory from the configuration when set.
  std::optional<std::filesystem::path> out_dir;
  bool full = false;
  bool compare = false;
  bool converge = false;
  bool selftest = false;
  /// Sweep workers; 0 picks the hardware concurrency.
  std::size_t threads = 0;
};

/// Runs device | validate | steady | spectrum | sweep and returns the exit code.
/// Diagnostics go to `err`, human-readable summaries to `out`.
int run_command(const std::string& command, const std::filesystem::path& config_path, const CommandOptions& options,
                std::ostream& out, std::ostream& err);

nlohmann::json to_json(const DerivedParams& derived);
nlohmann::json to_json(const ValidationReport& report);
nlohmann::json to_json(const SolverDiagnostics& diagnostics);

/// Reduced (ratio-recursion) populations. With `converge`, doubles the truncation
/// until the populations move by less than the configured tolerance.
SteadyState reduced_populations(const RunConfig& config, const DerivedParams& derived, bool converge);
/// Full master-equation steady state, optionally converged in the mechanical truncation.
SteadyState full_populations(const RunConfig& config, const DerivedParams& derived, bool converge);

struct ComparisonRow {
  std::size_t n = 0;
  double reduced = 0.0;
  double full = 0.0;
  double abs_diff = 0.0;
};
std::vector<ComparisonRow> compare_populations(const std::vector<double>& reduced, const std::vector<double>& full);

QuadratureGrid wigner_grid(const SimulationSettings& simulation, std::size_t levels);

/// Round trip of `populations` through power_spectrum and populations_from_spectrum; returns the max error.
double spectrum_selftest(const DerivedParams& derived, const SimulationSettings& simulation,
                         const std::vector<double>& populations, std::vector<double>* recovered = nullptr);

}  // namespace nanofock
