#pragma once

// Run configuration: a JSON document with a device, simulation, output and
// optional sweep section. Dimensioned fields are strings with an explicit unit
// ("5.23 MHz", "20 mK"); frequencies given in Hz are converted to rad/s.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "nanofock/device.hpp"
#include "nanofock/liouvillian.hpp"
#include "nanofock/spectrum.hpp"

namespace nanofock {

inline constexpr int kConfigSchemaVersion = 1;

enum class Dimension {
  Length,
  InverseLength,
  AngularFrequency,
  Power,
  Temperature,
  Mass,
  LinearDensity,
  Speed,
  Stiffness,
  Conductance,
  Angle,
  Polarizability,
  ElectricField,
};

std::string to_string(Dimension d);

/// Parses "<number> <unit>" into SI (angular units for frequencies). `path` labels errors.
double parse_quantity(const std::string& text, Dimension dimension, const std::string& path = {});

/// One 4 pi eps0 A^2 in F*m, the per-length polarizability unit.
double polarizability_unit_factor();

struct SimulationSettings {
  std::size_t mech_truncation = 10;
  std::size_t cavity_truncation = 2;
  SolverMethod solver = SolverMethod::Auto;
  bool include_reduced_shifts = false;
  SpectrumOptions spectrum;
  std::size_t spectrum_points_per_linewidth = 10;
  std::size_t wigner_points = 161;
  std::optional<double> wigner_extent;
  std::size_t regime_levels = 6;
  RegimeThresholds thresholds;
  double converge_tolerance = 1e-3;
  std::size_t converge_max_truncation = 640;
  double max_superoperator_nonzeros = 5e7;
  std::vector<double> selftest_populations{0.05, 0.9, 0.05};
};

struct OutputSettings {
  std::string directory = "out";
};

struct SweepSpec {
  /// Dotted path into the configuration, e.g. "device.lasers[0].input_power".
  std::string parameter;
  /// One configuration value per point, in sweep order.
  std::vector<nlohmann::json> values;
};

struct RunConfig {
  nlohmann::json source;
  DeviceSpec device;
  SimulationSettings simulation;
  OutputSettings output;
  std::optional<SweepSpec> sweep;
  /// SHA-256 of the canonical (sorted-key, compact) serialization of `source`.
  std::string hash;
};

/// Parses and validates; throws ConfigError naming the offending field.
RunConfig parse_config(const nlohmann::json& document);
RunConfig load_config(const std::filesystem::path& path);

/// JSON Schema (draft 2020-12) describing the accepted documents.
nlohmann::json config_schema();

/// Replaces the value at a dotted path ("a.b[2].c"); throws ConfigError if the path does not exist.
nlohmann::json with_value(const nlohmann::json& document, const std::string& path, const nlohmann::json& value);

SystemConfig system_config(const RunConfig& config, const DerivedParams& derived, std::size_t mech_truncation);

std::string sha256_hex(const std::string& bytes);

}  // namespace nanofock
