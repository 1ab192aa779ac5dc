#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "nanofock/config.hpp"
#include "nanofock/constants.hpp"
#include "nanofock/error.hpp"
#include "nanofock/pipeline.hpp"

using namespace nanofock;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path kSource = NANOFOCK_SOURCE_DIR;

json fig2_document() {
  std::ifstream in(kSource / "configs" / "fig2_quoted.json");
  return json::parse(in, nullptr, true, true);
}

std::string expect_config_error(const json& doc) {
  try {
    parse_config(doc);
  } catch (const ConfigError& e) {
    return e.path();
  }
  FAIL("expected a config error");
  return {};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("nanofock_unit_cli_" + name);
  fs::remove_all(p);
  return p;
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("quantities carry units") {
  const double two_pi = 2.0 * std::numbers::pi;
  CHECK(parse_quantity("5.23 MHz", Dimension::AngularFrequency) == doctest::Approx(two_pi * 5.23e6));
  CHECK(parse_quantity("1e3 rad/s", Dimension::AngularFrequency) == doctest::Approx(1e3));
  CHECK(parse_quantity("1.35 mm", Dimension::Length) == doctest::Approx(1.35e-3));
  CHECK(parse_quantity("20 mK", Dimension::Temperature) == doctest::Approx(0.02));
  CHECK(parse_quantity("1.2 W", Dimension::Power) == doctest::Approx(1.2));
  CHECK(parse_quantity("1 deg", Dimension::Angle) == doctest::Approx(std::numbers::pi / 180.0));
  CHECK(parse_quantity("142 4pi_eps0_A2", Dimension::Polarizability) ==
        doctest::Approx(142.0 * constants::polarizability_unit_4pi_eps0_A2));
  CHECK(polarizability_unit_factor() == doctest::Approx(1.1126500560e-30).epsilon(1e-9));
  CHECK_THROWS_AS(parse_quantity("5.23", Dimension::AngularFrequency), ConfigError);
  CHECK_THROWS_AS(parse_quantity("5 furlong", Dimension::Length), ConfigError);
  CHECK_THROWS_AS(parse_quantity("5 mK", Dimension::Length), ConfigError);
}

TEST_CASE("config parsing is strict") {
  const json doc = fig2_document();
  const RunConfig rc = parse_config(doc);
  CHECK(rc.device.lasers.size() == 3);
  CHECK(rc.device.probe.has_value());
  CHECK(rc.simulation.mech_truncation == 10);
  CHECK(rc.hash.size() == 64);

  CHECK(expect_config_error(with_value(doc, "device.cavity.colour", "red")) == "device.cavity.colour");
  CHECK(expect_config_error(with_value(doc, "device.cavity.external_coupling_fraction", 1.5)) == "device.cavity");
  CHECK(expect_config_error(with_value(doc, "device.temperature", 0.02)) == "device.temperature");
  CHECK(expect_config_error(with_value(doc, "device.lasers[1].detuning", "+delta_0")) == "device.lasers[1].detuning");
  CHECK(expect_config_error(with_value(doc, "schema_version", 2)) == "schema_version");
  json missing = doc;
  missing["device"].erase("beam");
  CHECK(expect_config_error(missing) == "device.beam");
}

TEST_CASE("with_value edits nested paths") {
  const json doc = fig2_document();
  const json edited = with_value(doc, "device.lasers[2].coupling", "10 kHz");
  CHECK(edited["device"]["lasers"][2]["coupling"] == "10 kHz");
  CHECK(doc["device"]["lasers"][2]["coupling"] == "21 kHz");
  CHECK_THROWS_AS(with_value(doc, "device.lasers[7].coupling", "1 Hz"), ConfigError);
  CHECK_THROWS_AS(with_value(doc, "device..beam", 1), ConfigError);
}

TEST_CASE("config hashing is deterministic") {
  const json doc = fig2_document();
  CHECK(parse_config(doc).hash == parse_config(fig2_document()).hash);
  CHECK(parse_config(doc).hash != parse_config(with_value(doc, "device.temperature", "21 mK")).hash);
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("schema document") {
  const json s = config_schema();
  CHECK(s["$schema"] == "https://json-schema.org/draft/2020-12/schema");
  CHECK(s["properties"].contains("device"));
  CHECK(s["required"].size() >= 1);
}

TEST_CASE("device command writes derived parameters") {
  const fs::path out = scratch("device");
  std::ostringstream o, e;
  CommandOptions opts;
  opts.out_dir = out;
  CHECK(run_command("device", kSource / "configs" / "fig2.json", opts, o, e) == kExitSuccess);
  const json derived = read_json(out / "derived.json");
  CHECK(derived.contains("schema_version"));
  const json manifest = read_json(out / "manifest.json");
  CHECK(manifest["exit_code"] == 0);
  CHECK(manifest["config_sha256"].get<std::string>().size() == 64);
  CHECK(manifest["conventions"].contains("polarizability_unit"));

  const std::string first = read_text(out / "derived.json");
  std::ostringstream o2, e2;
  CHECK(run_command("device", kSource / "configs" / "fig2.json", opts, o2, e2) == kExitSuccess);
  CHECK(read_text(out / "derived.json") == first);
  fs::remove_all(out);
}

TEST_CASE("steady command outputs") {
  const fs::path out = scratch("steady");
  std::ostringstream o, e;
  CommandOptions opts;
  opts.out_dir = out;
  CHECK(run_command("steady", kSource / "configs" / "fig2_quoted.json", opts, o, e) == kExitSuccess);
  const json pops = read_json(out / "populations.json");
  CHECK(pops["reduced"]["populations"][1].get<double>() == doctest::Approx(0.91).epsilon(0.05 / 0.91));
  const std::string csv = read_text(out / "wigner.csv");
  CHECK(csv.rfind("# nanofock", 0) == 0);
  CHECK(csv.find("\nx,p,w\n") != std::string::npos);
  fs::remove_all(out);
}

TEST_CASE("errors map to exit codes") {
  std::ostringstream o, e;
  CommandOptions opts;
  opts.out_dir = scratch("errors");
  CHECK(run_command("device", kSource / "configs" / "no_such_file.json", opts, o, e) == kExitConfigError);
  CHECK(run_command("bogus", kSource / "configs" / "fig2.json", opts, o, e) == kExitConfigError);
  CHECK(read_json(*opts.out_dir / "manifest.json")["status"] == "config-error");
  fs::remove_all(*opts.out_dir);
}
