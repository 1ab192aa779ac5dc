#include <iostream>

#include "CLI11.hpp"
#include "nanofock/config.hpp"
#include "nanofock/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Fock-state preparation of nonlinear nanomechanical resonators"};
  app.set_version_flag("--version", nanofock::version());

  bool print_schema = false;
  app.add_flag("--print-schema", print_schema, "Print the configuration JSON schema and exit");

  std::string config;
  std::string out_dir;
  nanofock::CommandOptions options;
  const char* commands[][2] = {
      {"device", "Derived device parameters and regime checks"},
      {"validate", "Regime checks only, as JSON"},
      {"steady", "Steady-state populations and Wigner function"},
      {"spectrum", "Probe power spectrum and its inversion"},
      {"sweep", "Parameter sweep over the configuration's sweep section"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "Output directory (overrides output.directory)");
    sub->add_flag("--converge", options.converge, "Double the mechanical truncation until populations settle");
    const std::string n = name;
    if (n == "steady") {
      sub->add_flag("--full", options.full, "Also solve the full master equation");
      sub->add_flag("--compare", options.compare, "Per-level comparison of reduced and full populations (implies --full)");
    }
    if (n == "spectrum") sub->add_flag("--selftest", options.selftest, "Synthetic round trip through the inversion");
    if (n == "sweep") sub->add_option("--threads", options.threads, "Worker threads (0 = all cores)");
  }
  app.require_subcommand(0, 1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : nanofock::kExitConfigError;
  }
  if (print_schema) {
    std::cout << nanofock::config_schema().dump(2) << '\n';
    return nanofock::kExitSuccess;
  }
  if (app.get_subcommands().empty()) {
    std::cerr << app.help();
    return nanofock::kExitConfigError;
  }
  if (!out_dir.empty()) options.out_dir = out_dir;
  return nanofock::run_command(app.get_subcommands().front()->get_name(), config, options, std::cout, std::cerr);
}
