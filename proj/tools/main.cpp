#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "arwflow/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Inverse curvature flow of spacelike graphs in ARW spacetimes"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "integrate the flow and write CSV + JSON outputs");
  run->add_option("config", config_path, "configuration file")->required();

  auto* validate = app.add_subcommand("validate-background", "check the ARW conditions for a background");
  validate->add_option("config", config_path, "configuration file")->required();

  std::optional<double> dt;
  auto* oracle = app.add_subcommand("oracle", "exact-solution and dual-path checks");
  oracle->add_option("--dt", dt, "force a fixed time step");

  std::string parameter;
  std::vector<std::string> values;
  std::string values_text;
  auto* sweep = app.add_subcommand("sweep", "run one config over several values of a parameter");
  sweep->add_option("config", config_path, "configuration file")->required();
  sweep->add_option("--param", parameter, "parameter key, e.g. omega or background.omega")->required();
  sweep->add_option("--values", values_text, "comma separated values")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : arwflow::kExitValidation;
  }

  if (*run) return arwflow::cmd_run(config_path, std::cout, std::cerr);
  if (*validate) return arwflow::cmd_validate_background(config_path, std::cout, std::cerr);
  if (*oracle) return arwflow::cmd_oracle(dt, std::cout, std::cerr);
  if (*sweep) {
    std::size_t start = 0;
    while (start <= values_text.size() && !values_text.empty()) {
      const auto comma = std::min(values_text.find(',', start), values_text.size());
      const std::string item = values_text.substr(start, comma - start);
      if (!item.empty()) values.push_back(item);
      start = comma + 1;
    }
    return arwflow::cmd_sweep(config_path, parameter, values, std::cout, std::cerr);
  }
  return arwflow::kExitValidation;
}
