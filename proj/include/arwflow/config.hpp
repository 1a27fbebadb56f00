#pragma once

// Run configuration: a plain text file of dotted `section.key = value` lines,
// `#` starting a comment. Sections: background, grid, flow, initial, output.
//
//   background.n = 2
//   initial.u0_modes = 1 0 0.05 sin; 0 1 0.01 cos
//
// Every field has a default, so a file only lists what it changes.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "arwflow/background.hpp"
#include "arwflow/curvature.hpp"
#include "arwflow/flow.hpp"
#include "arwflow/grid.hpp"

namespace arwflow {

struct InitialMode {
  std::array<int, 2> wave{1, 0};
  double amplitude = 0.0;
  bool sine = true;

  bool operator==(const InitialMode&) const = default;
};

struct RunConfig {
  BackgroundParams background;
  int points_per_axis = 64;
  DerivativeScheme scheme = DerivativeScheme::Spectral;
  CurvatureKind curvature = CurvatureKind::Mean;
  FlowConfig flow;
  double u0_mean = -0.5;
  std::vector<InitialMode> u0_modes;
  std::string csv_path = "diagnostics.csv";
  std::string json_path = "summary.json";

  // Canonical key/value form; from_map(to_map()) reproduces the config.
  std::map<std::string, std::string> to_map() const;
  static RunConfig from_map(const std::map<std::string, std::string>& entries);

  Grid make_grid() const;
  ScalarField initial_height(const Grid& grid) const;
};

bool operator==(const RunConfig& a, const RunConfig& b);

// Keys accepted in a configuration file.
const std::vector<std::string>& config_keys();

// Throws InvalidConfig for unknown keys, malformed lines or values, naming the
// source and line. Field-level validation (u0_mean < 0, grid size, flow
// limits) also raises InvalidConfig.
RunConfig parse_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_config(const std::filesystem::path& path);

// Sets one key on an existing config, with the same checks as parsing.
RunConfig with_override(const RunConfig& config, const std::string& key, const std::string& value);

std::string format_number(double value);

}  // namespace arwflow
