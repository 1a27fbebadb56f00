#pragma once

// Command implementations behind the arwflow executable. Each returns the
// process exit code and writes human-readable output to the given streams.

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "arwflow/config.hpp"
#include "arwflow/diagnostics.hpp"

namespace arwflow {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitStepFailure = 3;

// Environment variable redirecting CSV/JSON outputs into a directory.
inline constexpr const char* kOutputDirEnv = "ICF_OUTPUT_DIR";

struct RunOutcome {
  RunSummary summary;
  RunReport report;
  std::vector<DiagnosticsRecord> records;
};

// Builds background, grid and integrator from the config and runs the flow.
// Throws FlowError (OutOfRange, InvalidConfig, InvalidInitialData) when the
// setup is unusable.
RunOutcome execute_run(const RunConfig& config, const CheckThresholds& thresholds = {});

// Where an output file lands, honouring ICF_OUTPUT_DIR (file name kept).
std::filesystem::path resolve_output_path(const std::string& configured);

int cmd_run(const std::filesystem::path& config_path, std::ostream& out, std::ostream& err);
int cmd_validate_background(const std::filesystem::path& config_path, std::ostream& out, std::ostream& err);

struct OracleRow {
  std::string name;
  double error = 0.0;
  double tolerance = 0.0;
  bool passed() const { return error < tolerance; }
};

// Exact-solution and dual-path checks. dt forces a fixed step on the
// time-stepping rows.
std::vector<OracleRow> oracle_rows(std::optional<double> dt = std::nullopt);
int cmd_oracle(std::optional<double> dt, std::ostream& out, std::ostream& err);

int cmd_sweep(const std::filesystem::path& config_path, const std::string& parameter,
              const std::vector<std::string>& values, std::ostream& out, std::ostream& err);

}  // namespace arwflow
