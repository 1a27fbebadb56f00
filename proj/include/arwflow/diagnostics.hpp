#pragma once

// Observables along a flow run: constancy of the rescaled height, umbilicity,
// rescaled-metric convergence, the F (-u) limit, and residuals of the limit
// identities
//
//   R1 = sup | (|Du|^2)' e^{2 gamma t} - 2 gamma Lap(w) w |
//   R2 = sup | (vt^2)'   e^{2 gamma t} + 2 gamma |Dw|^2 |
//   R3 = sup | |Dw|^2 + Lap(w) w |
//
// with norms and Laplacian taken in the induced metric g, w the rescaled height.

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "arwflow/background.hpp"
#include "arwflow/flow.hpp"
#include "arwflow/geometry.hpp"

namespace arwflow {

struct DiagnosticsRecord {
  double t = 0.0;
  double osc_u_tilde = 0.0;
  double min_u_tilde = 0.0;
  double max_u_tilde = 0.0;
  double sup_Du = 0.0;  // sup |Du|_sigma, must stay below 1
  double F_times_minus_u_err = 0.0;
  double umbilicity_sup = 0.0;
  double umbilicity_ratio = 0.0;
  double metric_error = 0.0;
  double R1 = 0.0;
  double R2 = 0.0;
  double R3 = 0.0;
  double dt = 0.0;
  long steps = 0;
};

// Column names in record field order.
const std::vector<std::string>& record_columns();
double record_value(const DiagnosticsRecord& record, std::string_view column);

DiagnosticsRecord observe(const GraphState& state, const GeometryBundle& bundle, const ArwBackground& background);

// Pointwise fields entering R1 - R3 at one time.
struct ResidualSnapshot {
  double t;
  ScalarField du_norm2;      // g^{ij} u_i u_j
  ScalarField vt2_minus_one; // vt^2 - 1
  ScalarField lap_term;      // Lap_g(w) w
  ScalarField grad_term;     // g^{ij} w_i w_j
};

ResidualSnapshot residual_snapshot(const GraphState& state, const GeometryBundle& bundle);

struct Residuals {
  double R1;
  double R2;
  double R3;
  // Sign agreement fraction between 2 gamma Lap(w) w and (|Du|^2)' e^{2 gamma t}
  // over points where both exceed a noise floor.
  double sign_agreement;
};

// Time derivatives from the quadratic through three snapshots with distinct
// times, evaluated at window[at] (at = 1 gives the centered difference; 0 and 2
// the second-order one-sided ones). Throws NotReady on repeated times.
Residuals compute_residuals(const std::array<const ResidualSnapshot*, 3>& window, int at, double gamma);
// Two-snapshot difference quotient evaluated at window[at], for runs with
// only two records.
Residuals compute_residuals(const std::array<const ResidualSnapshot*, 2>& window, int at, double gamma);

// Accumulates records from a run and fills R1 - R3 by centered differences
// of consecutive snapshots (second-order one-sided at the ends).
class DiagnosticsRecorder : public SnapshotSink {
 public:
  explicit DiagnosticsRecorder(const ArwBackground& background) : background_(background) {}

  void consume(const GraphState& state, const GeometryBundle& bundle, long steps, double dt) override;
  void finish() override;

  const std::vector<DiagnosticsRecord>& records() const { return records_; }
  const std::vector<double>& tail_ratios() const { return tail_ratios_; }
  const std::vector<double>& sign_agreement() const { return sign_agreement_; }
  // Throws NotReady with fewer than two snapshots.
  Residuals latest_residuals() const;

 private:
  void fill(std::size_t index, const Residuals& residuals);

  ArwBackground background_;
  std::vector<DiagnosticsRecord> records_;
  std::vector<double> tail_ratios_;
  std::vector<double> sign_agreement_;
  std::vector<ResidualSnapshot> window_;  // at most the last three snapshots
  bool finished_ = false;
};

struct RateFit {
  std::string quantity;
  double t_begin = 0.0;
  double t_end = 0.0;
  std::size_t samples = 0;
  double slope = 0.0;
  double intercept = 0.0;
  double predicted = 0.0;
  double relative_deviation = 0.0;
};

// Least-squares slope of ln(quantity) against t over records with t in
// [t_begin, t_end]. Throws FitUndefined for nonpositive values or fewer than
// 10 samples.
RateFit fit_rate(const std::vector<DiagnosticsRecord>& records, std::string_view quantity, double t_begin,
                 double t_end, double predicted);

// Predicted exponents: -2 gamma for umbilicity_ratio; -(n + omega - 4) / (2n)
// for umbilicity_sup, only when n + omega - 4 > 0.
double predicted_umbilicity_ratio_slope(const BackgroundParams& params);
std::optional<double> predicted_umbilicity_sup_slope(const BackgroundParams& params);

struct CheckThresholds {
  double osc_final_abs = 1e-3;
  double osc_final_rel = 1e-2;
  double pinching_lower_factor = 1.6;  // band [1.6 mean0, 0.4 mean0]
  double pinching_upper_factor = 0.4;
  double rate_tolerance = 0.15;
  double umbilicity_floor = 1e-9;
  double metric_final = 1e-4;
  double F_limit_final = 1e-4;
  double identity_factor = 1e-3;
  double identity_reference_t = 1.0;
  double tail_ratio_max = 1e-8;
};

struct RateOutcome {
  std::optional<RateFit> fit;
  double predicted = 0.0;
  bool converged_floor = false;
  bool passed = false;
  std::string note;
};

struct RunChecks {
  bool constancy = false;
  bool pinching = false;
  bool umbilicity_rate = false;
  bool metric_convergence = false;
  bool F_limit = false;
  bool identities = false;
  bool resolved = false;
};

struct RunReport {
  RunSummary summary;
  RateOutcome umbilicity_ratio;
  std::optional<RateOutcome> umbilicity_sup;
  RunChecks checks;
  double identity_R1_ratio = 0.0;  // max tail R1 / R1(t_ref)
  double identity_R2_ratio = 0.0;
};

// Rate window: last third of the run. Identity window: last sixth.
RunReport assess_run(const RunSummary& summary, const DiagnosticsRecorder& recorder,
                     const BackgroundParams& params, const CheckThresholds& thresholds = {});

// CSV: header plus one row per record, shortest round-trip decimal formatting.
void write_records_csv(const std::vector<DiagnosticsRecord>& records, const std::filesystem::path& path);
std::string records_to_csv(const std::vector<DiagnosticsRecord>& records);
std::vector<DiagnosticsRecord> parse_records_csv(const std::string& text);

// Summary document: stop reason, step statistics, fitted rates under
// "rates.<quantity>", pass flags under "checks", and the echoed configuration.
nlohmann::json report_to_json(const RunReport& report, const std::map<std::string, std::string>& config_echo);
void write_json(const nlohmann::json& doc, const std::filesystem::path& path);

}  // namespace arwflow
