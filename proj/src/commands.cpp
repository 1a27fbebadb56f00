#include "arwflow/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>

#include "arwflow/errors.hpp"

namespace arwflow {

RunOutcome execute_run(const RunConfig& config, const CheckThresholds& thresholds) {
  const ArwBackground background(config.background);
  const Grid grid = config.make_grid();
  const FlowIntegrator integrator(background, CurvatureFunctional(config.curvature, config.background.n),
                                  config.flow);
  DiagnosticsRecorder recorder(background);
  RunOutcome outcome;
  outcome.summary = integrator.run(config.initial_height(grid), recorder);
  outcome.report = assess_run(outcome.summary, recorder, config.background, thresholds);
  outcome.records = recorder.records();
  return outcome;
}

std::filesystem::path resolve_output_path(const std::string& configured) {
  const char* dir = std::getenv(kOutputDirEnv);
  if (dir == nullptr || *dir == '\0') return configured;
  return std::filesystem::path(dir) / std::filesystem::path(configured).filename();
}

namespace {

void ensure_parent(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
}

bool is_validation_error(ErrorKind kind) {
  return kind == ErrorKind::InvalidConfig || kind == ErrorKind::OutOfRange ||
         kind == ErrorKind::InvalidInitialData || kind == ErrorKind::Io;
}

int run_exit_code(const RunSummary& summary) {
  return summary.stop_reason == StopReason::StepFailure || summary.stop_reason == StopReason::PinchingViolation
             ? kExitStepFailure
             : kExitOk;
}

}  // namespace

int cmd_run(const std::filesystem::path& config_path, std::ostream& out, std::ostream& err) {
  RunConfig config;
  try {
    config = load_config(config_path);
  } catch (const FlowError& e) {
    err << e.what() << '\n';
    return kExitValidation;
  }
  const ValidationReport validity = validate_arw(config.background);
  if (!validity.passed()) {
    err << "background fails validation:\n" << validity.to_text();
    return kExitValidation;
  }

  RunOutcome outcome;
  try {
    outcome = execute_run(config);
  } catch (const FlowError& e) {
    err << e.what() << '\n';
    return is_validation_error(e.kind()) ? kExitValidation : kExitFailure;
  }

  try {
    const auto csv = resolve_output_path(config.csv_path);
    const auto json = resolve_output_path(config.json_path);
    ensure_parent(csv);
    ensure_parent(json);
    write_records_csv(outcome.records, csv);
    write_json(report_to_json(outcome.report, config.to_map()), json);
    out << "wrote " << csv.string() << " and " << json.string() << '\n';
  } catch (const std::exception& e) {
    err << e.what() << '\n';
    return kExitFailure;
  }

  const RunSummary& s = outcome.summary;
  out << "stop_reason " << to_string(s.stop_reason) << " at t = " << s.t_final << ", " << s.steps_accepted
      << " steps (" << s.steps_rejected << " rejected)\n";
  out << "osc(u_tilde) " << s.osc_initial << " -> " << s.osc_final << '\n';
  if (!s.message.empty()) out << s.message << '\n';
  return run_exit_code(s);
}

int cmd_validate_background(const std::filesystem::path& config_path, std::ostream& out, std::ostream& err) {
  RunConfig config;
  try {
    config = load_config(config_path);
  } catch (const FlowError& e) {
    err << e.what() << '\n';
    return kExitValidation;
  }
  const ValidationReport report = validate_arw(config.background);
  out << report.to_text();
  return report.passed() ? kExitOk : kExitValidation;
}

namespace {

struct MaxError : SnapshotSink {
  std::function<double(const GraphState&, const GeometryBundle&)> error;
  double worst = 0.0;
  void consume(const GraphState& s, const GeometryBundle& b, long, double) override {
    worst = std::max(worst, error(s, b));
  }
};

double sup_abs_diff(const ScalarField& a, const ScalarField& b) {
  double worst = 0.0;
  for (std::size_t p = 0; p < a.size(); ++p) worst = std::max(worst, std::abs(a[p] - b[p]));
  return worst;
}

FlowConfig oracle_flow(std::optional<double> dt, double t_max) {
  FlowConfig flow;
  flow.t_max = t_max;
  flow.output_interval = 0.5;
  flow.dt_max = 0.01;
  flow.dt_fixed = dt;
  flow.max_halvings = 0;
  return flow;
}

// Worst error of the spatially constant exact solution u0 e^{-gamma t}.
double homogeneous_error(int n, double omega, bool rescaled, std::optional<double> dt) {
  BackgroundParams params;
  params.n = n;
  params.omega = omega;
  const ArwBackground background(params);
  const double gamma = background.gamma();
  const Grid grid(n, 16);
  FlowConfig flow = oracle_flow(dt, 5.0);
  flow.rescaled = rescaled;
  const FlowIntegrator integrator(background, CurvatureFunctional(CurvatureKind::Mean, n), flow);
  MaxError sink;
  sink.error = [&](const GraphState& s, const GeometryBundle&) {
    const double exact = -0.5 * std::exp(-gamma * s.t);
    return sup_abs_diff(s.height(gamma), ScalarField(grid, exact)) + oscillation(s.w);
  };
  const RunSummary summary = integrator.run(ScalarField(grid, -0.5), sink);
  if (summary.stop_reason == StopReason::StepFailure) return std::numeric_limits<double>::infinity();
  return sink.worst;
}

// sigma-perturbed background, spatially constant height: Du = 0 and
// F(u) = n (delta p (-u)^{p-1} / (2 s) - f'(u)), so t(u) has the closed form
//   t = -(n / gt) ln(u / u0) - (n / 2) ln(s(u) / s(u0)).
double sigma_quadrature_error(int n, CurvatureKind kind, std::optional<double> dt) {
  BackgroundParams params;
  params.n = n;
  params.omega = 3.0;
  params.delta = 0.2;
  params.p_sigma = 2;
  const ArwBackground background(params);
  const double gamma = background.gamma();
  const double gt = background.gamma_tilde();
  const double u0 = -0.5;
  auto s = [&](double u) { return 1.0 + params.delta * std::pow(-u, params.p_sigma); };
  auto elapsed = [&](double u) { return -(n / gt) * std::log(u / u0) - 0.5 * n * std::log(s(u) / s(u0)); };
  auto exact_height = [&](double t) {
    double lo = u0, hi = 0.0;  // elapsed increases from 0 toward infinity on (u0, 0)
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (elapsed(mid) < t ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };
  const Grid grid(n, 16);
  const FlowIntegrator integrator(background, CurvatureFunctional(kind, n), oracle_flow(dt, 3.0));
  MaxError sink;
  sink.error = [&](const GraphState& st, const GeometryBundle&) {
    return sup_abs_diff(st.height(gamma), ScalarField(grid, exact_height(st.t)));
  };
  const RunSummary summary = integrator.run(ScalarField(grid, u0), sink);
  if (summary.stop_reason == StopReason::StepFailure) return std::numeric_limits<double>::infinity();
  return sink.worst;
}

// Poisson-kernel bump with mean zero: smooth, not band limited.
double poisson_bump(double theta, double r) {
  return (1.0 - r * r) / (1.0 - 2.0 * r * std::cos(theta) + r * r) - 1.0;
}

double dual_path_error(int n) {
  BackgroundParams params;
  params.n = n;
  params.omega = 2.5;
  params.epsilon = 0.02;
  params.delta = 0.05;
  const ArwBackground background(params);
  const Grid grid(n, 64);
  GraphState state{0.0, ScalarField::sample(grid, [&](const Point& x) {
                     double u = -0.6 + 0.03 * poisson_bump(x[0] - 0.4, 0.4);
                     if (n == 2) u += 0.02 * poisson_bump(x[1] + 1.1, 0.35) + 0.01 * std::sin(x[0] + 2.0 * x[1]);
                     return u;
                   })};
  const GeometryBundle bundle = build_geometry(state, background, CurvatureFunctional(CurvatureKind::Mean, n));
  const SymTensorField ambient = second_fundamental_ambient(state, background);
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) worst = std::max(worst, sup_abs_diff(bundle.h(i, j), ambient(i, j)));
  }
  return worst;
}

}  // namespace

std::vector<OracleRow> oracle_rows(std::optional<double> dt) {
  constexpr double kTol = 1e-8;
  std::vector<OracleRow> rows;
  auto add = [&](std::string name, auto&& compute) {
    double error;
    try {
      error = compute();
    } catch (const FlowError&) {
      error = std::numeric_limits<double>::infinity();
    }
    if (!std::isfinite(error)) error = std::numeric_limits<double>::infinity();
    rows.push_back({std::move(name), error, kTol});
  };
  add("homogeneous_n2_rescaled", [&] { return homogeneous_error(2, 2.0, true, dt); });
  add("homogeneous_n1_rescaled", [&] { return homogeneous_error(1, 3.0, true, dt); });
  add("homogeneous_n2_raw_u_rk4", [&] { return homogeneous_error(2, 2.0, false, dt); });
  add("homogeneous_n1_raw_u_rk4", [&] { return homogeneous_error(1, 3.0, false, dt); });
  add("sigma_quadrature_n2_mean", [&] { return sigma_quadrature_error(2, CurvatureKind::Mean, dt); });
  add("sigma_quadrature_n2_gauss_root", [&] { return sigma_quadrature_error(2, CurvatureKind::GaussRoot, dt); });
  add("sigma_quadrature_n1_mean", [&] { return sigma_quadrature_error(1, CurvatureKind::Mean, dt); });
  add("dual_path_h_n1", [] { return dual_path_error(1); });
  add("dual_path_h_n2", [] { return dual_path_error(2); });
  return rows;
}

int cmd_oracle(std::optional<double> dt, std::ostream& out, std::ostream& err) {
  if (dt && !(*dt > 0.0)) {
    err << "--dt must be positive\n";
    return kExitValidation;
  }
  const auto rows = oracle_rows(dt);
  bool ok = true;
  out << std::left << std::setw(34) << "oracle" << std::setw(14) << "error" << std::setw(10) << "tol"
      << "status\n";
  for (const auto& row : rows) {
    out << std::left << std::setw(34) << row.name << std::setw(14) << std::setprecision(3) << std::scientific
        << row.error << std::setw(10) << row.tolerance << (row.passed() ? "ok" : "FAIL") << '\n';
    if (!row.passed()) {
      ok = false;
      err << "oracle row '" << row.name << "' failed: error " << row.error << " >= " << row.tolerance << '\n';
    }
  }
  out << std::defaultfloat;
  return ok ? kExitOk : kExitFailure;
}

namespace {

std::string resolve_parameter(const std::string& name) {
  const auto& keys = config_keys();
  if (std::find(keys.begin(), keys.end(), name) != keys.end()) return name;
  std::string match;
  for (const auto& key : keys) {
    if (key.size() > name.size() && key.compare(key.size() - name.size(), name.size(), name) == 0 &&
        key[key.size() - name.size() - 1] == '.') {
      if (!match.empty()) throw FlowError(ErrorKind::InvalidConfig, "parameter '" + name + "' is ambiguous");
      match = key;
    }
  }
  if (match.empty()) throw FlowError(ErrorKind::InvalidConfig, "unknown parameter '" + name + "'");
  return match;
}

std::string optional_number(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

}  // namespace

int cmd_sweep(const std::filesystem::path& config_path, const std::string& parameter,
              const std::vector<std::string>& values, std::ostream& out, std::ostream& err) {
  if (values.empty()) {
    err << "sweep needs at least one value\n";
    return kExitValidation;
  }
  RunConfig base;
  std::string key;
  std::vector<RunConfig> configs;
  try {
    base = load_config(config_path);
    key = resolve_parameter(parameter);
    for (const auto& value : values) configs.push_back(with_override(base, key, value));
  } catch (const FlowError& e) {
    err << e.what() << '\n';
    return kExitValidation;
  }
  for (std::size_t k = 0; k < configs.size(); ++k) {
    const ValidationReport validity = validate_arw(configs[k].background);
    if (!validity.passed()) {
      err << key << " = " << values[k] << ": background fails validation:\n" << validity.to_text();
      return kExitValidation;
    }
  }

  std::string csv =
      "parameter,value,stop_reason,t_final,osc_initial,osc_final,umbilicity_ratio_fitted,"
      "umbilicity_ratio_predicted,umbilicity_sup_fitted,umbilicity_sup_predicted,metric_error_final,"
      "F_times_minus_u_err_final,constancy,pinching,umbilicity_rate\n";
  int code = kExitOk;
  for (std::size_t k = 0; k < configs.size(); ++k) {
    RunOutcome outcome;
    try {
      outcome = execute_run(configs[k]);
    } catch (const FlowError& e) {
      err << key << " = " << values[k] << ": " << e.what() << '\n';
      return is_validation_error(e.kind()) ? kExitValidation : kExitFailure;
    }
    const RunReport& r = outcome.report;
    const auto& last = outcome.records.back();
    std::optional<double> ratio_fit, sup_fit;
    if (r.umbilicity_ratio.fit) ratio_fit = r.umbilicity_ratio.fit->slope;
    if (r.umbilicity_sup && r.umbilicity_sup->fit) sup_fit = r.umbilicity_sup->fit->slope;
    csv += key + "," + values[k] + "," + std::string(to_string(outcome.summary.stop_reason)) + "," +
           format_number(outcome.summary.t_final) + "," + format_number(outcome.summary.osc_initial) + "," +
           format_number(outcome.summary.osc_final) + "," + optional_number(ratio_fit) + "," +
           format_number(predicted_umbilicity_ratio_slope(configs[k].background)) + "," +
           optional_number(sup_fit) + "," +
           optional_number(predicted_umbilicity_sup_slope(configs[k].background)) + "," +
           format_number(last.metric_error) + "," + format_number(last.F_times_minus_u_err) + "," +
           (r.checks.constancy ? "true" : "false") + "," + (r.checks.pinching ? "true" : "false") + "," +
           (r.checks.umbilicity_rate ? "true" : "false") + "\n";
    out << key << " = " << values[k] << ": " << to_string(outcome.summary.stop_reason) << ", osc "
        << outcome.summary.osc_initial << " -> " << outcome.summary.osc_final << '\n';
    if (run_exit_code(outcome.summary) != kExitOk) code = kExitStepFailure;
  }

  const std::string short_name = key.substr(key.find('.') + 1);
  const auto path = resolve_output_path("sweep_" + short_name + ".csv");
  try {
    ensure_parent(path);
    std::ofstream file(path);
    if (!file) throw FlowError(ErrorKind::Io, "cannot open " + path.string() + " for writing");
    file << csv;
  } catch (const std::exception& e) {
    err << e.what() << '\n';
    return kExitFailure;
  }
  out << "wrote " << path.string() << '\n';
  return code;
}

}  // namespace arwflow
