#include "arwflow/diagnostics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "arwflow/errors.hpp"

namespace arwflow {

const std::vector<std::string>& record_columns() {
  static const std::vector<std::string> columns = {
      "t",        "osc_u_tilde", "min_u_tilde", "max_u_tilde", "sup_Du", "F_times_minus_u_err", "umbilicity_sup",
      "umbilicity_ratio", "metric_error", "R1", "R2", "R3", "dt", "steps"};
  return columns;
}

double record_value(const DiagnosticsRecord& r, std::string_view column) {
  if (column == "t") return r.t;
  if (column == "osc_u_tilde") return r.osc_u_tilde;
  if (column == "min_u_tilde") return r.min_u_tilde;
  if (column == "max_u_tilde") return r.max_u_tilde;
  if (column == "sup_Du") return r.sup_Du;
  if (column == "F_times_minus_u_err") return r.F_times_minus_u_err;
  if (column == "umbilicity_sup") return r.umbilicity_sup;
  if (column == "umbilicity_ratio") return r.umbilicity_ratio;
  if (column == "metric_error") return r.metric_error;
  if (column == "R1") return r.R1;
  if (column == "R2") return r.R2;
  if (column == "R3") return r.R3;
  if (column == "dt") return r.dt;
  if (column == "steps") return static_cast<double>(r.steps);
  throw FlowError(ErrorKind::InvalidConfig, "unknown diagnostics column '" + std::string(column) + "'");
}

DiagnosticsRecord observe(const GraphState& state, const GeometryBundle& b, const ArwBackground& background) {
  const Grid& grid = b.grid();
  const int n = grid.dim();
  const auto& params = background.params();
  const double gt = background.gamma_tilde();
  const double inv_gamma = 1.0 / background.gamma();
  const double mass_factor = std::pow(gt * gt * params.mass_m, 1.0 / gt);

  DiagnosticsRecord r;
  r.t = state.t;
  r.min_u_tilde = state.w.min();
  r.max_u_tilde = state.w.max();
  r.osc_u_tilde = oscillation(state.w);

  for (std::size_t p = 0; p < grid.size(); ++p) {
    double du2 = 0.0;
    for (int i = 0; i < n; ++i) du2 += b.du[i][p] * b.u_up[i][p];
    r.sup_Du = std::max(r.sup_Du, std::sqrt(du2));
    r.F_times_minus_u_err = std::max(r.F_times_minus_u_err, std::abs(b.F[p] * (-b.u[p]) - inv_gamma));

    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const double defect = std::abs(b.umbilic_defect(i, j)[p]);
        r.umbilicity_sup = std::max(r.umbilicity_sup, b.exp_minus_psi_tilde[p] * defect);
        r.umbilicity_ratio = std::max(r.umbilicity_ratio, defect / b.F[p]);
      }
    }

    // e^{2t/n} breve_g_ij - T sigma_bar_ij with T = (gt^2 m)^{1/gt} (-w)^{2/gt}. Since
    // e^{2t/n} e^{2 f(u)} = T exactly, this is T (e^{2 psi} (s delta_ij - u_i u_j) - delta_ij),
    // which is evaluated without cancellation.
    const double target = mass_factor * std::pow(-state.w[p], 2.0 / gt);
    const double psi = background.psi_at(b.u[p], grid.coordinates(p)).psi;
    const double sigma_excess =
        params.delta == 0.0 ? 0.0
                            : params.delta * (params.p_sigma == 0 ? 1.0 : std::pow(-b.u[p], params.p_sigma));
    const double e2psi = std::exp(2.0 * psi);
    const double diagonal_excess = std::expm1(2.0 * psi) * (1.0 + sigma_excess) + sigma_excess;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const double value = (i == j ? diagonal_excess : 0.0) - e2psi * b.du[i][p] * b.du[j][p];
        r.metric_error = std::max(r.metric_error, std::abs(target * value));
      }
    }
  }
  return r;
}

ResidualSnapshot residual_snapshot(const GraphState& state, const GeometryBundle& b) {
  const Grid& grid = b.grid();
  const int n = grid.dim();
  ScalarField du_norm2(grid);
  for (std::size_t p = 0; p < grid.size(); ++p) {
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) sum += b.g_inv.at(p, i, j) * b.du[i][p] * b.du[j][p];
    }
    du_norm2[p] = sum;
  }
  ScalarField lap = laplacian_induced(state.w, b);
  for (std::size_t p = 0; p < grid.size(); ++p) lap[p] *= state.w[p];
  return {state.t, std::move(du_norm2), b.vt2_minus_one, std::move(lap), inner_gradient(state.w, state.w, b)};
}

namespace {

// d/dt of the field sampled at `times`, evaluated at times[at], with weights w.
Residuals weighted_residuals(const std::vector<const ResidualSnapshot*>& window, const std::vector<double>& weights,
                             int at, double gamma) {
  const ResidualSnapshot& here = *window[at];
  const double growth = std::exp(2.0 * gamma * here.t);
  Residuals r{0.0, 0.0, 0.0, 1.0};
  const std::size_t size = here.lap_term.size();
  std::vector<double> measured(size), predicted(size);
  double sup_predicted = 0.0;
  for (std::size_t p = 0; p < size; ++p) {
    double ddu = 0.0, dvt2 = 0.0;
    for (std::size_t k = 0; k < window.size(); ++k) {
      ddu += weights[k] * window[k]->du_norm2[p];
      dvt2 += weights[k] * window[k]->vt2_minus_one[p];
    }
    measured[p] = ddu * growth;
    predicted[p] = 2.0 * gamma * here.lap_term[p];
    r.R1 = std::max(r.R1, std::abs(measured[p] - predicted[p]));
    r.R2 = std::max(r.R2, std::abs(dvt2 * growth + 2.0 * gamma * here.grad_term[p]));
    r.R3 = std::max(r.R3, std::abs(here.grad_term[p] + here.lap_term[p]));
    sup_predicted = std::max(sup_predicted, std::abs(predicted[p]));
  }
  const double floor = 1e-3 * sup_predicted;
  std::size_t counted = 0, agree = 0;
  for (std::size_t p = 0; p < size; ++p) {
    if (std::abs(predicted[p]) > floor && std::abs(measured[p]) > floor) {
      ++counted;
      if ((predicted[p] > 0.0) == (measured[p] > 0.0)) ++agree;
    }
  }
  r.sign_agreement = counted == 0 ? 1.0 : static_cast<double>(agree) / counted;
  return r;
}

void require_distinct(const std::vector<double>& times) {
  for (std::size_t a = 0; a < times.size(); ++a) {
    for (std::size_t b = a + 1; b < times.size(); ++b) {
      if (!(times[a] != times[b])) throw FlowError(ErrorKind::NotReady, "residuals need distinct snapshot times");
    }
  }
}

}  // namespace

Residuals compute_residuals(const std::array<const ResidualSnapshot*, 3>& window, int at, double gamma) {
  const std::vector<double> t = {window[0]->t, window[1]->t, window[2]->t};
  require_distinct(t);
  // Derivative of the Lagrange basis at t[at].
  std::vector<double> weights(3);
  for (int k = 0; k < 3; ++k) {
    double w = 0.0;
    for (int m = 0; m < 3; ++m) {
      if (m == k) continue;
      double term = 1.0 / (t[k] - t[m]);
      for (int l = 0; l < 3; ++l) {
        if (l != k && l != m) term *= (t[at] - t[l]) / (t[k] - t[l]);
      }
      w += term;
    }
    weights[k] = w;
  }
  return weighted_residuals({window[0], window[1], window[2]}, weights, at, gamma);
}

Residuals compute_residuals(const std::array<const ResidualSnapshot*, 2>& window, int at, double gamma) {
  require_distinct({window[0]->t, window[1]->t});
  const double inv = 1.0 / (window[1]->t - window[0]->t);
  return weighted_residuals({window[0], window[1]}, {-inv, inv}, at, gamma);
}

void DiagnosticsRecorder::fill(std::size_t index, const Residuals& r) {
  records_[index].R1 = r.R1;
  records_[index].R2 = r.R2;
  records_[index].R3 = r.R3;
  sign_agreement_[index] = r.sign_agreement;
}

void DiagnosticsRecorder::consume(const GraphState& state, const GeometryBundle& bundle, long steps, double dt) {
  DiagnosticsRecord record = observe(state, bundle, background_);
  record.steps = steps;
  record.dt = dt;
  records_.push_back(record);
  tail_ratios_.push_back(spectral_tail_ratio(state.w));
  sign_agreement_.push_back(1.0);
  finished_ = false;

  window_.push_back(residual_snapshot(state, bundle));
  if (window_.size() > 3) window_.erase(window_.begin());
  const std::size_t count = records_.size();
  const double gamma = background_.gamma();
  if (window_.size() == 3) {
    const std::array<const ResidualSnapshot*, 3> w = {&window_[0], &window_[1], &window_[2]};
    if (count == 3) fill(0, compute_residuals(w, 0, gamma));
    fill(count - 2, compute_residuals(w, 1, gamma));
  }
}

void DiagnosticsRecorder::finish() {
  if (finished_ || records_.size() < 2) return;
  finished_ = true;
  const double gamma = background_.gamma();
  if (window_.size() == 3) {
    fill(records_.size() - 1, compute_residuals({&window_[0], &window_[1], &window_[2]}, 2, gamma));
  } else {
    const std::array<const ResidualSnapshot*, 2> w = {&window_[0], &window_[1]};
    fill(0, compute_residuals(w, 0, gamma));
    fill(1, compute_residuals(w, 1, gamma));
  }
}

Residuals DiagnosticsRecorder::latest_residuals() const {
  const double gamma = background_.gamma();
  if (window_.size() == 3) return compute_residuals({&window_[0], &window_[1], &window_[2]}, 2, gamma);
  if (window_.size() == 2) {
    return compute_residuals(std::array<const ResidualSnapshot*, 2>{&window_[0], &window_[1]}, 1, gamma);
  }
  throw FlowError(ErrorKind::NotReady, "residuals need at least two snapshots");
}

RateFit fit_rate(const std::vector<DiagnosticsRecord>& records, std::string_view quantity, double t_begin,
                 double t_end, double predicted) {
  const double slack = 1e-9 * std::max(1.0, std::abs(t_end));
  std::vector<double> ts, ys;
  for (const auto& r : records) {
    if (r.t < t_begin - slack || r.t > t_end + slack) continue;
    const double value = record_value(r, quantity);
    if (!(value > 0.0)) {
      std::ostringstream msg;
      msg << quantity << " = " << value << " at t = " << r.t << " is not positive";
      throw FlowError(ErrorKind::FitUndefined, msg.str());
    }
    ts.push_back(r.t);
    ys.push_back(std::log(value));
  }
  if (ts.size() < 10) {
    throw FlowError(ErrorKind::FitUndefined, "rate fit needs at least 10 samples in the window");
  }
  const double count = static_cast<double>(ts.size());
  double mean_t = 0.0, mean_y = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    mean_t += ts[k];
    mean_y += ys[k];
  }
  mean_t /= count;
  mean_y /= count;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    sxx += (ts[k] - mean_t) * (ts[k] - mean_t);
    sxy += (ts[k] - mean_t) * (ys[k] - mean_y);
  }
  RateFit fit;
  fit.quantity = std::string(quantity);
  fit.t_begin = t_begin;
  fit.t_end = t_end;
  fit.samples = ts.size();
  fit.slope = sxy / sxx;
  fit.intercept = mean_y - fit.slope * mean_t;
  fit.predicted = predicted;
  fit.relative_deviation = predicted != 0.0 ? (fit.slope - predicted) / std::abs(predicted) : 0.0;
  return fit;
}

double predicted_umbilicity_ratio_slope(const BackgroundParams& params) { return -2.0 * params.gamma(); }

std::optional<double> predicted_umbilicity_sup_slope(const BackgroundParams& params) {
  const double excess = params.n + params.omega - 4.0;
  if (!(excess > 0.0)) return std::nullopt;
  return -excess / (2.0 * params.n);
}

namespace {

RateOutcome assess_rate(const std::vector<DiagnosticsRecord>& records, std::string_view quantity, double t_begin,
                        double t_end, double predicted, const CheckThresholds& th) {
  RateOutcome out;
  out.predicted = predicted;
  double sup = 0.0;
  for (const auto& r : records) {
    if (r.t >= t_begin - 1e-9 && r.t <= t_end + 1e-9) sup = std::max(sup, record_value(r, quantity));
  }
  out.converged_floor = sup < th.umbilicity_floor;
  try {
    out.fit = fit_rate(records, quantity, t_begin, t_end, predicted);
  } catch (const FlowError& e) {
    out.note = e.what();
  }
  const bool within = out.fit && std::abs(out.fit->relative_deviation) <= th.rate_tolerance;
  out.passed = out.converged_floor || within;
  return out;
}

}  // namespace

RunReport assess_run(const RunSummary& summary, const DiagnosticsRecorder& recorder, const BackgroundParams& params,
                     const CheckThresholds& th) {
  RunReport report;
  report.summary = summary;
  const auto& records = recorder.records();
  if (records.empty()) return report;
  const double t_final = records.back().t;
  const auto& first = records.front();
  const auto& last = records.back();

  report.checks.constancy = summary.stop_reason != StopReason::StepFailure &&
                            last.osc_u_tilde <= th.osc_final_abs &&
                            last.osc_u_tilde <= th.osc_final_rel * first.osc_u_tilde;

  const double center = 0.5 * (first.min_u_tilde + first.max_u_tilde);
  const double lower = th.pinching_lower_factor * center;
  const double upper = th.pinching_upper_factor * center;
  report.checks.pinching = summary.stop_reason != StopReason::PinchingViolation &&
                           std::all_of(records.begin(), records.end(), [&](const DiagnosticsRecord& r) {
                             return r.min_u_tilde >= lower && r.max_u_tilde <= upper;
                           });

  const double rate_begin = 2.0 * t_final / 3.0;
  report.umbilicity_ratio = assess_rate(records, "umbilicity_ratio", rate_begin, t_final,
                                        predicted_umbilicity_ratio_slope(params), th);
  report.checks.umbilicity_rate = report.umbilicity_ratio.passed;
  if (auto predicted = predicted_umbilicity_sup_slope(params)) {
    report.umbilicity_sup = assess_rate(records, "umbilicity_sup", rate_begin, t_final, *predicted, th);
  }

  bool monotone = true;
  const DiagnosticsRecord* previous = nullptr;
  for (const auto& r : records) {
    if (r.t < rate_begin - 1e-9) continue;
    if (previous && r.metric_error > previous->metric_error) monotone = false;
    previous = &r;
  }
  report.checks.metric_convergence = monotone && last.metric_error < th.metric_final;
  report.checks.F_limit = last.F_times_minus_u_err < th.F_limit_final;

  // Identity residuals: tail window against the record nearest t_ref.
  const DiagnosticsRecord* reference = &records.front();
  for (const auto& r : records) {
    if (std::abs(r.t - th.identity_reference_t) < std::abs(reference->t - th.identity_reference_t)) reference = &r;
  }
  const double tail_begin = 5.0 * t_final / 6.0;
  double tail_R1 = 0.0, tail_R2 = 0.0;
  for (const auto& r : records) {
    if (r.t >= tail_begin - 1e-9) {
      tail_R1 = std::max(tail_R1, r.R1);
      tail_R2 = std::max(tail_R2, r.R2);
    }
  }
  auto identity_ok = [&](double tail, double ref, double& ratio) {
    constexpr double kExactFloor = 1e-10;
    if (ref <= 1e-14) {
      ratio = 0.0;
      return tail <= kExactFloor;
    }
    ratio = tail / ref;
    return ratio <= th.identity_factor;
  };
  const bool r1_ok = identity_ok(tail_R1, reference->R1, report.identity_R1_ratio);
  const bool r2_ok = identity_ok(tail_R2, reference->R2, report.identity_R2_ratio);
  report.checks.identities = records.size() >= 2 && r1_ok && r2_ok;

  const auto& tails = recorder.tail_ratios();
  report.checks.resolved =
      std::all_of(tails.begin(), tails.end(), [&](double ratio) { return ratio <= th.tail_ratio_max; });
  return report;
}

namespace {

std::string format_double(double value) {
  char buffer[64];
  auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, end);
}

}  // namespace

std::string records_to_csv(const std::vector<DiagnosticsRecord>& records) {
  std::string out;
  const auto& columns = record_columns();
  for (std::size_t c = 0; c < columns.size(); ++c) {
    out += columns[c];
    out += c + 1 == columns.size() ? '\n' : ',';
  }
  for (const auto& r : records) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      out += columns[c] == "steps" ? std::to_string(r.steps) : format_double(record_value(r, columns[c]));
      out += c + 1 == columns.size() ? '\n' : ',';
    }
  }
  return out;
}

void write_records_csv(const std::vector<DiagnosticsRecord>& records, const std::filesystem::path& path) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw FlowError(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  file << records_to_csv(records);
  if (!file) throw FlowError(ErrorKind::Io, "write failed for " + path.string());
}

std::vector<DiagnosticsRecord> parse_records_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw FlowError(ErrorKind::Io, "empty CSV");
  const auto& columns = record_columns();
  std::vector<DiagnosticsRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> values;
    std::size_t start = 0;
    while (start <= line.size()) {
      const std::size_t comma = std::min(line.find(',', start), line.size());
      double value = 0.0;
      auto [ptr, ec] = std::from_chars(line.data() + start, line.data() + comma, value);
      if (ec != std::errc() || ptr != line.data() + comma) {
        throw FlowError(ErrorKind::Io, "malformed CSV field in line: " + line);
      }
      values.push_back(value);
      start = comma + 1;
    }
    if (values.size() != columns.size()) throw FlowError(ErrorKind::Io, "wrong CSV column count");
    DiagnosticsRecord r;
    r.t = values[0];
    r.osc_u_tilde = values[1];
    r.min_u_tilde = values[2];
    r.max_u_tilde = values[3];
    r.sup_Du = values[4];
    r.F_times_minus_u_err = values[5];
    r.umbilicity_sup = values[6];
    r.umbilicity_ratio = values[7];
    r.metric_error = values[8];
    r.R1 = values[9];
    r.R2 = values[10];
    r.R3 = values[11];
    r.dt = values[12];
    r.steps = static_cast<long>(values[13]);
    out.push_back(r);
  }
  return out;
}

namespace {

nlohmann::json rate_to_json(const RateOutcome& outcome) {
  nlohmann::json j;
  j["predicted"] = outcome.predicted;
  j["converged_floor"] = outcome.converged_floor;
  j["passed"] = outcome.passed;
  if (outcome.fit) {
    j["fitted"] = outcome.fit->slope;
    j["relative_deviation"] = outcome.fit->relative_deviation;
    j["window"] = {outcome.fit->t_begin, outcome.fit->t_end};
    j["samples"] = outcome.fit->samples;
  } else {
    j["fitted"] = nullptr;
    j["note"] = outcome.note;
  }
  return j;
}

}  // namespace

nlohmann::json report_to_json(const RunReport& report, const std::map<std::string, std::string>& config_echo) {
  const RunSummary& s = report.summary;
  nlohmann::json doc;
  doc["stop_reason"] = std::string(to_string(s.stop_reason));
  if (!s.message.empty()) doc["message"] = s.message;
  doc["t_final"] = s.t_final;
  doc["steps"] = {{"accepted", s.steps_accepted},
                  {"rejected", s.steps_rejected},
                  {"dt_min", s.dt_min},
                  {"dt_max", s.dt_max},
                  {"monotonicity_violations", s.monotonicity_violations}};
  doc["osc_u_tilde"] = {{"initial", s.osc_initial}, {"final", s.osc_final}};
  doc["rates"]["umbilicity_ratio"] = rate_to_json(report.umbilicity_ratio);
  if (report.umbilicity_sup) doc["rates"]["umbilicity_sup"] = rate_to_json(*report.umbilicity_sup);
  const RunChecks& c = report.checks;
  doc["checks"] = {{"constancy", c.constancy},
                   {"pinching", c.pinching},
                   {"umbilicity_rate", c.umbilicity_rate},
                   {"metric_convergence", c.metric_convergence},
                   {"F_limit", c.F_limit},
                   {"identities", c.identities},
                   {"resolved", c.resolved}};
  doc["identity_ratios"] = {{"R1", report.identity_R1_ratio}, {"R2", report.identity_R2_ratio}};
  doc["config"] = config_echo;
  return doc;
}

void write_json(const nlohmann::json& doc, const std::filesystem::path& path) {
  std::ofstream file(path);
  if (!file) throw FlowError(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  file << doc.dump(2) << '\n';
  if (!file) throw FlowError(ErrorKind::Io, "write failed for " + path.string());
}

}  // namespace arwflow
