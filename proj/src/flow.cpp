#include "arwflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "arwflow/errors.hpp"

namespace arwflow {

std::string_view to_string(RejectionReason reason) {
  switch (reason) {
    case RejectionReason::Spacelike: return "spacelike";
    case RejectionReason::Cone: return "cone";
    case RejectionReason::FNonpositive: return "F_nonpositive";
    case RejectionReason::Nonfinite: return "nonfinite";
    case RejectionReason::Range: return "range";
  }
  return "unknown";
}

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::TMax: return "t_max";
    case StopReason::StopOsc: return "stop_osc";
    case StopReason::StepFailure: return "step_failure";
    case StopReason::PinchingViolation: return "pinching_violation";
  }
  return "unknown";
}

void FlowConfig::validate() const {
  auto positive = [](double value, const char* name) {
    if (!(value > 0.0) || !std::isfinite(value)) {
      throw FlowError(ErrorKind::InvalidConfig, std::string("flow.") + name + " must be positive");
    }
  };
  positive(t_max, "t_max");
  positive(dt_initial, "dt_initial");
  positive(dt_max, "dt_max");
  positive(safety, "safety");
  if (safety > 1.0) throw FlowError(ErrorKind::InvalidConfig, "flow.safety must lie in (0, 1]");
  positive(spacelike_margin, "spacelike_margin");
  positive(F_min, "F_min");
  positive(output_interval, "output_interval");
  if (stop_osc) positive(*stop_osc, "stop_osc");
  if (dt_fixed) positive(*dt_fixed, "dt_fixed");
  if (max_halvings < 0) throw FlowError(ErrorKind::InvalidConfig, "flow.max_halvings must be >= 0");
}

FlowIntegrator::FlowIntegrator(const ArwBackground& background, CurvatureFunctional functional, FlowConfig config)
    : background_(background), functional_(functional), config_(config) {
  config_.validate();
  if (functional_.dim() != background_.dim()) {
    throw FlowError(ErrorKind::InvalidConfig, "curvature functional and background dimensions differ");
  }
}

GeometryBundle FlowIntegrator::geometry(const GraphState& state) const {
  return build_geometry(state, background_, functional_, config_.spacelike_margin);
}

ScalarField FlowIntegrator::rhs(const GraphState& state) const { return rhs(state, geometry(state)); }

ScalarField FlowIntegrator::rhs(const GraphState& state, const GeometryBundle& bundle) const {
  const double gamma = background_.gamma();
  const double growth = std::exp(gamma * state.t);
  ScalarField out(state.w.grid());
  for (std::size_t p = 0; p < out.size(); ++p) {
    const double F = bundle.F[p];
    if (!(F > config_.F_min)) {
      std::ostringstream msg;
      msg << "F = " << F << " below F_min = " << config_.F_min;
      throw FlowError(ErrorKind::FlowDegenerate, msg.str());
    }
    // The graph speed v / F is positive: the flow runs toward tau = 0.
    out[p] = gamma * state.w[p] + growth * bundle.v[p] / F;
  }
  return out;
}

ScalarField FlowIntegrator::stage_derivative(const GraphState& state, const GeometryBundle& bundle) const {
  if (config_.rescaled) return rhs(state, bundle);
  ScalarField out(state.w.grid());
  for (std::size_t p = 0; p < out.size(); ++p) {
    const double F = bundle.F[p];
    if (!(F > config_.F_min)) throw FlowError(ErrorKind::FlowDegenerate, "F below F_min");
    out[p] = bundle.v[p] / F;
  }
  return out;
}

double FlowIntegrator::stability_bound(const GeometryBundle& bundle) const {
  const Grid& grid = bundle.grid();
  const double dx = grid.spacing();
  double bound = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const double F = bundle.F[p];
    const double vt = bundle.vt[p];
    bound = std::min(bound, dx * dx * F * F / (2.0 * grid.dim() * vt * vt));
  }
  return config_.safety * bound;
}

namespace {

RejectionReason classify(const FlowError& e) {
  switch (e.kind()) {
    case ErrorKind::NotSpacelike: return RejectionReason::Spacelike;
    case ErrorKind::OutsideCone: return RejectionReason::Cone;
    case ErrorKind::FlowDegenerate: return RejectionReason::FNonpositive;
    case ErrorKind::OutOfRange: return RejectionReason::Range;
    default: return RejectionReason::Nonfinite;
  }
}

}  // namespace

StepResult FlowIntegrator::attempt(const GraphState& state, const GeometryBundle& bundle, double dt,
                                   GraphState& next, std::optional<GeometryBundle>& next_bundle) const {
  const double gamma = background_.gamma();
  const bool rescaled = config_.rescaled;
  // Integration variable y: w, or u = w e^{-gamma t}.
  auto to_state = [&](double t, const ScalarField& y) {
    GraphState s{t, y};
    if (!rescaled) s.w *= std::exp(gamma * t);
    return s;
  };
  auto combine = [](const ScalarField& y, double c, const ScalarField& k) {
    ScalarField out = y;
    for (std::size_t p = 0; p < out.size(); ++p) out[p] += c * k[p];
    return out;
  };

  StepResult result;
  result.dt_used = dt;
  try {
    const ScalarField y0 = rescaled ? state.w : state.height(gamma);
    const ScalarField k1 = stage_derivative(state, bundle);
    const GraphState s2 = to_state(state.t + 0.5 * dt, combine(y0, 0.5 * dt, k1));
    const ScalarField k2 = stage_derivative(s2, geometry(s2));
    const GraphState s3 = to_state(state.t + 0.5 * dt, combine(y0, 0.5 * dt, k2));
    const ScalarField k3 = stage_derivative(s3, geometry(s3));
    const GraphState s4 = to_state(state.t + dt, combine(y0, dt, k3));
    const ScalarField k4 = stage_derivative(s4, geometry(s4));
    ScalarField y1 = y0;
    for (std::size_t p = 0; p < y1.size(); ++p) {
      y1[p] += dt / 6.0 * (k1[p] + 2.0 * k2[p] + 2.0 * k3[p] + k4[p]);
    }
    GraphState candidate = to_state(state.t + dt, y1);
    GeometryBundle candidate_bundle = geometry(candidate);
    for (std::size_t p = 0; p < candidate_bundle.F.size(); ++p) {
      if (!(candidate_bundle.F[p] > config_.F_min)) throw FlowError(ErrorKind::FlowDegenerate, "F below F_min");
    }
    next = std::move(candidate);
    next_bundle.emplace(std::move(candidate_bundle));
    result.accepted = true;
  } catch (const FlowError& e) {
    result.accepted = false;
    result.rejection_reason = classify(e);
    result.rejections = 1;
  }
  return result;
}

StepResult FlowIntegrator::step(const GraphState& state, const GeometryBundle& bundle, double dt, GraphState& next,
                                std::optional<GeometryBundle>& next_bundle) const {
  int rejections = 0;
  std::optional<RejectionReason> last_reason;
  for (int attempt_index = 0; attempt_index <= config_.max_halvings; ++attempt_index) {
    StepResult r = attempt(state, bundle, dt, next, next_bundle);
    if (r.accepted) {
      r.rejections = rejections;
      r.rejection_reason = last_reason;
      return r;
    }
    ++rejections;
    last_reason = r.rejection_reason;
    dt *= 0.5;
  }
  std::ostringstream msg;
  msg << "step rejected " << rejections << " times at t = " << state.t << " (last reason "
      << to_string(*last_reason) << ")";
  throw FlowError(ErrorKind::StepFailure, msg.str());
}

RunSummary FlowIntegrator::run(const ScalarField& u0, SnapshotSink& sink) const {
  const double gamma = background_.gamma();
  RunSummary summary;

  if (!u0.all_finite()) throw FlowError(ErrorKind::InvalidInitialData, "initial height is not finite");
  if (!(u0.max() < 0.0)) throw FlowError(ErrorKind::InvalidInitialData, "u must be negative everywhere");
  GraphState state{0.0, u0};
  std::optional<GeometryBundle> bundle;
  try {
    bundle.emplace(geometry(state));
  } catch (const FlowError& e) {
    throw FlowError(ErrorKind::InvalidInitialData, e.what());
  }

  const double lower = 1.5 * state.w.min();
  const double upper = 0.5 * state.w.max();
  summary.osc_initial = oscillation(state.w);
  summary.dt_min = std::numeric_limits<double>::infinity();
  sink.consume(state, *bundle, 0, 0.0);

  const double interval = config_.output_interval;
  long output_index = 1;
  double dt_prev = config_.dt_initial;
  bool first = true;
  const double t_end = config_.t_max;
  auto output_time = [&](long k) { return std::min(static_cast<double>(k) * interval, t_end); };

  try {
    while (state.t < t_end) {
      double dt;
      if (config_.dt_fixed) {
        dt = *config_.dt_fixed;
      } else {
        dt = std::min({config_.dt_max, stability_bound(*bundle), 2.0 * dt_prev});
        if (first) dt = std::min(dt, config_.dt_initial);
      }
      const double dt_free = dt;
      const double target = output_time(output_index);
      bool landing = false;
      if (state.t + dt >= target - 1e-12 * std::max(1.0, target)) {
        dt = target - state.t;
        landing = true;
      }

      GraphState next{state.t, state.w};
      std::optional<GeometryBundle> next_bundle;
      const StepResult r = step(state, *bundle, dt, next, next_bundle);
      summary.steps_rejected += r.rejections;
      ++summary.steps_accepted;
      summary.dt_min = std::min(summary.dt_min, r.dt_used);
      summary.dt_max = std::max(summary.dt_max, r.dt_used);
      if (r.dt_used != dt) landing = false;
      if (landing) next.t = target;
      dt_prev = r.rejections == 0 ? dt_free : r.dt_used;
      first = false;

      const ScalarField u_old = state.height(gamma);
      const ScalarField u_new = next.height(gamma);
      for (std::size_t p = 0; p < u_new.size(); ++p) {
        if (!(u_new[p] > u_old[p])) ++summary.monotonicity_violations;
      }

      state = std::move(next);
      bundle = std::move(next_bundle);

      if (state.w.min() < lower || state.w.max() > upper) {
        std::ostringstream msg;
        msg << "rescaled height left [" << lower << ", " << upper << "] at t = " << state.t;
        summary.stop_reason = StopReason::PinchingViolation;
        summary.message = msg.str();
        sink.consume(state, *bundle, summary.steps_accepted, r.dt_used);
        break;
      }

      if (landing) {
        sink.consume(state, *bundle, summary.steps_accepted, r.dt_used);
        ++output_index;
        if (config_.stop_osc && oscillation(state.w) < *config_.stop_osc) {
          summary.stop_reason = StopReason::StopOsc;
          break;
        }
      }
    }
  } catch (const FlowError& e) {
    if (e.kind() != ErrorKind::StepFailure) throw;
    summary.stop_reason = StopReason::StepFailure;
    summary.message = e.what();
  }
  sink.finish();
  summary.t_final = state.t;
  summary.osc_final = oscillation(state.w);
  if (summary.steps_accepted == 0) summary.dt_min = 0.0;
  return summary;
}

}  // namespace arwflow
