#pragma once

// Method-of-lines integration of the inverse curvature flow for graphs,
//
//   d u / d t = v / F        (u at fixed coordinates, v = 1 / vt),
//
// carried out on the rescaled height w = u e^{gamma t}:
//
//   d w / d t = gamma w + e^{gamma t} v / F.
//
// Classical RK4 with a parabolic step bound and stage-level validity checks.

#include <optional>
#include <string>
#include <string_view>

#include "arwflow/background.hpp"
#include "arwflow/curvature.hpp"
#include "arwflow/geometry.hpp"

namespace arwflow {

struct FlowConfig {
  double t_max = 30.0;
  double dt_initial = 1e-3;
  double dt_max = 0.05;
  double safety = 0.2;
  double spacelike_margin = 1e-3;
  double F_min = 1e-6;
  double output_interval = 0.1;
  std::optional<double> stop_osc;
  // Integrate w (default) or the raw height u.
  bool rescaled = true;
  // Constant step, bypassing the stability bound and dt_max.
  std::optional<double> dt_fixed;
  int max_halvings = 20;

  // Throws InvalidConfig naming the offending field.
  void validate() const;
};

enum class RejectionReason { Spacelike, Cone, FNonpositive, Nonfinite, Range };

std::string_view to_string(RejectionReason reason);

struct StepResult {
  bool accepted = false;
  double dt_used = 0.0;
  std::optional<RejectionReason> rejection_reason;  // last rejection seen, if any
  int rejections = 0;
};

// Read-only consumer of accepted snapshots.
class SnapshotSink {
 public:
  virtual ~SnapshotSink() = default;
  virtual void consume(const GraphState& state, const GeometryBundle& bundle, long steps, double dt) = 0;
  virtual void finish() {}
};

enum class StopReason { TMax, StopOsc, StepFailure, PinchingViolation };

std::string_view to_string(StopReason reason);

struct RunSummary {
  StopReason stop_reason = StopReason::TMax;
  std::string message;
  double t_final = 0.0;
  long steps_accepted = 0;
  long steps_rejected = 0;
  double dt_min = 0.0;
  double dt_max = 0.0;
  double osc_initial = 0.0;
  double osc_final = 0.0;
  long monotonicity_violations = 0;
};

class FlowIntegrator {
 public:
  FlowIntegrator(const ArwBackground& background, CurvatureFunctional functional, FlowConfig config);

  const FlowConfig& config() const { return config_; }
  const ArwBackground& background() const { return background_; }
  const CurvatureFunctional& functional() const { return functional_; }

  GeometryBundle geometry(const GraphState& state) const;

  // d w / d t for a valid state; throws FlowDegenerate when F <= F_min.
  ScalarField rhs(const GraphState& state) const;
  ScalarField rhs(const GraphState& state, const GeometryBundle& bundle) const;

  // safety * min over the grid of dx^2 F^2 / (2 n vt^2).
  double stability_bound(const GeometryBundle& bundle) const;

  // One RK4 attempt with the given dt. On rejection `next` is left untouched.
  StepResult attempt(const GraphState& state, const GeometryBundle& bundle, double dt, GraphState& next,
                     std::optional<GeometryBundle>& next_bundle) const;

  // Attempts with dt, halving on rejection up to max_halvings times; throws
  // StepFailure after that.
  StepResult step(const GraphState& state, const GeometryBundle& bundle, double dt, GraphState& next,
                  std::optional<GeometryBundle>& next_bundle) const;

  // Integrates from u0 at t = 0. Emits a snapshot at t = 0, at every
  // multiple of output_interval and at the final time. Throws
  // InvalidInitialData for unusable u0; a step failure ends the run with
  // stop_reason StepFailure.
  RunSummary run(const ScalarField& u0, SnapshotSink& sink) const;

 private:
  ScalarField stage_derivative(const GraphState& state, const GeometryBundle& bundle) const;

  ArwBackground background_;
  CurvatureFunctional functional_;
  FlowConfig config_;
};

}  // namespace arwflow
