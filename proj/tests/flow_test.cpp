#include <gtest/gtest.h>

#include <cmath>

#include "arwflow/diagnostics.hpp"
#include "arwflow/errors.hpp"
#include "arwflow/flow.hpp"
#include "support.hpp"

using namespace arwflow;
using namespace testing_support;

namespace {

struct Collect : SnapshotSink {
  std::vector<GraphState> states;
  std::vector<double> dts;
  int finished = 0;
  void consume(const GraphState& s, const GeometryBundle&, long, double dt) override {
    states.push_back(s);
    dts.push_back(dt);
  }
  void finish() override { ++finished; }
};

BackgroundParams canonical(int n) {
  BackgroundParams p;
  p.n = n;
  p.omega = n == 2 ? 2.0 : 3.0;
  return p;
}

FlowIntegrator integrator(const BackgroundParams& p, FlowConfig config = {},
                          CurvatureKind kind = CurvatureKind::Mean) {
  return FlowIntegrator(ArwBackground(p), CurvatureFunctional(kind, p.n), config);
}

ScalarField perturbed_height(const Grid& grid, double high = 0.0) {
  return ScalarField::sample(
      grid, [=](const Point& x) { return -0.5 + 0.05 * std::sin(x[0]) + high * std::cos(20 * x[0]); });
}

TEST(FlowConfig, ValidationNamesField) {
  FlowConfig c;
  c.safety = 1.5;
  try {
    c.validate();
    FAIL();
  } catch (const FlowError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidConfig);
    EXPECT_NE(std::string(e.what()).find("flow.safety"), std::string::npos);
  }
  FlowConfig d;
  d.output_interval = 0.0;
  EXPECT_THROW(d.validate(), FlowError);
  FlowConfig e;
  e.dt_fixed = -1.0;
  EXPECT_THROW(e.validate(), FlowError);
}

TEST(Rhs, HomogeneousStateIsStationary) {
  for (int n : {1, 2}) {
    const auto p = canonical(n);
    const auto flow = integrator(p);
    const Grid grid(n, 16);
    for (double t : {0.0, 3.0, 20.0}) {
      const GraphState s{t, ScalarField(grid, -0.5)};
      const GeometryBundle b = flow.geometry(s);
      EXPECT_LT(flow.rhs(s, b).max_abs(), 1e-13);
      // F (-u) = n / gt = 1 / gamma.
      const double u = -0.5 * std::exp(-p.gamma() * t);
      EXPECT_NEAR(b.F[0] * (-u), 1.0 / p.gamma(), 1e-12);
    }
  }
}

TEST(Rhs, FiniteAndResolvedOnSmoothState) {
  const Grid grid(2, 64);
  BackgroundParams p = canonical(2);
  p.epsilon = 0.01;
  p.delta = 0.01;
  const auto flow = integrator(p);
  const GraphState s{0.0, perturbed_height(grid)};
  const ScalarField r = flow.rhs(s);
  EXPECT_TRUE(r.all_finite());
  EXPECT_LT(spectral_tail_ratio(r), 1e-8);
  // u moves toward tau = 0: d u / d t = e^{-gamma t}(w_t - gamma w) > 0.
  for (std::size_t q = 0; q < r.size(); ++q) EXPECT_GT(r[q] - p.gamma() * s.w[q], 0.0);
}

TEST(Rhs, DegenerateFThrows) {
  const Grid grid(2, 16);
  FlowConfig c;
  c.F_min = 100.0;  // F = 4 on the canonical state at u = -0.5
  const auto flow = integrator(canonical(2), c);
  try {
    flow.rhs(GraphState{0.0, ScalarField(grid, -0.5)});
    FAIL();
  } catch (const FlowError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::FlowDegenerate);
  }
}

TEST(Step, HomogeneousStateUnchanged) {
  const Grid grid(2, 16);
  const auto flow = integrator(canonical(2));
  const GraphState s{0.0, ScalarField(grid, -0.5)};
  GraphState next = s;
  std::optional<GeometryBundle> nb;
  const StepResult r = flow.step(s, flow.geometry(s), 0.05, next, nb);
  EXPECT_TRUE(r.accepted);
  EXPECT_EQ(r.rejections, 0);
  EXPECT_DOUBLE_EQ(next.t, 0.05);
  EXPECT_LT(sup_diff(next.w, s.w), 1e-13);
}

TEST(Step, ForcedLargeStepIsRejected) {
  BackgroundParams p = canonical(2);
  p.epsilon = 0.01;
  p.delta = 0.01;
  const auto flow = integrator(p);
  const Grid grid(2, 64);
  const GraphState s{0.0, perturbed_height(grid, 0.001)};
  const GeometryBundle b = flow.geometry(s);
  GraphState next{-1.0, ScalarField(grid, 7.0)};
  std::optional<GeometryBundle> nb;
  const StepResult r = flow.attempt(s, b, 100.0 * flow.stability_bound(b), next, nb);
  EXPECT_FALSE(r.accepted);
  ASSERT_TRUE(r.rejection_reason.has_value());
  EXPECT_EQ(*r.rejection_reason, RejectionReason::Spacelike);
  // Rejected attempts leave the output untouched.
  EXPECT_EQ(next.t, -1.0);
  EXPECT_EQ(next.w[0], 7.0);
  EXPECT_FALSE(nb.has_value());

  // step() recovers by halving.
  const StepResult halved = flow.step(s, b, 100.0 * flow.stability_bound(b), next, nb);
  EXPECT_TRUE(halved.accepted);
  EXPECT_GT(halved.rejections, 0);
  EXPECT_LT(halved.dt_used, 100.0 * flow.stability_bound(b));
}

TEST(Step, DefaultConfigAcceptsSmoothState) {
  BackgroundParams p = canonical(2);
  p.epsilon = 0.01;
  p.delta = 0.01;
  const auto flow = integrator(p);
  const Grid grid(2, 64);
  const GraphState s{0.0, perturbed_height(grid)};
  const GeometryBundle b = flow.geometry(s);
  GraphState next = s;
  std::optional<GeometryBundle> nb;
  const StepResult r = flow.step(s, b, flow.stability_bound(b), next, nb);
  EXPECT_TRUE(r.accepted);
  EXPECT_TRUE(std::isfinite(oscillation(next.w)));
}

TEST(Run, HomogeneousExactSolution) {
  const Grid grid(2, 16);
  const auto p = canonical(2);
  FlowConfig c;
  c.t_max = 5.0;
  c.output_interval = 0.25;
  Collect sink;
  const RunSummary s = integrator(p, c).run(ScalarField(grid, -0.5), sink);
  EXPECT_EQ(s.stop_reason, StopReason::TMax);
  EXPECT_EQ(sink.finished, 1);
  ASSERT_EQ(sink.states.size(), 21u);
  for (std::size_t k = 0; k < sink.states.size(); ++k) {
    const GraphState& st = sink.states[k];
    EXPECT_DOUBLE_EQ(st.t, 0.25 * k);
    EXPECT_LT(oscillation(st.w), 1e-10);
    EXPECT_LT(sup_diff(st.w, ScalarField(grid, -0.5)), 1e-10);
    EXPECT_LT(sup_diff(st.height(p.gamma()), ScalarField(grid, -0.5 * std::exp(-0.5 * st.t))), 1e-10);
  }
  EXPECT_EQ(s.monotonicity_violations, 0);
}

TEST(Run, PerturbedRunCompletesMonotoneAndTailOscDecreases) {
  const Grid grid(2, 32);
  FlowConfig c;
  c.t_max = 6.0;
  c.output_interval = 0.5;
  Collect sink;
  const RunSummary s = integrator(canonical(2), c).run(perturbed_height(grid), sink);
  EXPECT_EQ(s.stop_reason, StopReason::TMax);
  EXPECT_DOUBLE_EQ(s.t_final, 6.0);
  EXPECT_EQ(s.monotonicity_violations, 0);
  EXPECT_EQ(s.steps_rejected, 0);
  for (std::size_t k = sink.states.size() / 2; k + 1 < sink.states.size(); ++k) {
    EXPECT_LT(oscillation(sink.states[k + 1].w), oscillation(sink.states[k].w));
  }
  EXPECT_LT(s.osc_final, s.osc_initial);
  for (std::size_t k = 1; k < sink.states.size(); ++k) EXPECT_GT(sink.states[k].t, sink.states[k - 1].t);
}

TEST(Run, RejectsBadInitialData) {
  const Grid grid(1, 64);
  const auto flow = integrator(canonical(1));
  Collect sink;
  auto kind_and_message = [&](const ScalarField& u0) {
    try {
      flow.run(u0, sink);
    } catch (const FlowError& e) {
      return std::make_pair(e.kind(), std::string(e.what()));
    }
    return std::make_pair(ErrorKind::Io, std::string("no error"));
  };
  const auto positive = kind_and_message(ScalarField(grid, 0.5));
  EXPECT_EQ(positive.first, ErrorKind::InvalidInitialData);
  EXPECT_NE(positive.second.find("u must be negative"), std::string::npos);
  const auto timelike =
      kind_and_message(ScalarField::sample(grid, [](const Point& x) { return -0.8 + 0.3 * std::sin(5 * x[0]); }));
  EXPECT_EQ(timelike.first, ErrorKind::InvalidInitialData);
  EXPECT_TRUE(sink.states.empty());
}

TEST(Run, StopOscEndsEarly) {
  const Grid grid(1, 32);
  FlowConfig c;
  c.t_max = 5.0;
  c.output_interval = 0.5;
  c.stop_osc = 1.0;
  Collect sink;
  const RunSummary s = integrator(canonical(1), c).run(perturbed_height(grid), sink);
  EXPECT_EQ(s.stop_reason, StopReason::StopOsc);
  EXPECT_DOUBLE_EQ(s.t_final, 0.5);
}

TEST(Run, ExhaustedHalvingsEndWithStepFailure) {
  const Grid grid(2, 64);
  FlowConfig c;
  c.t_max = 1.0;
  c.output_interval = 1.0;
  c.dt_fixed = 1.0;
  c.max_halvings = 1;
  Collect sink;
  const RunSummary s = integrator(canonical(2), c).run(perturbed_height(grid, 0.001), sink);
  EXPECT_EQ(s.stop_reason, StopReason::StepFailure);
  EXPECT_NE(s.message.find("rejected"), std::string::npos);
  EXPECT_EQ(sink.states.size(), 1u);
  EXPECT_EQ(sink.finished, 1);
}

TEST(Run, Deterministic) {
  const Grid grid(2, 32);
  BackgroundParams p = canonical(2);
  p.epsilon = 0.02;
  FlowConfig c;
  c.t_max = 2.0;
  c.output_interval = 0.5;
  Collect a, b;
  integrator(p, c).run(perturbed_height(grid), a);
  integrator(p, c).run(perturbed_height(grid), b);
  ASSERT_EQ(a.states.size(), b.states.size());
  for (std::size_t k = 0; k < a.states.size(); ++k) {
    EXPECT_EQ(a.states[k].t, b.states[k].t);
    for (std::size_t q = 0; q < grid.size(); ++q) EXPECT_EQ(a.states[k].w[q], b.states[k].w[q]);
  }
}

TEST(Run, RawHeightIntegrationIsFourthOrder) {
  const Grid grid(2, 16);
  const auto p = canonical(2);
  auto error = [&](double dt) {
    FlowConfig c;
    c.t_max = 4.0;
    c.output_interval = 1.0;
    c.rescaled = false;
    c.dt_fixed = dt;
    Collect sink;
    integrator(p, c).run(ScalarField(grid, -0.5), sink);
    double worst = 0.0;
    for (const auto& st : sink.states) {
      worst = std::max(worst, sup_diff(st.height(p.gamma()), ScalarField(grid, -0.5 * std::exp(-0.5 * st.t))));
    }
    return worst;
  };
  const double coarse = error(0.2), fine = error(0.1);
  EXPECT_GT(coarse, 1e-9);
  EXPECT_GE(coarse / fine, 12.0);
}

TEST(Run, GaussRootMatchesMeanOnHomogeneousData) {
  const Grid grid(2, 16);
  FlowConfig c;
  c.t_max = 2.0;
  c.output_interval = 0.5;
  Collect mean, root;
  integrator(canonical(2), c, CurvatureKind::Mean).run(ScalarField(grid, -0.5), mean);
  integrator(canonical(2), c, CurvatureKind::GaussRoot).run(ScalarField(grid, -0.5), root);
  ASSERT_EQ(mean.states.size(), root.states.size());
  for (std::size_t k = 0; k < mean.states.size(); ++k) EXPECT_LT(sup_diff(mean.states[k].w, root.states[k].w), 1e-13);
}

}  // namespace
