#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "arwflow/curvature.hpp"
#include "arwflow/errors.hpp"
#include "support.hpp"

using namespace arwflow;
using namespace testing_support;

namespace {

// Roots of det(A - lambda G) by bisection on either side of the parabola's
// vertex, independent of the closed form.
std::array<double, 2> bisection_roots(const std::array<double, 3>& a, const std::array<double, 3>& g) {
  auto p = [&](double l) { return (a[0] - l * g[0]) * (a[2] - l * g[2]) - (a[1] - l * g[1]) * (a[1] - l * g[1]); };
  // Eigenvalues of G^{-1}A lie where p vanishes; p(l) ~ det(G) l^2 with det(G) > 0.
  const double bound = 10.0 + 10.0 * (std::abs(a[0]) + std::abs(a[1]) + std::abs(a[2])) /
                                 (g[0] * g[2] - g[1] * g[1]) * (std::abs(g[0]) + std::abs(g[1]) + std::abs(g[2]));
  // The vertex of the parabola separates the two roots.
  const double det_g = g[0] * g[2] - g[1] * g[1];
  const double vertex = (a[0] * g[2] + a[2] * g[0] - 2.0 * a[1] * g[1]) / (2.0 * det_g);
  auto bisect = [&](double lo, double hi) {
    const bool lo_positive = p(lo) > 0.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      ((p(mid) > 0.0) == lo_positive ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };
  return {bisect(-bound, vertex), bisect(vertex, bound)};
}

std::array<double, 3> random_spd() {
  const double a = uniform(0.3, 3.0), c = uniform(0.3, 3.0);
  const double b = uniform(-0.9, 0.9) * std::sqrt(a * c);
  return {a, b, c};
}

TEST(Pencil, UmbilicAndDiagonalExamples) {
  const std::array<double, 3> g = random_spd();
  const double c = 1.7;
  const std::array<double, 3> a = {c * g[0], c * g[1], c * g[2]};
  const auto k = pencil_eigenvalues(2, a, g);
  EXPECT_NEAR(k[0], c, 1e-14);
  EXPECT_NEAR(k[1], c, 1e-14);

  const std::array<double, 3> diag = {3.0, 0.0, 1.0}, id = {1.0, 0.0, 1.0};
  const auto d = pencil_eigenvalues(2, diag, id);
  EXPECT_DOUBLE_EQ(d[0], 1.0);
  EXPECT_DOUBLE_EQ(d[1], 3.0);

  const std::array<double, 1> a1 = {2.5}, g1 = {0.5};
  EXPECT_DOUBLE_EQ(pencil_eigenvalues(1, a1, g1)[0], 5.0);
}

TEST(Pencil, RandomPairsMatchBisection) {
  for (int trial = 0; trial < 500; ++trial) {
    const auto g = random_spd();
    const std::array<double, 3> a = {uniform(-2, 2), uniform(-2, 2), uniform(-2, 2)};
    const auto k = pencil_eigenvalues(2, a, g);
    const auto oracle = bisection_roots(a, g);
    EXPECT_NEAR(k[0], oracle[0], 1e-12) << "trial " << trial;
    EXPECT_NEAR(k[1], oracle[1], 1e-12) << "trial " << trial;
    EXPECT_LE(k[0], k[1]);
  }
}

TEST(Pencil, RejectsIndefiniteMetric) {
  const std::array<double, 3> a = {1, 0, 1}, g = {1, 2, 1};
  try {
    pencil_eigenvalues(2, a, g);
    FAIL();
  } catch (const FlowError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateMetric);
  }
}

TEST(PrincipalCurvatures, ShiftedPencilEqualsExplicitSum) {
  const Grid grid(2, 16);
  SymTensorField h(grid), g(grid), hcheck(grid);
  ScalarField shift(grid);
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const auto gp = random_spd();
    shift[p] = uniform(0.5, 3.0);
    const std::array<double, 3> hp = {uniform(-0.1, 0.1), uniform(-0.1, 0.1), uniform(-0.1, 0.1)};
    for (int s = 0; s < 3; ++s) {
      const int i = s == 2 ? 1 : 0, j = s == 0 ? 0 : 1;
      g(i, j)[p] = gp[s];
      h(i, j)[p] = hp[s];
      hcheck(i, j)[p] = hp[s] + shift[p] * gp[s];
    }
  }
  const PrincipalCurvatures shifted = principal_curvatures(h, g, shift);
  const PrincipalCurvatures direct = principal_curvatures(hcheck, g);
  for (std::size_t p = 0; p < grid.size(); ++p) {
    for (int i = 0; i < 2; ++i) EXPECT_NEAR(shifted.at(p)[i], direct.at(p)[i], 1e-13);
  }
}

TEST(Functional, Normalization) {
  for (int n : {1, 2}) {
    const std::vector<double> ones(n, 1.0);
    EXPECT_EQ(CurvatureFunctional(CurvatureKind::Mean, n).evaluate(ones), n);
    EXPECT_EQ(CurvatureFunctional(CurvatureKind::GaussRoot, n).evaluate(ones), n);
  }
}

TEST(Functional, WorkedValues) {
  const std::vector<double> k = {2.0, 8.0};
  EXPECT_EQ(CurvatureFunctional(CurvatureKind::Mean, 2).evaluate(k), 10.0);
  EXPECT_EQ(CurvatureFunctional(CurvatureKind::GaussRoot, 2).evaluate(k), 8.0);
}

TEST(Functional, GaussRootOutsideCone) {
  const CurvatureFunctional f(CurvatureKind::GaussRoot, 2);
  for (const std::vector<double>& k : {std::vector<double>{-1.0, 2.0}, std::vector<double>{0.0, 1.0}}) {
    try {
      f.evaluate(k);
      ADD_FAILURE();
    } catch (const FlowError& e) {
      EXPECT_EQ(e.kind(), ErrorKind::OutsideCone);
    }
  }
  EXPECT_NO_THROW(CurvatureFunctional(CurvatureKind::Mean, 2).evaluate(std::vector<double>{-1.0, 2.0}));
}

TEST(Functional, HomogeneityMonotonicityAndAmGm) {
  for (int trial = 0; trial < 300; ++trial) {
    const int n = uniform_int(1, 2);
    std::vector<double> k(n);
    for (auto& x : k) x = uniform(0.01, 5.0);
    for (CurvatureKind kind : {CurvatureKind::Mean, CurvatureKind::GaussRoot}) {
      const CurvatureFunctional f(kind, n);
      const double base = f.evaluate(k);
      for (double lambda : {0.5, 3.0}) {
        std::vector<double> scaled = k;
        for (auto& x : scaled) x *= lambda;
        EXPECT_NEAR(f.evaluate(scaled), lambda * base, 1e-12 * lambda * base);
      }
      for (int i = 0; i < n; ++i) {
        std::vector<double> bumped = k;
        bumped[i] += 1e-6;
        EXPECT_GT(f.evaluate(bumped), base);
      }
      double sum = 0.0;
      for (double x : k) sum += x;
      EXPECT_NEAR(f.trace_excess(k), sum - base, 1e-12 * sum);
      EXPECT_GE(f.trace_excess(k), 0.0);
    }
    const double mean = CurvatureFunctional(CurvatureKind::Mean, n).evaluate(k);
    const double root = CurvatureFunctional(CurvatureKind::GaussRoot, n).evaluate(k);
    EXPECT_LE(root, mean * (1 + 1e-15));
  }
  const std::vector<double> equal = {1.3, 1.3};
  EXPECT_EQ(CurvatureFunctional(CurvatureKind::GaussRoot, 2).trace_excess(equal), 0.0);
}

TEST(Functional, MeanEqualsTraceWithoutEigenvalues) {
  const Grid grid(2, 16);
  SymTensorField hcheck(grid), g(grid);
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const auto gp = random_spd();
    g(0, 0)[p] = gp[0];
    g(0, 1)[p] = gp[1];
    g(1, 1)[p] = gp[2];
    hcheck(0, 0)[p] = uniform(-2, 2);
    hcheck(0, 1)[p] = uniform(-2, 2);
    hcheck(1, 1)[p] = uniform(-2, 2);
  }
  const ScalarField F = CurvatureFunctional(CurvatureKind::Mean, 2).evaluate(principal_curvatures(hcheck, g), grid);
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const double det = g.at(p, 0, 0) * g.at(p, 1, 1) - g.at(p, 0, 1) * g.at(p, 0, 1);
    const double trace = (g.at(p, 1, 1) * hcheck.at(p, 0, 0) + g.at(p, 0, 0) * hcheck.at(p, 1, 1) -
                          2.0 * g.at(p, 0, 1) * hcheck.at(p, 0, 1)) /
                         det;
    EXPECT_NEAR(F[p], trace, 1e-10);
  }
}

TEST(Functional, ParseNames) {
  EXPECT_EQ(parse_curvature_kind("mean"), CurvatureKind::Mean);
  EXPECT_EQ(parse_curvature_kind("gauss_root"), CurvatureKind::GaussRoot);
  EXPECT_THROW(parse_curvature_kind("scalar"), FlowError);
}

}  // namespace
