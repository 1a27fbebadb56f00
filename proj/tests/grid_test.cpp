#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "arwflow/errors.hpp"
#include "arwflow/grid.hpp"
#include "support.hpp"

using namespace arwflow;
using namespace testing_support;

namespace {

constexpr double kPi = std::numbers::pi;

TEST(Grid, RejectsTooFewPointsAndBadDimension) {
  EXPECT_THROW(Grid(1, 8), FlowError);
  EXPECT_THROW(Grid(3, 32), FlowError);
  EXPECT_NO_THROW(Grid(2, 16));
}

TEST(Grid, IndexWrapsModularly) {
  const Grid grid(2, 16);
  EXPECT_EQ(grid.index(-1, 0), grid.index(15, 0));
  EXPECT_EQ(grid.index(16, 17), grid.index(0, 1));
  EXPECT_DOUBLE_EQ(grid.spacing(), 2.0 * kPi / 16);
  const Point x = grid.coordinates(grid.index(3, 5));
  EXPECT_DOUBLE_EQ(x[0], 3 * grid.spacing());
  EXPECT_DOUBLE_EQ(x[1], 5 * grid.spacing());
}

TEST(PartialDerivative, SineOnCircle) {
  const Grid grid(1, 64);
  const auto f = ScalarField::sample(grid, [](const Point& x) { return std::sin(x[0]); });
  const auto expected = ScalarField::sample(grid, [](const Point& x) { return std::cos(x[0]); });
  EXPECT_LT(sup_diff(partial_derivative(f, 0), expected), 1e-12);
}

TEST(PartialDerivative, ConstantGivesZero) {
  const Grid spectral(2, 32);
  const ScalarField c(spectral, 0.731);
  EXPECT_EQ(partial_derivative(c, 0).max_abs(), 0.0);
  EXPECT_EQ(partial_derivative(c, 1).max_abs(), 0.0);

  const Grid fd(2, 32, DerivativeScheme::FiniteDifference4);
  const ScalarField cf(fd, 0.731);
  EXPECT_LT(partial_derivative(cf, 0).max_abs(), 1e-14);
  EXPECT_LT(partial_derivative(cf, 1).max_abs(), 1e-13);
}

TEST(PartialDerivative, RandomTrigPolynomialsMatchSymbolicDerivative) {
  for (int trial = 0; trial < 20; ++trial) {
    const int dim = 1 + trial % 2;
    const Grid grid(dim, 32);
    const auto poly = TrigPolynomial::random(dim, 5);
    const ScalarField f = poly.sample(grid);
    for (int axis = 0; axis < dim; ++axis) {
      EXPECT_LT(sup_diff(partial_derivative(f, axis), poly.derivative(axis).sample(grid)), 1e-11)
          << "trial " << trial << " axis " << axis;
    }
  }
}

TEST(PartialDerivative, RejectsNonFinite) {
  const Grid grid(1, 16);
  ScalarField f(grid, 1.0);
  f[3] = std::nan("");
  try {
    partial_derivative(f, 0);
    FAIL() << "expected InvalidField";
  } catch (const FlowError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidField);
  }
}

TEST(PartialDerivative, FourthOrderConvergence) {
  auto error = [](int points) {
    const Grid grid(1, points, DerivativeScheme::FiniteDifference4);
    const auto f = ScalarField::sample(grid, [](const Point& x) { return std::exp(std::sin(x[0])); });
    const auto exact =
        ScalarField::sample(grid, [](const Point& x) { return std::cos(x[0]) * std::exp(std::sin(x[0])); });
    return sup_diff(partial_derivative(f, 0), exact);
  };
  for (int n : {32, 64, 128}) EXPECT_GE(error(n) / error(2 * n), 12.0) << "at " << n << " points";
}

TEST(PartialDerivative, MixedDerivativesCommute) {
  const Grid grid(2, 32);
  const auto f = RandomHeight::random(2).sample(grid);
  const auto xy = partial_derivative(partial_derivative(f, 0), 1);
  const auto yx = partial_derivative(partial_derivative(f, 1), 0);
  EXPECT_LT(sup_diff(xy, yx), 1e-10);
}

TEST(Hessian, SinCosMixedTerm) {
  const Grid grid(2, 32);
  const auto f = ScalarField::sample(grid, [](const Point& x) { return std::sin(x[0]) * std::cos(x[1]); });
  const auto expected = ScalarField::sample(grid, [](const Point& x) { return -std::cos(x[0]) * std::sin(x[1]); });
  const SymTensorField hess = hessian_coordinates(f);
  EXPECT_LT(sup_diff(hess(0, 1), expected), 1e-11);
  EXPECT_LT(sup_diff(hess(1, 0), expected), 1e-11);
}

TEST(Hessian, ConstantAndSymbolic) {
  const Grid grid(2, 32);
  const SymTensorField zero = hessian_coordinates(ScalarField(grid, -2.0));
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) EXPECT_EQ(zero(i, j).max_abs(), 0.0);
  }
  for (int trial = 0; trial < 10; ++trial) {
    const auto poly = TrigPolynomial::random(2, 5);
    const SymTensorField hess = hessian_coordinates(poly.sample(grid));
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        EXPECT_LT(sup_diff(hess(i, j), poly.derivative(i).derivative(j).sample(grid)), 1e-10);
      }
    }
  }
}

TEST(Integrate, FlatTorusVolumeAndModes) {
  const Grid t2(2, 32);
  EXPECT_NEAR(integrate(ScalarField(t2, 1.0), SymTensorField::identity(t2)), 4.0 * kPi * kPi, 1e-12);
  const Grid s1(1, 64);
  const auto sine = ScalarField::sample(t2, [](const Point& x) { return std::sin(x[0]); });
  EXPECT_NEAR(integrate(sine, SymTensorField::identity(t2)), 0.0, 1e-13);
  const auto sin2 = ScalarField::sample(s1, [](const Point& x) { return std::sin(x[0]) * std::sin(x[0]); });
  EXPECT_NEAR(integrate(sin2, SymTensorField::identity(s1)), kPi, 1e-12);
}

TEST(Integrate, DerivativeIntegratesToZero) {
  for (int trial = 0; trial < 10; ++trial) {
    const int dim = 1 + trial % 2;
    const Grid grid(dim, 64);
    const auto f = RandomHeight::random(dim).sample(grid);
    for (int axis = 0; axis < dim; ++axis) {
      EXPECT_NEAR(integrate(partial_derivative(f, axis), SymTensorField::identity(grid)), 0.0, 1e-12);
    }
  }
}

TEST(Integrate, RejectsIndefiniteVolume) {
  const Grid grid(2, 16);
  SymTensorField vol = SymTensorField::identity(grid);
  vol(0, 1)[5] = 2.0;
  try {
    integrate(ScalarField(grid, 1.0), vol);
    FAIL() << "expected DegenerateMetric";
  } catch (const FlowError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateMetric);
  }
}

TEST(Oscillation, Examples) {
  const Grid grid(1, 64);
  EXPECT_EQ(oscillation(ScalarField(grid, 4.0)), 0.0);
  const auto sine = ScalarField::sample(grid, [](const Point& x) { return std::sin(x[0]); });
  EXPECT_NEAR(oscillation(sine), 2.0, 1e-15);
  const auto f = ScalarField::sample(grid, [](const Point& x) { return 0.3 + 0.05 * std::cos(2.0 * x[0]); });
  EXPECT_NEAR(oscillation(f), 0.1, 1e-15);
}

TEST(SpectralTail, ResolvedModeHasNoTailAndHighModeDoes) {
  const Grid grid(2, 32);
  const auto low = ScalarField::sample(grid, [](const Point& x) { return 1.0 + std::sin(x[0] + 2 * x[1]); });
  EXPECT_LT(spectral_tail_ratio(low), 1e-25);
  const auto high = ScalarField::sample(grid, [](const Point& x) { return std::cos(14 * x[1]); });
  EXPECT_GT(spectral_tail_ratio(high), 0.99);
}

}  // namespace
