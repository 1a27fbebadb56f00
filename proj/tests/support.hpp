#pragma once

// Shared generators and reference computations for the unit tests. Random
// inputs come from a fixed-seed engine so failures reproduce.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "arwflow/grid.hpp"

namespace testing_support {

using arwflow::Grid;
using arwflow::Point;
using arwflow::ScalarField;

inline std::mt19937_64& engine() {
  static std::mt19937_64 rng(20261015);
  return rng;
}

inline double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine()); }
inline int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine()); }

// sum_k a_k cos(k.x) + b_k sin(k.x) over |k_i| <= degree, with the derivative
// taken term by term from the coefficients.
struct TrigPolynomial {
  struct Term {
    int k0, k1;
    double a, b;
  };
  std::vector<Term> terms;

  static TrigPolynomial random(int dim, int degree, double scale = 1.0) {
    TrigPolynomial p;
    for (int k0 = 0; k0 <= degree; ++k0) {
      for (int k1 = (dim == 2 ? -degree : 0); k1 <= (dim == 2 ? degree : 0); ++k1) {
        p.terms.push_back({k0, k1, uniform(-scale, scale), uniform(-scale, scale)});
      }
    }
    return p;
  }

  double operator()(const Point& x) const {
    double s = 0.0;
    for (const auto& t : terms) {
      const double phase = t.k0 * x[0] + t.k1 * x[1];
      s += t.a * std::cos(phase) + t.b * std::sin(phase);
    }
    return s;
  }

  // d/dx^axis: a cos + b sin -> k (b cos - a sin).
  TrigPolynomial derivative(int axis) const {
    TrigPolynomial d;
    for (const auto& t : terms) {
      const int k = axis == 0 ? t.k0 : t.k1;
      d.terms.push_back({t.k0, t.k1, k * t.b, -k * t.a});
    }
    return d;
  }

  ScalarField sample(const Grid& grid) const { return ScalarField::sample(grid, *this); }
};

// Mean-zero Poisson kernel: analytic, with geometric (not finite) Fourier tail.
inline double poisson_bump(double theta, double r) {
  return (1.0 - r * r) / (1.0 - 2.0 * r * std::cos(theta) + r * r) - 1.0;
}

// Random smooth spacelike height: mean in [-0.7, -0.4], a few analytic bumps
// and low modes with total slope well inside the light cone.
struct RandomHeight {
  double mean;
  struct Bump {
    double amp, r, shift;
    int axis;
  };
  std::vector<Bump> bumps;
  TrigPolynomial low;

  static RandomHeight random(int dim) {
    RandomHeight h;
    h.mean = uniform(-0.7, -0.4);
    const int count = uniform_int(1, 3);
    for (int k = 0; k < count; ++k) {
      h.bumps.push_back({uniform(-0.02, 0.02), uniform(0.35, 0.45), uniform(0.0, 6.3), dim == 2 ? uniform_int(0, 1) : 0});
    }
    h.low = TrigPolynomial::random(dim, 2, 0.01);
    return h;
  }

  double operator()(const Point& x) const {
    double u = mean + low(x);
    for (const auto& b : bumps) u += b.amp * poisson_bump(x[b.axis] - b.shift, b.r);
    return u;
  }

  ScalarField sample(const Grid& grid) const { return ScalarField::sample(grid, *this); }
};

inline double sup_diff(const ScalarField& a, const ScalarField& b) {
  double worst = 0.0;
  for (std::size_t p = 0; p < a.size(); ++p) worst = std::max(worst, std::abs(a[p] - b[p]));
  return worst;
}

}  // namespace testing_support
