#pragma once

// Uniform periodic grids over S^1 and the flat 2-torus, with sampled
// scalar, covector and symmetric 2-tensor fields and the calculus needed by
// the flow (coordinate derivatives, quadrature, oscillation).

#include <array>
#include <cstddef>
#include <memory>
#include <numbers>
#include <span>
#include <vector>

namespace arwflow {

enum class DerivativeScheme { Spectral, FiniteDifference4 };

namespace detail {
class SpectralPlan;
}

using Point = std::array<double, 2>;

class Grid {
 public:
  static constexpr int kMinPoints = 16;

  Grid(int dim, int points_per_axis, DerivativeScheme scheme = DerivativeScheme::Spectral,
       double period = 2.0 * std::numbers::pi);

  int dim() const { return dim_; }
  int points_per_axis() const { return points_; }
  std::size_t size() const { return size_; }
  double period() const { return period_; }
  double spacing() const { return period_ / points_; }
  DerivativeScheme scheme() const { return scheme_; }

  // Flat index layout is row-major with axis 0 slowest: flat = i * N + j.
  std::size_t index(int i, int j = 0) const;
  Point coordinates(std::size_t flat) const;

  // Same discretization (dimension, resolution, period, scheme).
  bool operator==(const Grid& other) const;

  const detail::SpectralPlan& spectral() const { return *plan_; }

 private:
  int dim_;
  int points_;
  std::size_t size_;
  double period_;
  DerivativeScheme scheme_;
  std::shared_ptr<const detail::SpectralPlan> plan_;
};

class ScalarField {
 public:
  explicit ScalarField(const Grid& grid, double value = 0.0);
  ScalarField(const Grid& grid, std::vector<double> values);

  template <class Fn>
  static ScalarField sample(const Grid& grid, Fn&& fn) {
    ScalarField out(grid);
    for (std::size_t p = 0; p < grid.size(); ++p) out.values_[p] = fn(grid.coordinates(p));
    return out;
  }

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  double operator[](std::size_t p) const { return values_[p]; }
  double& operator[](std::size_t p) { return values_[p]; }

  bool all_finite() const;
  double max() const;
  double min() const;
  double max_abs() const;

  ScalarField& operator+=(const ScalarField& other);
  ScalarField& operator-=(const ScalarField& other);
  ScalarField& operator*=(double s);

 private:
  Grid grid_;
  std::vector<double> values_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(double s, ScalarField a);

class CovectorField {
 public:
  explicit CovectorField(const Grid& grid);

  const Grid& grid() const { return components_.front().grid(); }
  int dim() const { return static_cast<int>(components_.size()); }
  const ScalarField& operator[](int axis) const { return components_[axis]; }
  ScalarField& operator[](int axis) { return components_[axis]; }
  bool all_finite() const;

 private:
  std::vector<ScalarField> components_;
};

// Only the n(n+1)/2 independent components are stored; (i,j) and (j,i) alias.
class SymTensorField {
 public:
  explicit SymTensorField(const Grid& grid);
  static SymTensorField identity(const Grid& grid);

  const Grid& grid() const { return components_.front().grid(); }
  int dim() const { return dim_; }
  const ScalarField& operator()(int i, int j) const { return components_[slot(i, j)]; }
  ScalarField& operator()(int i, int j) { return components_[slot(i, j)]; }
  double at(std::size_t p, int i, int j) const { return components_[slot(i, j)][p]; }
  bool all_finite() const;

 private:
  int slot(int i, int j) const;

  int dim_;
  std::vector<ScalarField> components_;
};

// Full n x n component storage for mixed tensors such as h^j_i.
class MixedTensorField {
 public:
  explicit MixedTensorField(const Grid& grid);

  int dim() const { return dim_; }
  const ScalarField& operator()(int i, int j) const { return components_[i * dim_ + j]; }
  ScalarField& operator()(int i, int j) { return components_[i * dim_ + j]; }

 private:
  int dim_;
  std::vector<ScalarField> components_;
};

ScalarField partial_derivative(const ScalarField& f, int axis);

// Raw second coordinate derivatives, d_i d_j f, by repeated first derivatives.
SymTensorField hessian_coordinates(const ScalarField& f);

// Rectangle rule sum f sqrt(det vol) dx^n, spectrally accurate for smooth periodic f.
double integrate(const ScalarField& f, const SymTensorField& vol);

double oscillation(const ScalarField& f);

// Fraction of spectral energy carried by modes above 2/3 of the Nyquist
// wavenumber (any axis). Used to flag under-resolved states.
double spectral_tail_ratio(const ScalarField& f);

}  // namespace arwflow
