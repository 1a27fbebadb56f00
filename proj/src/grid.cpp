#include "arwflow/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "arwflow/errors.hpp"

namespace arwflow {

namespace detail {

// FFTW plans for one grid shape. Plans are created once; execution goes
// through the new-array interface on per-call buffers so concurrent use is safe.
class SpectralPlan {
 public:
  SpectralPlan(int dim, int points) : dim_(dim), points_(points) {
    real_size_ = dim == 1 ? points : static_cast<std::size_t>(points) * points;
    half_ = points / 2 + 1;
    complex_size_ = dim == 1 ? half_ : static_cast<std::size_t>(points) * half_;
    RealBuffer r(real_size_);
    ComplexBuffer c(complex_size_);
    if (dim == 1) {
      forward_ = fftw_plan_dft_r2c_1d(points, r.data, c.data, FFTW_ESTIMATE);
      backward_ = fftw_plan_dft_c2r_1d(points, c.data, r.data, FFTW_ESTIMATE);
    } else {
      forward_ = fftw_plan_dft_r2c_2d(points, points, r.data, c.data, FFTW_ESTIMATE);
      backward_ = fftw_plan_dft_c2r_2d(points, points, c.data, r.data, FFTW_ESTIMATE);
    }
  }

  ~SpectralPlan() {
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
  }

  SpectralPlan(const SpectralPlan&) = delete;
  SpectralPlan& operator=(const SpectralPlan&) = delete;

  struct RealBuffer {
    explicit RealBuffer(std::size_t n) : data(fftw_alloc_real(n)) {}
    ~RealBuffer() { fftw_free(data); }
    RealBuffer(const RealBuffer&) = delete;
    RealBuffer& operator=(const RealBuffer&) = delete;
    double* data;
  };
  struct ComplexBuffer {
    explicit ComplexBuffer(std::size_t n) : data(fftw_alloc_complex(n)) {}
    ~ComplexBuffer() { fftw_free(data); }
    ComplexBuffer(const ComplexBuffer&) = delete;
    ComplexBuffer& operator=(const ComplexBuffer&) = delete;
    fftw_complex* data;
  };

  // Signed wavenumber index along an axis; for axis dim-1 the r2c half axis.
  int wavenumber(int index) const { return index <= points_ / 2 ? index : index - points_; }

  template <class ModeFn>
  void transform_modes(std::span<const double> in, std::span<double> out, ModeFn&& fn) const {
    RealBuffer r(real_size_);
    ComplexBuffer c(complex_size_);
    std::copy(in.begin(), in.end(), r.data);
    fftw_execute_dft_r2c(forward_, r.data, c.data);
    for (std::size_t q = 0; q < complex_size_; ++q) {
      int k0, k1;
      if (dim_ == 1) {
        k0 = static_cast<int>(q);
        k1 = 0;
      } else {
        k0 = wavenumber(static_cast<int>(q / half_));
        k1 = static_cast<int>(q % half_);
      }
      std::complex<double> z(c.data[q][0], c.data[q][1]);
      z = fn(k0, k1, z);
      c.data[q][0] = z.real();
      c.data[q][1] = z.imag();
    }
    fftw_execute_dft_c2r(backward_, c.data, r.data);
    const double scale = 1.0 / static_cast<double>(real_size_);
    for (std::size_t p = 0; p < real_size_; ++p) out[p] = r.data[p] * scale;
  }

  template <class ModeFn>
  void visit_modes(std::span<const double> in, ModeFn&& fn) const {
    RealBuffer r(real_size_);
    ComplexBuffer c(complex_size_);
    std::copy(in.begin(), in.end(), r.data);
    fftw_execute_dft_r2c(forward_, r.data, c.data);
    for (std::size_t q = 0; q < complex_size_; ++q) {
      int k0, k1;
      if (dim_ == 1) {
        k0 = static_cast<int>(q);
        k1 = 0;
      } else {
        k0 = wavenumber(static_cast<int>(q / half_));
        k1 = static_cast<int>(q % half_);
      }
      // Modes strictly inside the half axis stand for a conjugate pair.
      const int half_axis_k = dim_ == 1 ? k0 : k1;
      const double weight = (half_axis_k == 0 || 2 * half_axis_k == points_) ? 1.0 : 2.0;
      fn(k0, k1, std::norm(std::complex<double>(c.data[q][0], c.data[q][1])) * weight);
    }
  }

  int dim() const { return dim_; }
  int points() const { return points_; }

 private:
  int dim_;
  int points_;
  std::size_t real_size_;
  std::size_t half_;
  std::size_t complex_size_;
  fftw_plan forward_;
  fftw_plan backward_;
};

}  // namespace detail

Grid::Grid(int dim, int points_per_axis, DerivativeScheme scheme, double period)
    : dim_(dim), points_(points_per_axis), period_(period), scheme_(scheme) {
  if (dim != 1 && dim != 2) {
    throw FlowError(ErrorKind::OutOfRange, "grid dimension must be 1 or 2, got " + std::to_string(dim));
  }
  if (points_per_axis < kMinPoints) {
    throw FlowError(ErrorKind::OutOfRange,
                    "points_per_axis must be >= 16, got " + std::to_string(points_per_axis));
  }
  if (!(period > 0.0) || !std::isfinite(period)) {
    throw FlowError(ErrorKind::OutOfRange, "grid period must be positive");
  }
  size_ = dim == 1 ? static_cast<std::size_t>(points_) : static_cast<std::size_t>(points_) * points_;
  plan_ = std::make_shared<const detail::SpectralPlan>(dim, points_);
}

std::size_t Grid::index(int i, int j) const {
  auto wrap = [this](int k) { return ((k % points_) + points_) % points_; };
  if (dim_ == 1) return static_cast<std::size_t>(wrap(i));
  return static_cast<std::size_t>(wrap(i)) * points_ + wrap(j);
}

Point Grid::coordinates(std::size_t flat) const {
  const double h = spacing();
  if (dim_ == 1) return {h * static_cast<double>(flat), 0.0};
  return {h * static_cast<double>(flat / points_), h * static_cast<double>(flat % points_)};
}

bool Grid::operator==(const Grid& other) const {
  return dim_ == other.dim_ && points_ == other.points_ && period_ == other.period_ &&
         scheme_ == other.scheme_;
}

ScalarField::ScalarField(const Grid& grid, double value) : grid_(grid), values_(grid.size(), value) {}

ScalarField::ScalarField(const Grid& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid.size()) {
    throw FlowError(ErrorKind::InvalidField, "value count does not match grid size");
  }
}

bool ScalarField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double x) { return std::isfinite(x); });
}

double ScalarField::max() const { return *std::max_element(values_.begin(), values_.end()); }
double ScalarField::min() const { return *std::min_element(values_.begin(), values_.end()); }

double ScalarField::max_abs() const {
  double m = 0.0;
  for (double x : values_) m = std::max(m, std::abs(x));
  return m;
}

ScalarField& ScalarField::operator+=(const ScalarField& other) {
  for (std::size_t p = 0; p < values_.size(); ++p) values_[p] += other.values_[p];
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& other) {
  for (std::size_t p = 0; p < values_.size(); ++p) values_[p] -= other.values_[p];
  return *this;
}

ScalarField& ScalarField::operator*=(double s) {
  for (double& x : values_) x *= s;
  return *this;
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(double s, ScalarField a) { return a *= s; }

CovectorField::CovectorField(const Grid& grid) : components_(grid.dim(), ScalarField(grid)) {}

bool CovectorField::all_finite() const {
  return std::all_of(components_.begin(), components_.end(),
                     [](const ScalarField& c) { return c.all_finite(); });
}

SymTensorField::SymTensorField(const Grid& grid)
    : dim_(grid.dim()), components_(grid.dim() * (grid.dim() + 1) / 2, ScalarField(grid)) {}

SymTensorField SymTensorField::identity(const Grid& grid) {
  SymTensorField out(grid);
  for (int i = 0; i < grid.dim(); ++i) out(i, i) = ScalarField(grid, 1.0);
  return out;
}

int SymTensorField::slot(int i, int j) const {
  if (i > j) std::swap(i, j);
  // n=1: [11]; n=2: [11, 12, 22]
  return dim_ == 1 ? 0 : i + j;
}

bool SymTensorField::all_finite() const {
  return std::all_of(components_.begin(), components_.end(),
                     [](const ScalarField& c) { return c.all_finite(); });
}

MixedTensorField::MixedTensorField(const Grid& grid)
    : dim_(grid.dim()), components_(grid.dim() * grid.dim(), ScalarField(grid)) {}

namespace {

void require_finite(const ScalarField& f, const char* where) {
  if (!f.all_finite()) throw FlowError(ErrorKind::InvalidField, std::string("non-finite input to ") + where);
}

ScalarField spectral_derivative(const ScalarField& f, int axis) {
  const Grid& grid = f.grid();
  const int n = grid.points_per_axis();
  const double scale = 2.0 * std::numbers::pi / grid.period();
  ScalarField out(grid);
  grid.spectral().transform_modes(f.values(), out.values(), [&](int k0, int k1, std::complex<double> z) {
    int k = axis == 0 ? k0 : k1;
    // The Nyquist mode has no odd-derivative counterpart on the grid.
    if (2 * std::abs(k) == n) k = 0;
    return z * std::complex<double>(0.0, scale * k);
  });
  return out;
}

ScalarField fd4_derivative(const ScalarField& f, int axis) {
  const Grid& grid = f.grid();
  const int n = grid.points_per_axis();
  const double inv = 1.0 / (12.0 * grid.spacing());
  ScalarField out(grid);
  auto at = [&](int i, int j) { return f[grid.index(i, j)]; };
  if (grid.dim() == 1) {
    for (int i = 0; i < n; ++i) {
      out[grid.index(i)] = (-at(i + 2, 0) + 8.0 * at(i + 1, 0) - 8.0 * at(i - 1, 0) + at(i - 2, 0)) * inv;
    }
    return out;
  }
  const int di = axis == 0 ? 1 : 0;
  const int dj = axis == 1 ? 1 : 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      out[grid.index(i, j)] = (-at(i + 2 * di, j + 2 * dj) + 8.0 * at(i + di, j + dj) -
                               8.0 * at(i - di, j - dj) + at(i - 2 * di, j - 2 * dj)) *
                              inv;
    }
  }
  return out;
}

}  // namespace

ScalarField partial_derivative(const ScalarField& f, int axis) {
  require_finite(f, "partial_derivative");
  if (axis < 0 || axis >= f.grid().dim()) {
    throw FlowError(ErrorKind::OutOfRange, "derivative axis out of range");
  }
  return f.grid().scheme() == DerivativeScheme::Spectral ? spectral_derivative(f, axis)
                                                         : fd4_derivative(f, axis);
}

SymTensorField hessian_coordinates(const ScalarField& f) {
  const Grid& grid = f.grid();
  SymTensorField out(grid);
  for (int i = 0; i < grid.dim(); ++i) {
    ScalarField first = partial_derivative(f, i);
    for (int j = i; j < grid.dim(); ++j) out(i, j) = partial_derivative(first, j);
  }
  return out;
}

double integrate(const ScalarField& f, const SymTensorField& vol) {
  require_finite(f, "integrate");
  const Grid& grid = f.grid();
  double sum = 0.0;
  for (std::size_t p = 0; p < grid.size(); ++p) {
    double det;
    if (grid.dim() == 1) {
      det = vol.at(p, 0, 0);
      if (!(det > 0.0)) throw FlowError(ErrorKind::DegenerateMetric, "volume form not positive definite");
    } else {
      const double a = vol.at(p, 0, 0);
      det = a * vol.at(p, 1, 1) - vol.at(p, 0, 1) * vol.at(p, 0, 1);
      if (!(a > 0.0) || !(det > 0.0)) {
        throw FlowError(ErrorKind::DegenerateMetric, "volume form not positive definite");
      }
    }
    sum += f[p] * std::sqrt(det);
  }
  return sum * std::pow(grid.spacing(), grid.dim());
}

double oscillation(const ScalarField& f) { return f.max() - f.min(); }

double spectral_tail_ratio(const ScalarField& f) {
  require_finite(f, "spectral_tail_ratio");
  const int n = f.grid().points_per_axis();
  const double cutoff = n / 3.0;  // 2/3 of the Nyquist wavenumber n/2
  double total = 0.0;
  double tail = 0.0;
  f.grid().spectral().visit_modes(f.values(), [&](int k0, int k1, double energy) {
    total += energy;
    if (std::max(std::abs(k0), std::abs(k1)) > cutoff) tail += energy;
  });
  return total > 0.0 ? tail / total : 0.0;
}

}  // namespace arwflow
