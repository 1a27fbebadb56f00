#include "arwflow/curvature.hpp"

#include <cmath>
#include <string>

#include "arwflow/errors.hpp"

namespace arwflow {

std::string_view to_string(CurvatureKind kind) {
  return kind == CurvatureKind::Mean ? "mean" : "gauss_root";
}

CurvatureKind parse_curvature_kind(std::string_view name) {
  if (name == "mean") return CurvatureKind::Mean;
  if (name == "gauss_root") return CurvatureKind::GaussRoot;
  throw FlowError(ErrorKind::InvalidConfig, "unknown curvature functional '" + std::string(name) + "'");
}

std::array<double, 2> pencil_eigenvalues(int n, std::span<const double> a, std::span<const double> g) {
  if (n == 1) {
    if (!(g[0] > 0.0)) throw FlowError(ErrorKind::DegenerateMetric, "metric not positive definite");
    return {a[0] / g[0], 0.0};
  }
  const double det_g = g[0] * g[2] - g[1] * g[1];
  if (!(g[0] > 0.0) || !(det_g > 0.0)) throw FlowError(ErrorKind::DegenerateMetric, "metric not positive definite");
  // B = G^{-1} A, then eigenvalues of the (non-symmetric) 2x2 matrix B.
  const double inv = 1.0 / det_g;
  const double b11 = inv * (g[2] * a[0] - g[1] * a[1]);
  const double b12 = inv * (g[2] * a[1] - g[1] * a[2]);
  const double b21 = inv * (-g[1] * a[0] + g[0] * a[1]);
  const double b22 = inv * (-g[1] * a[1] + g[0] * a[2]);
  const double half_trace = 0.5 * (b11 + b22);
  const double half_diff = 0.5 * (b11 - b22);
  // Real spectrum: negative values are roundoff.
  const double disc = std::sqrt(std::max(half_diff * half_diff + b12 * b21, 0.0));
  return {half_trace - disc, half_trace + disc};
}

namespace {

PrincipalCurvatures pencil_field(const SymTensorField& a, const SymTensorField& g, const ScalarField* shift) {
  const Grid& grid = g.grid();
  const int n = grid.dim();
  PrincipalCurvatures out(n, grid.size());
  for (std::size_t p = 0; p < grid.size(); ++p) {
    std::array<double, 3> av{}, gv{};
    if (n == 1) {
      av[0] = a.at(p, 0, 0);
      gv[0] = g.at(p, 0, 0);
    } else {
      av = {a.at(p, 0, 0), a.at(p, 0, 1), a.at(p, 1, 1)};
      gv = {g.at(p, 0, 0), g.at(p, 0, 1), g.at(p, 1, 1)};
    }
    const auto ev = pencil_eigenvalues(n, av, gv);
    auto dst = out.at(p);
    for (int i = 0; i < n; ++i) dst[i] = ev[i] + (shift ? (*shift)[p] : 0.0);
  }
  return out;
}

}  // namespace

PrincipalCurvatures principal_curvatures(const SymTensorField& hcheck, const SymTensorField& g) {
  return pencil_field(hcheck, g, nullptr);
}

PrincipalCurvatures principal_curvatures(const SymTensorField& h, const SymTensorField& g,
                                         const ScalarField& shift) {
  return pencil_field(h, g, &shift);
}

double CurvatureFunctional::evaluate(std::span<const double> kappa) const {
  if (kind_ == CurvatureKind::Mean) {
    double sum = 0.0;
    for (double k : kappa) sum += k;
    return sum;
  }
  for (double k : kappa) {
    if (!(k > 0.0)) throw FlowError(ErrorKind::OutsideCone, "gauss_root needs all principal curvatures > 0");
  }
  // n (prod kappa)^{1/n}
  return n_ == 1 ? kappa[0] : 2.0 * std::sqrt(kappa[0] * kappa[1]);
}

ScalarField CurvatureFunctional::evaluate(const PrincipalCurvatures& kappa, const Grid& grid) const {
  ScalarField out(grid);
  for (std::size_t p = 0; p < grid.size(); ++p) out[p] = evaluate(kappa.at(p));
  return out;
}

double CurvatureFunctional::trace_excess(std::span<const double> kappa) const {
  if (kind_ == CurvatureKind::Mean || n_ == 1) return 0.0;
  // 2 (AM - GM) = (k2 - k1)^2 / (sqrt(k1) + sqrt(k2))^2
  const double diff = kappa[1] - kappa[0];
  const double root_sum = std::sqrt(kappa[0]) + std::sqrt(kappa[1]);
  return diff * diff / (root_sum * root_sum);
}

}  // namespace arwflow
