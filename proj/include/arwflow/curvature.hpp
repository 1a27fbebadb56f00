#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "arwflow/grid.hpp"

namespace arwflow {

enum class CurvatureKind { Mean, GaussRoot };

std::string_view to_string(CurvatureKind kind);
CurvatureKind parse_curvature_kind(std::string_view name);

// Eigenvalues of the pencil (A, G) at each grid point, ascending.
class PrincipalCurvatures {
 public:
  PrincipalCurvatures(int dim, std::size_t points) : dim_(dim), values_(dim * points) {}

  int dim() const { return dim_; }
  std::size_t points() const { return values_.size() / dim_; }
  std::span<const double> at(std::size_t p) const { return {values_.data() + p * dim_, std::size_t(dim_)}; }
  std::span<double> at(std::size_t p) { return {values_.data() + p * dim_, std::size_t(dim_)}; }

 private:
  int dim_;
  std::vector<double> values_;
};

// Generalized eigenvalues of a symmetric n x n pair (n <= 2), G positive definite.
// Components are (11) for n = 1 and (11, 12, 22) for n = 2.
std::array<double, 2> pencil_eigenvalues(int n, std::span<const double> a, std::span<const double> g);

PrincipalCurvatures principal_curvatures(const SymTensorField& hcheck, const SymTensorField& g);

// Eigenvalues of (h + shift g, g): the shifted pencil evaluated without
// forming hcheck, so a large isotropic shift does not swamp the splitting.
PrincipalCurvatures principal_curvatures(const SymTensorField& h, const SymTensorField& g,
                                         const ScalarField& shift);

// Degree-one homogeneous curvature function normalized by F(1,...,1) = n.
class CurvatureFunctional {
 public:
  CurvatureFunctional(CurvatureKind kind, int n) : kind_(kind), n_(n) {}

  CurvatureKind kind() const { return kind_; }
  int dim() const { return n_; }

  // Throws OutsideCone for gauss_root when some kappa_i <= 0.
  double evaluate(std::span<const double> kappa) const;
  ScalarField evaluate(const PrincipalCurvatures& kappa, const Grid& grid) const;

  // sum(kappa) - F(kappa), evaluated without cancellation.
  double trace_excess(std::span<const double> kappa) const;

 private:
  CurvatureKind kind_;
  int n_;
};

}  // namespace arwflow
