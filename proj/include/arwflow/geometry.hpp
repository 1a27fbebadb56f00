#pragma once

// Geometry of the spacelike graph M = {(u(x), x)} in the conformal metric
// -dtau^2 + sigma_ij(tau, x) dx^i dx^j, plus the physical (breve) quantities
// of e^{2 psi_tilde} times that metric, psi_tilde = f + psi.
//
// Conventions: the unit normal is past directed, nu = -vt (1, u^i) with
// u^i = sigma^{ij} u_j and vt = 1 / sqrt(1 - |Du|_sigma^2); the second
// fundamental form satisfies h_ij vt = -u_;ij + hbar_ij with hbar = -sigma_dot / 2.

#include "arwflow/background.hpp"
#include "arwflow/curvature.hpp"
#include "arwflow/grid.hpp"

namespace arwflow {

// Flow unknown: rescaled height w = u e^{gamma t}.
struct GraphState {
  double t = 0.0;
  ScalarField w;

  ScalarField height(double gamma) const;
};

struct GeometryBundle {
  double t;
  ScalarField u;
  CovectorField du;
  SymTensorField hess_coord;     // d_i d_j u
  ScalarField v;
  ScalarField vt;
  ScalarField vt2_minus_one;     // vt^2 - 1 = |Du|_g^2 without cancellation
  CovectorField u_up;            // sigma^{ij} u_j
  ScalarField sigma_scale;       // sigma_ij = sigma_scale delta_ij at tau = u(x)
  ScalarField sigma_scale_dot;
  SymTensorField g;
  SymTensorField g_inv;
  SymTensorField hess_cov;       // u_;ij with respect to g
  SymTensorField hbar;
  SymTensorField h;
  SymTensorField hcheck;
  ScalarField mean_h;            // H = g^{ij} h_ij
  ScalarField f_prime;           // f'(u(x))
  ScalarField psi_nu;            // psi_alpha nu^alpha
  ScalarField shift;             // -vt f' + psi_nu, so hcheck = h + shift g
  PrincipalCurvatures kappa;
  ScalarField F;
  MixedTensorField umbilic_defect;  // hcheck^i_j - (F / n) delta^i_j
  // Physical metric quantities.
  ScalarField exp_minus_psi_tilde;
  ScalarField breve_F;           // e^{-psi_tilde} F (breve H for the mean functional)
  MixedTensorField breve_h;      // e^{-psi_tilde} hcheck^i_j
  SymTensorField breve_g;        // e^{2 psi_tilde} g_ij

  const Grid& grid() const { return u.grid(); }
  int dim() const { return grid().dim(); }
};

// Throws NotSpacelike, FlowDegenerate (F <= 0), OutsideCone (gauss_root),
// OutOfRange (u outside (a, 0)) or InvalidField (non-finite data).
GeometryBundle build_geometry(const GraphState& state, const ArwBackground& background,
                              const CurvatureFunctional& functional, double spacelike_margin = 1e-3);

// h_ij from the ambient Gauss formula: Christoffel symbols of
// -dtau^2 + sigma_ij(tau) dx^i dx^j acting on the embedding x -> (u(x), x).
SymTensorField second_fundamental_ambient(const GraphState& state, const ArwBackground& background,
                                          double spacelike_margin = 1e-3);

// (1 / sqrt(det g)) d_i (sqrt(det g) g^{ij} d_j f)
ScalarField laplacian_induced(const ScalarField& f, const GeometryBundle& bundle);

// g^{ij} d_i a d_j b
ScalarField inner_gradient(const ScalarField& a, const ScalarField& b, const GeometryBundle& bundle);

}  // namespace arwflow
