#pragma once

// Concrete asymptotically Robertson-Walker background
//
//   ds^2 = e^{2(f + psi)} { -dtau^2 + sigma_ij(tau, x) dx^i dx^j },   a < tau < 0,
//
// with the power-law conformal factor f(tau) = ln(gt sqrt(m) (-tau)) / gt,
// gt = (n + omega - 2) / 2, so that |f'|^2 e^{2 gt f} = m and
// f'' + gt |f'|^2 = 0 hold identically. The perturbations are single modes
//
//   psi   = eps (-tau)^{p_psi} cos(k . x),
//   sigma = (1 + delta (-tau)^{p_sigma}) * identity.

#include <array>
#include <string>
#include <vector>

#include "arwflow/grid.hpp"

namespace arwflow {

struct BackgroundParams {
  int n = 2;
  double omega = 2.0;
  double mass_m = 1.0;
  double epsilon = 0.0;
  std::array<int, 2> psi_mode{1, 0};
  int p_psi = 2;
  double delta = 0.0;
  int p_sigma = 2;
  double tau_min = -2.0;

  double gamma_tilde() const { return 0.5 * (n + omega - 2.0); }
  double gamma() const { return gamma_tilde() / n; }
};

struct ConformalFactor {
  double f;
  double df;
  double d2f;
};

struct PsiPoint {
  double psi;
  double psi_tau;
  std::array<double, 2> psi_x;
};

// sigma_ij = scale * delta_ij, sigma_dot_ij = scale_dot * delta_ij.
struct SigmaPoint {
  double scale;
  double scale_dot;
};

struct PsiFields {
  ScalarField psi;
  ScalarField psi_tau;
  CovectorField psi_spatial;
};

struct SigmaFields {
  SymTensorField sigma;
  SymTensorField sigma_dot;
  SymTensorField sigma_inverse;
};

struct BackgroundSample {
  ConformalFactor f;
  PsiFields psi;
  SigmaFields sigma;
};

class ArwBackground {
 public:
  // Throws OutOfRange when n + omega - 2 <= 0 or any other structural
  // requirement on the parameters fails.
  explicit ArwBackground(BackgroundParams params);

  const BackgroundParams& params() const { return params_; }
  int dim() const { return params_.n; }
  double gamma_tilde() const { return params_.gamma_tilde(); }
  double gamma() const { return params_.gamma(); }

  ConformalFactor f_eval(double tau) const;
  // m-th tau derivative of f, m >= 1, from the closed form.
  double f_derivative(double tau, int order) const;
  // e^{power * f(tau)} evaluated as (gt sqrt(m) (-tau))^{power / gt}.
  double exp_f(double tau, double power) const;

  PsiPoint psi_at(double tau, const Point& x) const;
  SigmaPoint sigma_at(double tau) const;

  PsiFields psi_eval(double tau, const Grid& grid) const;
  SigmaFields sigma_eval(double tau, const Grid& grid) const;
  BackgroundSample sample(double tau, const Grid& grid) const;

  void require_in_range(double tau) const;

 private:
  BackgroundParams params_;
};

struct ConditionResult {
  std::string name;
  bool passed;
  double worst_tau;
  double worst_value;
  std::string detail;
};

struct ValidationReport {
  std::vector<ConditionResult> conditions;

  bool passed() const;
  const ConditionResult* find(const std::string& name) const;
  std::string to_text() const;
};

// Checks the ARW conditions on a geometric tau sequence approaching 0.
// Never throws; structural failures are reported as the "structure" condition.
ValidationReport validate_arw(const BackgroundParams& params);

}  // namespace arwflow
