#include "arwflow/background.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "arwflow/errors.hpp"

namespace arwflow {

namespace {

std::string structural_problem(const BackgroundParams& p) {
  if (p.n != 1 && p.n != 2) return "n must be 1 or 2";
  if (!(p.n + p.omega - 2.0 > 0.0)) return "n + omega - 2 must be > 0";
  if (!(p.mass_m > 0.0)) return "mass_m must be > 0";
  if (!(p.tau_min < 0.0)) return "tau_min must be negative";
  if (p.epsilon < 0.0) return "epsilon must be >= 0";
  if (p.delta < 0.0) return "delta must be >= 0";
  if (p.p_psi < 0 || p.p_sigma < 0) return "perturbation powers must be >= 0";
  if (!(p.delta * std::pow(-p.tau_min, p.p_sigma) < 1.0)) return "delta * |tau_min|^p_sigma must be < 1";
  if (p.n == 1 && p.psi_mode[1] != 0) return "psi_mode must have a single component for n = 1";
  return {};
}

double power_or_one(double base, int exponent) { return exponent == 0 ? 1.0 : std::pow(base, exponent); }

}  // namespace

ArwBackground::ArwBackground(BackgroundParams params) : params_(params) {
  if (auto problem = structural_problem(params_); !problem.empty()) {
    throw FlowError(ErrorKind::OutOfRange, problem);
  }
}

void ArwBackground::require_in_range(double tau) const {
  if (!(tau > params_.tau_min && tau < 0.0)) {
    std::ostringstream msg;
    msg << "tau = " << tau << " outside (" << params_.tau_min << ", 0)";
    throw FlowError(ErrorKind::OutOfRange, msg.str());
  }
}

ConformalFactor ArwBackground::f_eval(double tau) const {
  require_in_range(tau);
  const double gt = gamma_tilde();
  return {std::log(gt * std::sqrt(params_.mass_m) * (-tau)) / gt, 1.0 / (gt * tau), -1.0 / (gt * tau * tau)};
}

double ArwBackground::f_derivative(double tau, int order) const {
  require_in_range(tau);
  // D^m f = (-1)^{m-1} (m-1)! / (gt tau^m)
  double factorial = 1.0;
  for (int k = 2; k < order; ++k) factorial *= k;
  const double sign = (order % 2 == 1) ? 1.0 : -1.0;
  return sign * factorial / (gamma_tilde() * std::pow(tau, order));
}

double ArwBackground::exp_f(double tau, double power) const {
  const double gt = gamma_tilde();
  return std::pow(gt * std::sqrt(params_.mass_m) * (-tau), power / gt);
}

PsiPoint ArwBackground::psi_at(double tau, const Point& x) const {
  require_in_range(tau);
  const auto& p = params_;
  if (p.epsilon == 0.0) return {0.0, 0.0, {0.0, 0.0}};
  const double k0 = p.psi_mode[0];
  const double k1 = p.n == 2 ? p.psi_mode[1] : 0.0;
  const double phase = k0 * x[0] + k1 * x[1];
  const double amp = p.epsilon * power_or_one(-tau, p.p_psi);
  const double amp_tau = p.p_psi == 0 ? 0.0 : -p.epsilon * p.p_psi * power_or_one(-tau, p.p_psi - 1);
  const double c = std::cos(phase);
  const double s = std::sin(phase);
  return {amp * c, amp_tau * c, {-amp * k0 * s, -amp * k1 * s}};
}

SigmaPoint ArwBackground::sigma_at(double tau) const {
  require_in_range(tau);
  const auto& p = params_;
  if (p.delta == 0.0) return {1.0, 0.0};
  const double scale = 1.0 + p.delta * power_or_one(-tau, p.p_sigma);
  const double scale_dot = p.p_sigma == 0 ? 0.0 : -p.delta * p.p_sigma * power_or_one(-tau, p.p_sigma - 1);
  if (!(scale > 0.0)) throw FlowError(ErrorKind::DegenerateMetric, "sigma scaling is not positive");
  return {scale, scale_dot};
}

PsiFields ArwBackground::psi_eval(double tau, const Grid& grid) const {
  require_in_range(tau);
  PsiFields out{ScalarField(grid), ScalarField(grid), CovectorField(grid)};
  for (std::size_t q = 0; q < grid.size(); ++q) {
    const PsiPoint pt = psi_at(tau, grid.coordinates(q));
    out.psi[q] = pt.psi;
    out.psi_tau[q] = pt.psi_tau;
    for (int i = 0; i < grid.dim(); ++i) out.psi_spatial[i][q] = pt.psi_x[i];
  }
  return out;
}

SigmaFields ArwBackground::sigma_eval(double tau, const Grid& grid) const {
  require_in_range(tau);
  const SigmaPoint s = sigma_at(tau);
  SigmaFields out{SymTensorField(grid), SymTensorField(grid), SymTensorField(grid)};
  for (int i = 0; i < grid.dim(); ++i) {
    out.sigma(i, i) = ScalarField(grid, s.scale);
    out.sigma_dot(i, i) = ScalarField(grid, s.scale_dot);
    out.sigma_inverse(i, i) = ScalarField(grid, 1.0 / s.scale);
  }
  return out;
}

BackgroundSample ArwBackground::sample(double tau, const Grid& grid) const {
  return {f_eval(tau), psi_eval(tau, grid), sigma_eval(tau, grid)};
}

bool ValidationReport::passed() const {
  return std::all_of(conditions.begin(), conditions.end(), [](const ConditionResult& c) { return c.passed; });
}

const ConditionResult* ValidationReport::find(const std::string& name) const {
  for (const auto& c : conditions) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::string ValidationReport::to_text() const {
  std::ostringstream out;
  for (const auto& c : conditions) {
    out << (c.passed ? "PASS " : "FAIL ") << c.name << "  worst_tau=" << c.worst_tau
        << "  worst_value=" << c.worst_value;
    if (!c.detail.empty()) out << "  (" << c.detail << ")";
    out << '\n';
  }
  return out.str();
}

ValidationReport validate_arw(const BackgroundParams& params) {
  ValidationReport report;
  if (auto problem = structural_problem(params); !problem.empty()) {
    report.conditions.push_back({"structure", false, 0.0, 0.0, problem});
    return report;
  }
  report.conditions.push_back({"structure", true, 0.0, 0.0, {}});

  const ArwBackground bg(params);
  const double gt = bg.gamma_tilde();
  const Grid grid(params.n, Grid::kMinPoints);

  // tau_k = tau_min / 2^{k+1}, approaching the singularity.
  std::vector<double> taus;
  for (int k = 0; k < 40; ++k) taus.push_back(params.tau_min * std::ldexp(1.0, -(k + 1)));

  constexpr double kIdentityTol = 1e-12;
  constexpr double kLimitTol = 1e-6;
  constexpr int kMaxOrder = 4;

  auto track = [](ConditionResult& c, double tau, double value, bool bad) {
    if (bad && c.passed) {
      c.passed = false;
      c.worst_tau = tau;
      c.worst_value = value;
    } else if (c.passed && std::abs(value) > std::abs(c.worst_value)) {
      c.worst_tau = tau;
      c.worst_value = value;
    }
  };

  ConditionResult decreasing{"f_prime_negative", true, 0.0, 0.0, "-f' > 0"};
  ConditionResult mass{"mass_limit", true, 0.0, 0.0, "|f'|^2 e^{(n+omega-2) f} = m"};
  ConditionResult second{"f_second_limit", true, 0.0, 0.0, "f'' + gt |f'|^2 = 0"};
  ConditionResult f_bounds{"f_derivative_bounds", true, 0.0, 0.0, "|D^m f| <= c_m |f'|^m, m <= 4"};
  ConditionResult g_bounds{"f_second_derivative_bounds", true, 0.0, 0.0,
                           "|D^m (f'' + gt |f'|^2)| <= c_m |f'|^m, m <= 3"};
  ConditionResult singular{"f_singular_limit", true, 0.0, 0.0, "f -> -infinity"};
  ConditionResult psi_limit{"psi_limit", true, 0.0, 0.0, "e^psi -> 1"};
  ConditionResult psi_deriv{"psi_derivative_limit", true, 0.0, 0.0, "d psi -> 0"};
  ConditionResult sigma_limit{"sigma_limit", true, 0.0, 0.0, "sigma -> sigma_bar, sigma_dot -> 0"};

  std::array<double, kMaxOrder + 1> first_ratio{};
  double previous_f = 0.0;
  double previous_psi = 0.0;
  for (std::size_t k = 0; k < taus.size(); ++k) {
    const double tau = taus[k];
    const ConformalFactor f = bg.f_eval(tau);
    track(decreasing, tau, -f.df, !(-f.df > 0.0));

    const double m_rel = (f.df * f.df * std::exp(2.0 * gt * f.f) - params.mass_m) / params.mass_m;
    track(mass, tau, m_rel, !(std::abs(m_rel) <= kIdentityTol));

    const double s_rel = (f.d2f + gt * f.df * f.df) / std::abs(f.d2f);
    track(second, tau, s_rel, !(std::abs(s_rel) <= kIdentityTol));

    for (int m = 1; m <= kMaxOrder; ++m) {
      const double ratio = std::abs(bg.f_derivative(tau, m)) / std::pow(std::abs(f.df), m);
      if (k == 0) first_ratio[m] = ratio;
      // Bounded: the ratio may not grow as tau -> 0.
      const double growth = ratio / first_ratio[m] - 1.0;
      track(f_bounds, tau, growth, !(growth <= 1e-9) || !std::isfinite(ratio));
    }
    // D^m (f'' + gt f'^2) = f^{(m+2)} + gt sum_j binom(m, j) f^{(j+1)} f^{(m-j+1)}
    for (int m = 1; m <= 3; ++m) {
      double value = bg.f_derivative(tau, m + 2);
      double binom = 1.0;
      for (int j = 0; j <= m; ++j) {
        value += gt * binom * bg.f_derivative(tau, j + 1) * bg.f_derivative(tau, m - j + 1);
        binom = binom * (m - j) / (j + 1);
      }
      const double rel = value / std::abs(bg.f_derivative(tau, m + 2));
      track(g_bounds, tau, rel, !(std::abs(rel) <= 1e-10));
    }

    // A constant decrement per halving of |tau| means f is unbounded below.
    if (k > 0) {
      const double step = previous_f - f.f;
      const double expected = std::log(2.0) / gt;
      track(singular, tau, f.f, !(std::abs(step - expected) <= 1e-9 * expected));
    }
    previous_f = f.f;

    const PsiFields psi = bg.psi_eval(tau, grid);
    const double sup_psi = psi.psi.max_abs();
    double sup_dpsi = psi.psi_tau.max_abs();
    for (int i = 0; i < grid.dim(); ++i) sup_dpsi = std::max(sup_dpsi, psi.psi_spatial[i].max_abs());
    if (k > 0) track(psi_limit, tau, sup_psi, sup_psi > previous_psi && sup_psi > 0.0);
    previous_psi = sup_psi;
    if (k + 1 == taus.size()) {
      const double defect = std::abs(std::expm1(sup_psi));
      track(psi_limit, tau, defect, !(defect <= kLimitTol));
      track(psi_deriv, tau, sup_dpsi, !(sup_dpsi <= kLimitTol));
      const SigmaPoint s = bg.sigma_at(tau);
      const double sigma_defect = std::max(std::abs(s.scale - 1.0), std::abs(s.scale_dot));
      track(sigma_limit, tau, sigma_defect, !(sigma_defect <= kLimitTol));
    }
  }
  for (auto* c : {&decreasing, &mass, &second, &f_bounds, &g_bounds, &singular, &psi_limit, &psi_deriv,
                  &sigma_limit}) {
    report.conditions.push_back(*c);
  }
  return report;
}

}  // namespace arwflow
