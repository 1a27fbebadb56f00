#include "arwflow/geometry.hpp"

#include <cmath>
#include <sstream>

#include "arwflow/errors.hpp"

namespace arwflow {

ScalarField GraphState::height(double gamma) const {
  ScalarField u = w;
  u *= std::exp(-gamma * t);
  return u;
}

namespace {

void check_height(const ScalarField& u, const ArwBackground& background) {
  const double a = background.params().tau_min;
  for (std::size_t p = 0; p < u.size(); ++p) {
    if (!std::isfinite(u[p])) throw FlowError(ErrorKind::InvalidField, "non-finite height");
    if (!(u[p] > a && u[p] < 0.0)) {
      std::ostringstream msg;
      msg << "height u = " << u[p] << " outside (" << a << ", 0)";
      throw FlowError(ErrorKind::OutOfRange, msg.str());
    }
  }
}

void throw_not_spacelike(double norm2, double margin) {
  std::ostringstream msg;
  msg << "|Du|^2 = " << norm2 << " exceeds 1 - margin (margin " << margin << ")";
  throw FlowError(ErrorKind::NotSpacelike, msg.str());
}

}  // namespace

GeometryBundle build_geometry(const GraphState& state, const ArwBackground& background,
                              const CurvatureFunctional& functional, double spacelike_margin) {
  const Grid& grid = state.w.grid();
  const int n = grid.dim();
  if (background.dim() != n || functional.dim() != n) {
    throw FlowError(ErrorKind::InvalidField, "background, functional and grid dimensions differ");
  }
  if (!state.w.all_finite()) throw FlowError(ErrorKind::InvalidField, "non-finite rescaled height");

  const double gt = background.gamma_tilde();
  ScalarField u = state.height(background.gamma());
  check_height(u, background);

  CovectorField du(grid);
  for (int i = 0; i < n; ++i) du[i] = partial_derivative(u, i);
  SymTensorField hess = hessian_coordinates(u);

  GeometryBundle b{
      state.t,
      u,
      du,
      hess,
      ScalarField(grid),
      ScalarField(grid),
      ScalarField(grid),
      CovectorField(grid),
      ScalarField(grid),
      ScalarField(grid),
      SymTensorField(grid),
      SymTensorField(grid),
      SymTensorField(grid),
      SymTensorField(grid),
      SymTensorField(grid),
      SymTensorField(grid),
      ScalarField(grid),
      ScalarField(grid),
      ScalarField(grid),
      ScalarField(grid),
      PrincipalCurvatures(n, grid.size()),
      ScalarField(grid),
      MixedTensorField(grid),
      ScalarField(grid),
      ScalarField(grid),
      MixedTensorField(grid),
      SymTensorField(grid),
  };

  // Pointwise metric data.
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const SigmaPoint s = background.sigma_at(u[p]);
    b.sigma_scale[p] = s.scale;
    b.sigma_scale_dot[p] = s.scale_dot;
    double norm2 = 0.0;
    for (int i = 0; i < n; ++i) {
      b.u_up[i][p] = du[i][p] / s.scale;
      norm2 += du[i][p] * b.u_up[i][p];
    }
    if (!(norm2 < 1.0 - spacelike_margin)) throw_not_spacelike(norm2, spacelike_margin);
    const double v2 = 1.0 - norm2;
    b.v[p] = std::sqrt(v2);
    b.vt[p] = 1.0 / b.v[p];
    b.vt2_minus_one[p] = norm2 / v2;
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        const double kron = i == j ? 1.0 : 0.0;
        b.g(i, j)[p] = -du[i][p] * du[j][p] + s.scale * kron;
        b.g_inv(i, j)[p] = kron / s.scale + (1.0 / v2) * b.u_up[i][p] * b.u_up[j][p];
      }
    }
  }

  // Christoffel symbols of g from spectrally differentiated metric components.
  // dg[k][(i,j)] = d_k g_ij
  std::vector<SymTensorField> dg;
  for (int k = 0; k < n; ++k) {
    SymTensorField d(grid);
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) d(i, j) = partial_derivative(b.g(i, j), k);
    }
    dg.push_back(std::move(d));
  }

  for (std::size_t p = 0; p < grid.size(); ++p) {
    double christoffel_lower[2][2][2];  // [l][i][j] = (d_i g_lj + d_j g_li - d_l g_ij) / 2
    for (int l = 0; l < n; ++l) {
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          christoffel_lower[l][i][j] =
              0.5 * (dg[i].at(p, l, j) + dg[j].at(p, l, i) - dg[l].at(p, i, j));
        }
      }
    }
    const double vt = b.vt[p];
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        double gamma_term = 0.0;
        for (int k = 0; k < n; ++k) {
          double gamma_kij = 0.0;
          for (int l = 0; l < n; ++l) gamma_kij += b.g_inv.at(p, k, l) * christoffel_lower[l][i][j];
          gamma_term += gamma_kij * du[k][p];
        }
        b.hess_cov(i, j)[p] = hess.at(p, i, j) - gamma_term;
        b.hbar(i, j)[p] = i == j ? -0.5 * b.sigma_scale_dot[p] : 0.0;
        b.h(i, j)[p] = (-b.hess_cov(i, j)[p] + b.hbar(i, j)[p]) / vt;
      }
    }
    double trace = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) trace += b.g_inv.at(p, i, j) * b.h.at(p, i, j);
    }
    b.mean_h[p] = trace;

    const double tau = u[p];
    const Point x = grid.coordinates(p);
    b.f_prime[p] = 1.0 / (gt * tau);
    const PsiPoint psi = background.psi_at(tau, x);
    double psi_dot_up = psi.psi_tau;
    for (int i = 0; i < n; ++i) psi_dot_up += psi.psi_x[i] * b.u_up[i][p];
    b.psi_nu[p] = -vt * psi_dot_up;
    b.shift[p] = -vt * b.f_prime[p] + b.psi_nu[p];
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) b.hcheck(i, j)[p] = b.h.at(p, i, j) + b.shift[p] * b.g.at(p, i, j);
    }
  }

  b.kappa = principal_curvatures(b.h, b.g, b.shift);

  for (std::size_t p = 0; p < grid.size(); ++p) {
    const auto kappa = b.kappa.at(p);
    const double F = functional.evaluate(kappa);
    if (!std::isfinite(F)) throw FlowError(ErrorKind::InvalidField, "non-finite curvature function");
    if (!(F > 0.0)) {
      std::ostringstream msg;
      msg << "curvature function F = " << F << " is not positive";
      throw FlowError(ErrorKind::FlowDegenerate, msg.str());
    }
    b.F[p] = F;

    // Mixed h^i_j = g^{ik} h_kj and its trace-free part.
    double mixed[2][2];
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        double sum = 0.0;
        for (int k = 0; k < n; ++k) sum += b.g_inv.at(p, i, k) * b.h.at(p, k, j);
        mixed[i][j] = sum;
      }
    }
    const double excess = functional.trace_excess(kappa);

    const double psi = background.psi_at(u[p], grid.coordinates(p)).psi;
    const double emp = background.exp_f(u[p], -1.0) * std::exp(-psi);
    b.exp_minus_psi_tilde[p] = emp;
    b.breve_F[p] = emp * F;
    const double e2 = background.exp_f(u[p], 2.0) * std::exp(2.0 * psi);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const double kron = i == j ? 1.0 : 0.0;
        b.umbilic_defect(i, j)[p] = mixed[i][j] - kron * (b.mean_h[p] - excess) / n;
        b.breve_h(i, j)[p] = emp * (mixed[i][j] + kron * b.shift[p]);
      }
      for (int j = i; j < n; ++j) b.breve_g(i, j)[p] = e2 * b.g.at(p, i, j);
    }
  }
  return b;
}

SymTensorField second_fundamental_ambient(const GraphState& state, const ArwBackground& background,
                                          double spacelike_margin) {
  const Grid& grid = state.w.grid();
  const int n = grid.dim();
  const int dim = n + 1;
  ScalarField u = state.height(background.gamma());
  check_height(u, background);
  CovectorField du(grid);
  for (int i = 0; i < n; ++i) du[i] = partial_derivative(u, i);
  const SymTensorField hess = hessian_coordinates(u);

  SymTensorField h(grid);
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const SigmaPoint s = background.sigma_at(u[p]);
    // Ambient metric diag(-1, s, ..., s) and its Christoffel symbols.
    double metric[3][3] = {};
    double metric_inv[3][3] = {};
    metric[0][0] = metric_inv[0][0] = -1.0;
    for (int i = 1; i < dim; ++i) {
      metric[i][i] = s.scale;
      metric_inv[i][i] = 1.0 / s.scale;
    }
    double chris[3][3][3] = {};  // [alpha][beta][gamma]
    for (int i = 1; i < dim; ++i) {
      chris[0][i][i] = 0.5 * s.scale_dot;
      chris[i][0][i] = chris[i][i][0] = 0.5 * s.scale_dot / s.scale;
    }

    // Tangents x_i = (u_i, e_i); normal from the covector d(tau - u).
    double tangent[2][3] = {};
    double covector[3] = {1.0, 0.0, 0.0};
    for (int i = 0; i < n; ++i) {
      tangent[i][0] = du[i][p];
      tangent[i][i + 1] = 1.0;
      covector[i + 1] = -du[i][p];
    }
    double normal[3] = {};
    for (int a = 0; a < dim; ++a) {
      for (int c = 0; c < dim; ++c) normal[a] += metric_inv[a][c] * covector[c];
    }
    double norm2 = 0.0;
    for (int a = 0; a < dim; ++a) norm2 += normal[a] * covector[a];
    if (!(-norm2 > spacelike_margin)) throw_not_spacelike(1.0 + norm2, spacelike_margin);
    const double scale = 1.0 / std::sqrt(-norm2);
    // normal[0] = -1 before scaling, so the normal is past directed.
    for (double& c : normal) c *= scale;

    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        double second[3] = {hess.at(p, i, j), 0.0, 0.0};
        for (int a = 0; a < dim; ++a) {
          for (int bb = 0; bb < dim; ++bb) {
            for (int c = 0; c < dim; ++c) second[a] += chris[a][bb][c] * tangent[i][bb] * tangent[j][c];
          }
        }
        double pairing = 0.0;
        for (int a = 0; a < dim; ++a) {
          for (int c = 0; c < dim; ++c) pairing += metric[a][c] * second[a] * normal[c];
        }
        h(i, j)[p] = -pairing;
      }
    }
  }
  return h;
}

namespace {

ScalarField sqrt_det(const SymTensorField& g) {
  const Grid& grid = g.grid();
  ScalarField out(grid);
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const double det = grid.dim() == 1 ? g.at(p, 0, 0)
                                       : g.at(p, 0, 0) * g.at(p, 1, 1) - g.at(p, 0, 1) * g.at(p, 0, 1);
    if (!(det > 0.0)) throw FlowError(ErrorKind::DegenerateMetric, "induced metric not positive definite");
    out[p] = std::sqrt(det);
  }
  return out;
}

}  // namespace

ScalarField laplacian_induced(const ScalarField& f, const GeometryBundle& bundle) {
  const Grid& grid = f.grid();
  const int n = grid.dim();
  const ScalarField root = sqrt_det(bundle.g);
  CovectorField df(grid);
  for (int i = 0; i < n; ++i) df[i] = partial_derivative(f, i);
  ScalarField out(grid);
  for (int i = 0; i < n; ++i) {
    ScalarField flux(grid);
    for (std::size_t p = 0; p < grid.size(); ++p) {
      double sum = 0.0;
      for (int j = 0; j < n; ++j) sum += bundle.g_inv.at(p, i, j) * df[j][p];
      flux[p] = root[p] * sum;
    }
    out += partial_derivative(flux, i);
  }
  for (std::size_t p = 0; p < grid.size(); ++p) out[p] /= root[p];
  return out;
}

ScalarField inner_gradient(const ScalarField& a, const ScalarField& b, const GeometryBundle& bundle) {
  const Grid& grid = a.grid();
  const int n = grid.dim();
  CovectorField da(grid), db(grid);
  for (int i = 0; i < n; ++i) {
    da[i] = partial_derivative(a, i);
    db[i] = partial_derivative(b, i);
  }
  ScalarField out(grid);
  for (std::size_t p = 0; p < grid.size(); ++p) {
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) sum += bundle.g_inv.at(p, i, j) * da[i][p] * db[j][p];
    }
    out[p] = sum;
  }
  return out;
}

}  // namespace arwflow
