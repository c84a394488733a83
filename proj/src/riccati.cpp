#include "ukd/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "ukd/error.hpp"
#include "ukd/linalg.hpp"
#include "ukd/subspaces.hpp"

namespace ukd {

namespace {

using Rhs = std::function<MatrixXd(const MatrixXd&)>;

bool needs_eps(RdeKind kind) {
  return kind == RdeKind::kP || kind == RdeKind::kSEps || kind == RdeKind::kSEpsDual;
}

void check_params(RdeKind kind, const RdeParams& p) {
  if (!(p.tau > 0.0) || !std::isfinite(p.tau)) throw ParameterError("tau must be > 0");
  if (!(p.T > 0.0) || !std::isfinite(p.T)) throw ParameterError("horizon T must be > 0");
  if (p.steps < 1) throw ParameterError("steps must be >= 1");
  if (p.eps && !(*p.eps > 0.0)) throw ParameterError("eps must be > 0");
  if (needs_eps(kind) && !p.eps) {
    throw ParameterError(std::string("eps is required for RDE kind ") + to_string(kind));
  }
}

MatrixXd spd_inverse(const MatrixXd& M) {
  if (M.rows() == 0) return M;
  Eigen::LLT<MatrixXd> llt(M);
  return llt.solve(MatrixXd::Identity(M.rows(), M.cols()));
}

// Right-hand side dX/dt of the requested equation.
Rhs make_rhs(const UncertainSystem& sys, RdeKind kind, double tau) {
  const MatrixXd& A = sys.A;
  const MatrixXd& B1 = sys.B1;
  const MatrixXd& C1 = sys.C1;
  const MatrixXd& D1 = sys.D1;
  const MatrixXd B2B2t = sys.B2 * sys.B2.transpose();
  const MatrixXd C1tC1 = C1.transpose() * C1;
  const Eigen::Index m = sys.m();
  const Eigen::Index h = sys.h();

  switch (kind) {
    case RdeKind::kP: {
      const MatrixXd Rinv = spd_inverse(MatrixXd::Identity(m, m) - tau * D1.transpose() * D1);
      const MatrixXd cross = tau * C1.transpose() * D1;
      return [=](const MatrixXd& P) -> MatrixXd {
        const MatrixXd K = P * B1 - cross;
        return -(A.transpose() * P + P * A - K * Rinv * K.transpose() - P * B2B2t * P / tau -
                 tau * C1tC1);
      };
    }
    case RdeKind::kSEps:
    case RdeKind::kS: {
      const MatrixXd Rinv = spd_inverse(MatrixXd::Identity(m, m) - tau * D1.transpose() * D1);
      const MatrixXd C1tD1 = C1.transpose() * D1;
      return [=](const MatrixXd& S) -> MatrixXd {
        const MatrixXd K = B1 - tau * S * C1tD1;
        return A * S + S * A.transpose() - K * Rinv * K.transpose() - B2B2t / tau -
               tau * S * C1tC1 * S;
      };
    }
    case RdeKind::kSEpsDual:
    case RdeKind::kSDual: {
      const MatrixXd Qinv =
          spd_inverse(MatrixXd::Identity(h, h) / tau - D1 * D1.transpose());
      const MatrixXd B1D1t = B1 * D1.transpose();
      const MatrixXd B1B1t = B1 * B1.transpose();
      return [=](const MatrixXd& S) -> MatrixXd {
        const MatrixXd K = S * C1.transpose() - B1D1t;
        return A * S + S * A.transpose() - K * Qinv * K.transpose() - B2B2t / tau - B1B1t;
      };
    }
  }
  throw ParameterError("unknown RDE kind");
}

MatrixXd terminal_value(RdeKind kind, Eigen::Index n, const RdeParams& p) {
  const MatrixXd I = MatrixXd::Identity(n, n);
  switch (kind) {
    case RdeKind::kP:
      return I / *p.eps;
    case RdeKind::kSEps:
    case RdeKind::kSEpsDual:
      return *p.eps * I;
    case RdeKind::kS:
    case RdeKind::kSDual:
      return MatrixXd::Zero(n, n);
  }
  return I;
}

bool escaped(const MatrixXd& X, double threshold) {
  return !X.allFinite() || X.norm() > threshold;
}

}  // namespace

const char* to_string(RdeKind kind) {
  switch (kind) {
    case RdeKind::kP:
      return "P";
    case RdeKind::kSEps:
      return "S_EPS";
    case RdeKind::kS:
      return "S";
    case RdeKind::kSEpsDual:
      return "S_EPS_DUAL";
    case RdeKind::kSDual:
      return "S_DUAL";
  }
  return "?";
}

int default_rde_steps(double T) {
  return std::max(1, static_cast<int>(std::ceil(2000.0 * T)));
}

bool feasibility(const UncertainSystem& sys, double tau) {
  const Eigen::Index m = sys.m();
  if (m == 0) return true;
  const MatrixXd R = MatrixXd::Identity(m, m) - tau * sys.D1.transpose() * sys.D1;
  return linalg::eig_range(R).min > 1e-12;
}

DualSystem build_dual(const UncertainSystem& sys) {
  return {-sys.A.transpose(), sys.C1.transpose(), sys.B1.transpose(), -sys.D1.transpose(),
          sys.B2.transpose()};
}

RdeSolution solve_rde(const UncertainSystem& sys, RdeKind kind, const RdeParams& params) {
  check_params(kind, params);
  if (!feasibility(sys, params.tau)) {
    std::ostringstream os;
    os << "I - tau D1'D1 is not positive definite for tau = " << params.tau;
    throw FeasibilityError(os.str());
  }

  const Eigen::Index n = sys.n();
  const Rhs f = make_rhs(sys, kind, params.tau);
  const double threshold = 1e9 * (1.0 + system_scale(sys));
  const double h = params.T / params.steps;

  // Integrate in reversed time sigma = T - t, dX/dsigma = -f(X).
  std::vector<MatrixXd> backward;
  backward.reserve(static_cast<std::size_t>(params.steps) + 1);
  MatrixXd X = terminal_value(kind, n, params);
  backward.push_back(X);

  RdeSolution sol;
  for (int i = 0; i < params.steps; ++i) {
    const MatrixXd k1 = -f(X);
    const MatrixXd k2 = -f(X + 0.5 * h * k1);
    const MatrixXd k3 = -f(X + 0.5 * h * k2);
    const MatrixXd k4 = -f(X + h * k3);
    MatrixXd next = linalg::symmetrize(X + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
    if (escaped(next, threshold)) {
      sol.status = RdeSolution::Status::kEscaped;
      sol.escape_time = std::max(0.0, params.T - (i + 1) * h);
      break;
    }
    X = std::move(next);
    backward.push_back(X);
  }

  // Grid point j (counted backward) sits at t = T - j h.
  const std::size_t count = backward.size();
  sol.times.resize(count);
  sol.values.resize(count);
  for (std::size_t j = 0; j < count; ++j) {
    const std::size_t idx = count - 1 - j;
    sol.times[idx] = (static_cast<int>(j) == params.steps) ? 0.0 : params.T - j * h;
    sol.values[idx] = std::move(backward[j]);
  }
  return sol;
}

DualDeviation dual_form_equivalence(const UncertainSystem& sys, const RdeParams& params) {
  const auto sup_dev = [&](RdeKind a, RdeKind b) {
    const RdeSolution sa = solve_rde(sys, a, params);
    const RdeSolution sb = solve_rde(sys, b, params);
    if (sa.status != sb.status || sa.values.size() != sb.values.size()) {
      return std::numeric_limits<double>::infinity();
    }
    double dev = 0.0;
    for (std::size_t i = 0; i < sa.values.size(); ++i) {
      dev = std::max(dev, (sa.values[i] - sb.values[i]).norm());
    }
    return dev;
  };
  DualDeviation out;
  out.s_forms = sup_dev(RdeKind::kS, RdeKind::kSDual);
  if (params.eps) out.eps_forms = sup_dev(RdeKind::kSEps, RdeKind::kSEpsDual);
  return out;
}

double w_eps_tau(const UncertainSystem& sys, const VectorXd& x0, const RdeParams& params) {
  const RdeSolution sol = solve_rde(sys, RdeKind::kSEps, params);
  if (!sol.completed()) {
    std::ostringstream os;
    os << "S_eps escaped at t = " << sol.escape_time << " before reaching t = 0";
    throw NoSolutionError(os.str(), sol.escape_time);
  }
  bool ok = false;
  const double value = linalg::inverse_quadratic_form(sol.at_zero(), x0, &ok);
  if (!ok) throw DegeneracyError("S_eps(0) is not positive definite");
  return value;
}

WValue w_from_s0(const MatrixXd& S0, const VectorXd& x0, double rank_tol) {
  WValue out;
  if (x0.size() == 0 || x0.isZero(0.0)) return out;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(S0);
  const VectorXd& lam = es.eigenvalues();
  const MatrixXd& U = es.eigenvectors();
  const double lmax = lam.size() ? lam.maxCoeff() : 0.0;
  const double cut = rank_tol * lmax;

  bool singular = false;
  double value = 0.0;
  VectorXd in_range = VectorXd::Zero(x0.size());
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (lmax > 0.0 && lam(i) > cut) {
      const double c = U.col(i).dot(x0);
      value += c * c / lam(i);
      in_range += c * U.col(i);
    } else {
      singular = true;
    }
  }
  if (!singular) {
    out.value = value;
    return out;
  }
  if ((x0 - in_range).norm() > rank_tol * x0.norm()) {
    out.finite = false;
    out.value = std::numeric_limits<double>::infinity();
    return out;
  }
  out.value = value;
  out.outside_theorem = true;
  return out;
}

WValue w_tau(const UncertainSystem& sys, const VectorXd& x0, double tau, double T, int steps,
             double rank_tol) {
  RdeParams p;
  p.tau = tau;
  p.T = T;
  p.steps = steps;
  const RdeSolution sol = solve_rde(sys, RdeKind::kS, p);
  if (!sol.completed()) {
    std::ostringstream os;
    os << "S escaped at t = " << sol.escape_time << " (tau = " << tau << ", T = " << T << ")";
    throw NoSolutionError(os.str(), sol.escape_time);
  }
  return w_from_s0(sol.at_zero(), x0, rank_tol);
}

WValue w_tau_zero(const UncertainSystem& sys, const VectorXd& x0, double T, int steps,
                  double rank_tol) {
  const Eigen::Index n = sys.n();
  MatrixXd B(n, sys.m() + sys.r());
  B << sys.B1, sys.B2;
  const WValue reach = w_from_s0(gramian(sys.A, B, 0.0, T, steps), x0, rank_tol);
  if (!reach.finite) return reach;

  const auto range_of = [&](const MatrixXd& W) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(W);
    const double lmax = es.eigenvalues().size() ? es.eigenvalues().maxCoeff() : 0.0;
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
      if (lmax > 0.0 && es.eigenvalues()(i) > rank_tol * lmax) keep.push_back(i);
    }
    MatrixXd basis(n, static_cast<Eigen::Index>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j) basis.col(j) = es.eigenvectors().col(keep[j]);
    return basis;
  };

  const MatrixXd U2 = sys.r() > 0 ? range_of(gramian(sys.A, sys.B2, 0.0, T, steps))
                                  : MatrixXd(n, 0);
  const MatrixXd P = MatrixXd::Identity(n, n) - U2 * U2.transpose();
  const VectorXd p = P * x0;
  WValue out;
  if (p.norm() <= rank_tol * std::max(1.0, x0.norm())) return out;  // xi alone steers x0
  const MatrixXd W1 = sys.m() > 0 ? gramian(sys.A, sys.B1, 0.0, T, steps) : MatrixXd::Zero(n, n);
  out = w_from_s0(linalg::symmetrize(P * W1 * P), p, rank_tol);
  out.outside_theorem = false;
  return out;
}

std::vector<double> default_tau_grid() {
  std::vector<double> grid(17);
  for (int i = 0; i < 17; ++i) grid[i] = std::pow(10.0, -2.0 + 4.0 * i / 16.0);
  return grid;
}

SupW sup_w_tau(const UncertainSystem& sys, const VectorXd& x0, double T,
               const std::vector<double>& tau_grid, int steps, double rank_tol,
               std::optional<double> d) {
  if (tau_grid.empty()) throw ParameterError("tau grid is empty");
  for (std::size_t i = 0; i < tau_grid.size(); ++i) {
    if (!(tau_grid[i] > 0.0)) throw ParameterError("tau grid entries must be > 0");
    if (i > 0 && !(tau_grid[i] > tau_grid[i - 1])) {
      throw ParameterError("tau grid must be strictly ascending");
    }
  }

  SupW out;
  out.value = -std::numeric_limits<double>::infinity();
  bool any = false;
  const auto take = [&](double tau, const WValue& w) {
    out.points.push_back({tau, w});
    any = true;
    if (w.value > out.value) {
      out.value = w.value;
      out.argmax_tau = tau;
    }
    if (d) {
      const double lc = w.value - tau * *d;
      if (!out.lc_estimate || lc > *out.lc_estimate) out.lc_estimate = lc;
    }
  };

  std::vector<SupW::Point> grid_points;
  for (double tau : tau_grid) {
    WValue w;
    try {
      w = w_tau(sys, x0, tau, T, steps, rank_tol);
    } catch (const NoSolutionError&) {
      // S escapes: no finite contribution from this multiplier.
      continue;
    }
    if (!w.finite) {
      out.points.push_back({tau, w});
      out.finite = false;
      out.infinite_tau = tau;
      out.value = std::numeric_limits<double>::infinity();
      out.argmax_tau = tau;
      return out;
    }
    grid_points.push_back({tau, w});
  }

  const WValue w0 = w_tau_zero(sys, x0, T, steps, rank_tol);
  if (!w0.finite) {
    out.points.push_back({0.0, w0});
    out.finite = false;
    out.infinite_tau = 0.0;
    out.value = std::numeric_limits<double>::infinity();
    return out;
  }
  take(0.0, w0);
  for (const auto& pt : grid_points) take(pt.tau, pt.w);
  if (!any) throw NoSolutionError("no tau produced a solution", 0.0);
  return out;
}

std::vector<SweepRow> eig_sweep(const UncertainSystem& sys, double tau,
                                const std::vector<double>& T_grid, int steps_per_unit) {
  if (steps_per_unit < 1) throw ParameterError("steps per unit must be >= 1");
  std::vector<SweepRow> rows;
  rows.reserve(T_grid.size());
  for (double T : T_grid) {
    RdeParams p;
    p.tau = tau;
    p.T = T;
    p.steps = std::max(1, static_cast<int>(std::ceil(steps_per_unit * T - 1e-9)));
    const RdeSolution sol = solve_rde(sys, RdeKind::kS, p);
    SweepRow row;
    row.T = T;
    row.completed = sol.completed();
    if (row.completed) {
      const auto er = linalg::eig_range(sol.at_zero());
      row.lambda_min = er.min;
      row.lambda_max = er.max;
    } else {
      row.escape_time = sol.escape_time;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace ukd
