#include "ukd/classify.hpp"

#include <algorithm>
#include <cmath>

#include "ukd/error.hpp"

namespace ukd {

namespace {

MatrixXd hstack(const MatrixXd& a, const MatrixXd& b) {
  MatrixXd out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

MatrixXd vstack(const MatrixXd& a, const MatrixXd& b) {
  MatrixXd out(a.rows() + b.rows(), a.cols());
  out << a, b;
  return out;
}

void require_nonzero(const VectorXd& x0, Eigen::Index n) {
  if (x0.size() != n) throw DomainError("x0 has the wrong dimension");
  if (x0.isZero(0.0)) throw DomainError("x0 must be nonzero");
}

}  // namespace

Classification classify(const UncertainSystem& sys, double tol) {
  Classification c;
  c.h_is_zero = transfer_is_zero(sys, Channel::H, tol);
  c.g_is_zero = transfer_is_zero(sys, Channel::G, tol);

  if (c.h_is_zero) {
    c.possibly_controllable = controllable_subspace(sys.A, sys.B1, tol);
    c.theorem_trail.push_back("T5");
  } else {
    c.possibly_controllable = controllable_subspace(sys.A, hstack(sys.B1, sys.B2), tol);
    c.theorem_trail.push_back("T6");
  }
  if (c.g_is_zero) {
    c.robustly_unobservable = unobservable_subspace(sys.C2, sys.A, tol);
    c.theorem_trail.push_back("T1");
  } else {
    c.robustly_unobservable = unobservable_subspace(vstack(sys.C1, sys.C2), sys.A, tol);
    c.theorem_trail.push_back("T2");
  }
  return c;
}

bool is_possibly_controllable(const UncertainSystem& sys, const VectorXd& x0, double tol) {
  require_nonzero(x0, sys.n());
  return classify(sys, tol).possibly_controllable.contains(x0, tol);
}

bool is_robustly_unobservable(const UncertainSystem& sys, const VectorXd& x0, double tol) {
  require_nonzero(x0, sys.n());
  return classify(sys, tol).robustly_unobservable.contains(x0, tol);
}

CrossCheckReport numeric_cross_check(const UncertainSystem& sys, const VectorXd& x0, double tau,
                                     const std::vector<double>& T_grid, int steps_per_unit,
                                     double rank_tol) {
  require_nonzero(x0, sys.n());
  if (!feasibility(sys, tau)) throw FeasibilityError("I - tau D1'D1 is not positive definite");

  CrossCheckReport report;
  report.geometric_possibly_controllable = is_possibly_controllable(sys, x0, rank_tol);
  report.consistent = !T_grid.empty();
  for (double T : T_grid) {
    const int steps = std::max(1, static_cast<int>(std::ceil(steps_per_unit * T - 1e-9)));
    CrossCheckRow row;
    row.T = T;
    row.w = w_tau(sys, x0, tau, T, steps, rank_tol);
    row.consistent = row.w.finite == report.geometric_possibly_controllable;
    report.consistent = report.consistent && row.consistent;
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace ukd
