#include "ukd/oracle.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "ukd/error.hpp"
#include "ukd/linalg.hpp"

namespace ukd {

namespace {

struct StepMaps {
  MatrixXd Phi;    // x_{k+1} = Phi x_k + Gamma v_k
  MatrixXd Gamma;  // n x (m + r)
  // Integral of |z|^2 over one step is zeta' Zd zeta with zeta = [x_k; v_k].
  MatrixXd Zd;
  double h = 0.0;
};

void check_disc(const LqDiscretization& disc) {
  if (disc.steps < 2) throw ParameterError("oracle discretisation needs at least 2 steps");
  if (!(disc.horizon > 0.0)) throw ParameterError("oracle horizon must be > 0");
}

StepMaps step_maps(const UncertainSystem& sys, const LqDiscretization& disc) {
  const Eigen::Index n = sys.n();
  const Eigen::Index p = sys.m() + sys.r();
  MatrixXd B(n, p);
  B << sys.B1, sys.B2;
  MatrixXd M0 = MatrixXd::Zero(sys.h(), n + p);
  M0.leftCols(n) = sys.C1;
  M0.middleCols(n, sys.m()) = sys.D1;

  StepMaps s;
  s.h = disc.horizon / disc.steps;
  const MatrixXd I = MatrixXd::Identity(n, n);
  switch (disc.scheme) {
    case LqScheme::kForwardEuler:
      s.Phi = I + s.h * sys.A;
      s.Gamma = s.h * B;
      s.Zd = s.h * M0.transpose() * M0;
      break;
    case LqScheme::kTrapezoidal: {
      const Eigen::PartialPivLU<MatrixXd> lu(I - 0.5 * s.h * sys.A);
      s.Phi = lu.solve(I + 0.5 * s.h * sys.A);
      s.Gamma = lu.solve(s.h * B);
      MatrixXd M1 = M0;
      M1.leftCols(n) = sys.C1 * s.Phi;
      M1.middleCols(n, p) += sys.C1 * s.Gamma;
      s.Zd = 0.5 * s.h * (M0.transpose() * M0 + M1.transpose() * M1);
      break;
    }
    case LqScheme::kExactHold: {
      // Van Loan: exp([-Aa' Q; 0 Aa] h) = [* F12; 0 F22], Zd = F22' F12.
      const Eigen::Index q = n + p;
      MatrixXd Aa = MatrixXd::Zero(q, q);
      Aa.topLeftCorner(n, n) = sys.A;
      Aa.topRightCorner(n, p) = B;
      MatrixXd V = MatrixXd::Zero(2 * q, 2 * q);
      V.topLeftCorner(q, q) = -Aa.transpose();
      V.topRightCorner(q, q) = M0.transpose() * M0;
      V.bottomRightCorner(q, q) = Aa;
      const MatrixXd E = (V * s.h).exp();
      const MatrixXd F22 = E.bottomRightCorner(q, q);
      s.Phi = F22.topLeftCorner(n, n);
      s.Gamma = F22.topRightCorner(n, p);
      s.Zd = F22.transpose() * E.topRightCorner(q, q);
      break;
    }
  }
  s.Zd = linalg::symmetrize(s.Zd);
  return s;
}

// Rows R with R'R = Zd (Zd is positive semidefinite up to rounding).
MatrixXd square_root_rows(const MatrixXd& Zd) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(Zd);
  const VectorXd& lam = es.eigenvalues();
  const double cut = 1e-14 * std::max(1.0, lam.size() ? lam.cwiseAbs().maxCoeff() : 0.0);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (lam(i) > cut) keep.push_back(i);
  }
  MatrixXd R(static_cast<Eigen::Index>(keep.size()), Zd.cols());
  for (std::size_t j = 0; j < keep.size(); ++j) {
    R.row(static_cast<Eigen::Index>(j)) =
        std::sqrt(lam(keep[j])) * es.eigenvectors().col(keep[j]).transpose();
  }
  return R;
}

}  // namespace

IqcCost iqc_cost(const UncertainSystem& sys, const VectorXd& x0, const MatrixXd& u,
                 const MatrixXd& xi, const LqDiscretization& disc) {
  check_disc(disc);
  if (u.rows() != sys.m() || xi.rows() != sys.r() || u.cols() != disc.steps ||
      xi.cols() != disc.steps) {
    throw DomainError("iqc_cost: input trajectories must be m x steps and r x steps");
  }
  const StepMaps s = step_maps(sys, disc);
  IqcCost out;
  VectorXd x = x0;
  VectorXd zeta(sys.n() + sys.m() + sys.r());
  for (int k = 0; k < disc.steps; ++k) {
    zeta << x, u.col(k), xi.col(k);
    const double z2 = zeta.dot(s.Zd * zeta);
    out.u_energy += s.h * u.col(k).squaredNorm();
    out.iqc_integral += s.h * xi.col(k).squaredNorm() - z2;
    x = s.Phi * x + s.Gamma * zeta.tail(s.Gamma.cols());
  }
  out.terminal_state = x;
  return out;
}

double lq_objective(const UncertainSystem& sys, const VectorXd& x0, double tau, double eps,
                    const MatrixXd& u, const MatrixXd& xi, const LqDiscretization& disc) {
  const IqcCost c = iqc_cost(sys, x0, u, xi, disc);
  return c.terminal_state.squaredNorm() / eps + c.u_energy + tau * c.iqc_integral;
}

LqResult lq_solve(const UncertainSystem& sys, const VectorXd& x0, double tau, double eps,
                  const LqDiscretization& disc) {
  check_disc(disc);
  if (!(tau >= 0.0) || !(eps > 0.0)) throw ParameterError("oracle needs tau >= 0 and eps > 0");
  const Eigen::Index n = sys.n();
  const Eigen::Index m = sys.m();
  const Eigen::Index r = sys.r();
  const Eigen::Index p = m + r;
  const int N = disc.steps;
  if (static_cast<long>(n) * N > kMaxOracleSize) {
    throw ParameterError("oracle problem too large (n * steps > 50000)");
  }
  if (x0.size() != n) throw DomainError("x0 has the wrong dimension");

  const StepMaps s = step_maps(sys, disc);
  const Eigen::Index dim = p * N;

  // Square-rooted z-energy samples: l + L v, weighted by -tau in the cost.
  const MatrixXd R = square_root_rows(s.Zd);
  const Eigen::Index rz = R.rows();
  MatrixXd L = MatrixXd::Zero(rz * N, dim);
  VectorXd l = VectorXd::Zero(rz * N);

  // State affine map x_k = F + G v, advanced step by step.
  VectorXd F = x0;
  MatrixXd G = MatrixXd::Zero(n, dim);
  for (int k = 0; k < N; ++k) {
    const Eigen::Index row = static_cast<Eigen::Index>(k) * rz;
    const Eigen::Index vcol = static_cast<Eigen::Index>(k) * p;
    if (rz > 0) {
      l.segment(row, rz) = R.leftCols(n) * F;
      L.middleRows(row, rz) = R.leftCols(n) * G;
      L.block(row, vcol, rz, p) += R.rightCols(p);
    }
    F = s.Phi * F;
    G = s.Phi * G;
    G.middleCols(vcol, p) += s.Gamma;
  }

  MatrixXd H = MatrixXd::Zero(dim, dim);
  for (int k = 0; k < N; ++k) {
    const Eigen::Index c = static_cast<Eigen::Index>(k) * p;
    for (Eigen::Index i = 0; i < m; ++i) H(c + i, c + i) += s.h;
    for (Eigen::Index i = 0; i < r; ++i) H(c + m + i, c + m + i) += s.h * tau;
  }
  if (rz > 0) H.noalias() -= tau * (L.transpose() * L);
  H.noalias() += (G.transpose() * G) / eps;
  H = linalg::symmetrize(H);
  const VectorXd g = G.transpose() * F / eps - tau * (L.transpose() * l);
  const double c = F.squaredNorm() / eps - tau * l.squaredNorm();

  LqResult out;
  Eigen::LLT<MatrixXd> llt(H);
  if (llt.info() != Eigen::Success) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(H, Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues()(0);
    if (lmin < -1e-10 * (1.0 + system_scale(sys)) * s.h) {
      out.bounded = false;
      out.value = -std::numeric_limits<double>::infinity();
      return out;
    }
    throw ConditioningError("oracle Hessian is numerically singular");
  }
  const VectorXd v = -llt.solve(g);
  out.value = c + g.dot(v);
  out.u.resize(m, N);
  out.xi.resize(r, N);
  for (int k = 0; k < N; ++k) {
    out.u.col(k) = v.segment(static_cast<Eigen::Index>(k) * p, m);
    out.xi.col(k) = v.segment(static_cast<Eigen::Index>(k) * p + m, r);
  }
  return out;
}

}  // namespace ukd
