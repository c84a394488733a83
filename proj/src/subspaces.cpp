#include "ukd/subspaces.hpp"

#include <algorithm>
#include <cmath>

#include "ukd/error.hpp"
#include "ukd/linalg.hpp"

namespace ukd {

namespace {

// Rounding noise in A^k B grows roughly like |A|^k; anything below this is
// treated as exactly zero regardless of the relative tolerance.
double krylov_floor(const MatrixXd& A) {
  const double growth = std::pow(1.0 + A.norm(), std::max<double>(0.0, A.rows() - 1.0));
  return 1e-13 * growth;
}

double max_abs(const MatrixXd& M) { return M.size() == 0 ? 0.0 : M.cwiseAbs().maxCoeff(); }

}  // namespace

Subspace::Subspace(MatrixXd basis) : basis_(std::move(basis)) {}

bool Subspace::contains(const VectorXd& x, double rel_tol) const {
  return distance(x) <= rel_tol * x.norm();
}

Subspace Subspace::orthogonal_complement() const {
  return Subspace(linalg::orthogonal_complement(basis_));
}

Subspace controllable_subspace(const MatrixXd& A, const MatrixXd& B, double tol) {
  if (A.rows() != A.cols() || B.rows() != A.rows()) {
    throw DomainError("controllable_subspace: A must be square with rows(B) = rows(A)");
  }
  const MatrixXd K = linalg::controllability_matrix(A, B);
  return Subspace(linalg::orthonormal_range(K, tol, krylov_floor(A)));
}

Subspace unobservable_subspace(const MatrixXd& C, const MatrixXd& A, double tol) {
  if (A.rows() != A.cols() || C.cols() != A.rows()) {
    throw DomainError("unobservable_subspace: A must be square with cols(C) = rows(A)");
  }
  const MatrixXd O = linalg::observability_matrix(C, A);
  return Subspace(linalg::null_space(O, tol, krylov_floor(A)));
}

StaircaseForm staircase(const UncertainSystem& sys, const MatrixXd& decomposing_input,
                        double tol) {
  const Subspace R = controllable_subspace(sys.A, decomposing_input, tol);
  const Eigen::Index n = sys.n();
  MatrixXd basis(n, n);
  basis << R.basis(), linalg::orthogonal_complement(R.basis());
  StaircaseForm form;
  form.Tmat = basis.transpose();
  form.k = R.dim();
  form.transformed = sys.transformed(form.Tmat);
  return form;
}

const char* to_string(KalmanBlock b) {
  switch (b) {
    case KalmanBlock::kCo:
      return "controllable-observable";
    case KalmanBlock::kCUnobs:
      return "controllable-unobservable";
    case KalmanBlock::kUncObs:
      return "uncontrollable-observable";
    case KalmanBlock::kUncUnobs:
      return "uncontrollable-unobservable";
  }
  return "?";
}

Eigen::Index FourBlockForm::offset(KalmanBlock b) const {
  Eigen::Index off = 0;
  for (int i = 0; i < static_cast<int>(b); ++i) off += dims[i];
  return off;
}

FourBlockForm four_block(const UncertainSystem& sys, const MatrixXd& C, const MatrixXd& B,
                         double tol) {
  const Eigen::Index n = sys.n();
  const Subspace R = controllable_subspace(sys.A, B, tol);
  const Subspace N = unobservable_subspace(C, sys.A, tol);

  const MatrixXd RN = linalg::intersection(R.basis(), N.basis(), std::sqrt(tol));
  const MatrixXd co = linalg::complement_within(RN, R.basis());

  // Image of N in R⊥; together with R it spans R + N.
  const MatrixXd Rperp = linalg::orthogonal_complement(R.basis());
  MatrixXd uu(n, 0);
  if (N.dim() > 0 && Rperp.cols() > 0) {
    const MatrixXd projected = Rperp * (Rperp.transpose() * N.basis());
    const Eigen::Index want = N.dim() - RN.cols();
    Eigen::JacobiSVD<MatrixXd> svd(projected, Eigen::ComputeFullU);
    uu = svd.matrixU().leftCols(std::max<Eigen::Index>(0, want));
  }
  const MatrixXd uo = linalg::complement_within(uu, Rperp);

  FourBlockForm form;
  form.dims = {co.cols(), RN.cols(), uo.cols(), uu.cols()};
  MatrixXd basis(n, n);
  basis << co, RN, uo, uu;
  form.Tmat = basis.transpose();
  form.transformed = sys.transformed(form.Tmat);
  return form;
}

FourBlockResiduals four_block_residuals(const FourBlockForm& form, const MatrixXd& B_t,
                                        const MatrixXd& C_t) {
  const auto o = [&](KalmanBlock b) { return form.offset(b); };
  const auto s = [&](KalmanBlock b) { return form.size(b); };
  using KB = KalmanBlock;
  const MatrixXd& A = form.transformed.A;
  const auto blk = [&](KB i, KB j) { return A.block(o(i), o(j), s(i), s(j)); };

  FourBlockResiduals res;
  const Eigen::Index unc = s(KB::kUncObs) + s(KB::kUncUnobs);
  res.input = max_abs(B_t.bottomRows(unc));
  res.output = max_abs(C_t.middleCols(o(KB::kCUnobs), s(KB::kCUnobs)));
  res.output_unc_unobs = max_abs(C_t.middleCols(o(KB::kUncUnobs), s(KB::kUncUnobs)));
  res.dynamics = std::max({
      max_abs(blk(KB::kUncObs, KB::kCo)), max_abs(blk(KB::kUncObs, KB::kCUnobs)),
      max_abs(blk(KB::kUncUnobs, KB::kCo)), max_abs(blk(KB::kUncUnobs, KB::kCUnobs)),
      max_abs(blk(KB::kCo, KB::kCUnobs)), max_abs(blk(KB::kUncObs, KB::kUncUnobs))});
  return res;
}

int default_gramian_steps(double t0, double t1) {
  return std::max(1, static_cast<int>(std::ceil(200.0 * std::abs(t1 - t0))));
}

MatrixXd gramian(const MatrixXd& A, const MatrixXd& B, double t0, double t1, int steps) {
  if (!(t1 > t0)) throw ParameterError("gramian: requires t1 > t0");
  if (steps < 1) throw ParameterError("gramian: steps must be >= 1");
  const Eigen::Index n = A.rows();
  const MatrixXd BBt = B * B.transpose();

  // Y(t) = e^{-At}, started from t = 0.
  MatrixXd Y = MatrixXd::Identity(n, n);
  if (t0 != 0.0) {
    const int pre = std::max(1, static_cast<int>(std::ceil(200.0 * std::abs(t0))));
    const double h = t0 / pre;
    for (int i = 0; i < pre; ++i) {
      const MatrixXd k1 = -A * Y;
      const MatrixXd k2 = -A * (Y + 0.5 * h * k1);
      const MatrixXd k3 = -A * (Y + 0.5 * h * k2);
      const MatrixXd k4 = -A * (Y + h * k3);
      Y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
  }

  const double h = (t1 - t0) / steps;
  MatrixXd W = MatrixXd::Zero(n, n);
  const auto integrand = [&](const MatrixXd& Yt) -> MatrixXd { return Yt * BBt * Yt.transpose(); };
  for (int i = 0; i < steps; ++i) {
    const MatrixXd kY1 = -A * Y;
    const MatrixXd Y2 = Y + 0.5 * h * kY1;
    const MatrixXd kY2 = -A * Y2;
    const MatrixXd Y3 = Y + 0.5 * h * kY2;
    const MatrixXd kY3 = -A * Y3;
    const MatrixXd Y4 = Y + h * kY3;
    const MatrixXd kY4 = -A * Y4;
    W += (h / 6.0) * (integrand(Y) + 2.0 * integrand(Y2) + 2.0 * integrand(Y3) + integrand(Y4));
    Y += (h / 6.0) * (kY1 + 2.0 * kY2 + 2.0 * kY3 + kY4);
  }
  return linalg::symmetrize(W);
}

}  // namespace ukd
