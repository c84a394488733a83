#include "ukd/linalg.hpp"

#include <algorithm>

namespace ukd::linalg {

double rank_threshold(const VectorXd& singular_values, double rel_tol, double abs_floor) {
  const double smax = singular_values.size() > 0 ? singular_values.maxCoeff() : 0.0;
  return std::max(rel_tol * smax, abs_floor);
}

MatrixXd orthonormal_range(const MatrixXd& M, double rel_tol, double abs_floor) {
  if (M.rows() == 0 || M.cols() == 0) return MatrixXd(M.rows(), 0);
  Eigen::JacobiSVD<MatrixXd> svd(M, Eigen::ComputeFullU);
  const VectorXd& s = svd.singularValues();
  const double thr = rank_threshold(s, rel_tol, abs_floor);
  Index rank = 0;
  while (rank < s.size() && s(rank) > thr) ++rank;
  return svd.matrixU().leftCols(rank);
}

MatrixXd null_space(const MatrixXd& M, double rel_tol, double abs_floor) {
  const Index n = M.cols();
  if (M.rows() == 0 || n == 0) return MatrixXd::Identity(n, n);
  Eigen::JacobiSVD<MatrixXd> svd(M, Eigen::ComputeFullV);
  const VectorXd& s = svd.singularValues();
  const double thr = rank_threshold(s, rel_tol, abs_floor);
  Index rank = 0;
  while (rank < s.size() && s(rank) > thr) ++rank;
  return svd.matrixV().rightCols(n - rank);
}

MatrixXd orthogonal_complement(const MatrixXd& basis) {
  const Index n = basis.rows();
  const Index k = basis.cols();
  if (k == 0) return MatrixXd::Identity(n, n);
  if (k >= n) return MatrixXd(n, 0);
  Eigen::HouseholderQR<MatrixXd> qr(basis);
  MatrixXd Q = qr.householderQ() * MatrixXd::Identity(n, n);
  return Q.rightCols(n - k);
}

MatrixXd intersection(const MatrixXd& U, const MatrixXd& V, double tol) {
  const Index n = U.rows();
  if (U.cols() == 0 || V.cols() == 0) return MatrixXd(n, 0);
  // Residual of U's directions after projecting onto span(V); singular
  // values are the sines of the principal angles.
  const MatrixXd residual = U - V * (V.transpose() * U);
  const MatrixXd coeffs = null_space(residual, 0.0, tol);
  if (coeffs.cols() == 0) return MatrixXd(n, 0);
  return orthonormal_range(U * coeffs, 0.0, 0.5);
}

MatrixXd complement_within(const MatrixXd& S, const MatrixXd& V) {
  const Index n = V.rows();
  if (V.cols() == 0) return MatrixXd(n, 0);
  if (S.cols() == 0) return V;
  const MatrixXd coords = V.transpose() * S;  // k_V x k_S, orthonormal columns
  return V * orthogonal_complement(orthonormal_range(coords, 0.0, 0.5));
}

MatrixXd controllability_matrix(const MatrixXd& A, const MatrixXd& B) {
  const Index n = A.rows();
  const Index p = B.cols();
  MatrixXd K(n, n * p);
  if (n == 0 || p == 0) return K;
  K.leftCols(p) = B;
  for (Index i = 1; i < n; ++i) K.middleCols(i * p, p) = A * K.middleCols((i - 1) * p, p);
  return K;
}

MatrixXd observability_matrix(const MatrixXd& C, const MatrixXd& A) {
  return controllability_matrix(A.transpose(), C.transpose()).transpose();
}

double inverse_quadratic_form(const MatrixXd& M, const VectorXd& x, bool* ok) {
  Eigen::LLT<MatrixXd> llt(M);
  const bool good = llt.info() == Eigen::Success;
  if (ok) *ok = good;
  if (!good) return 0.0;
  return x.dot(llt.solve(x));
}

EigRange eig_range(const MatrixXd& S) {
  if (S.rows() == 0) return {};
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(S, Eigen::EigenvaluesOnly);
  return {es.eigenvalues()(0), es.eigenvalues()(S.rows() - 1)};
}

}  // namespace ukd::linalg
