#pragma once

#include <Eigen/Dense>

namespace ukd::linalg {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

inline MatrixXd symmetrize(const MatrixXd& S) { return 0.5 * (S + S.transpose()); }

/// Numerical rank threshold: max(rel_tol * sigma_max, abs_floor).
double rank_threshold(const VectorXd& singular_values, double rel_tol, double abs_floor);

/// Orthonormal basis of range(M); columns with singular value below the
/// threshold are dropped. Result has M.rows() rows.
MatrixXd orthonormal_range(const MatrixXd& M, double rel_tol, double abs_floor = 0.0);

/// Orthonormal basis of null(M) (M.cols() rows).
MatrixXd null_space(const MatrixXd& M, double rel_tol, double abs_floor = 0.0);

/// Completes an orthonormal basis (n x k) to R^n and returns the n x (n-k)
/// block of new columns.
MatrixXd orthogonal_complement(const MatrixXd& basis);

/// Orthonormal basis of span(U) ∩ span(V) for orthonormal U, V. Principal
/// angles with sine <= tol count as shared directions.
MatrixXd intersection(const MatrixXd& U, const MatrixXd& V, double tol);

/// Orthonormal basis of the orthogonal complement of span(S) inside span(V),
/// where S is (numerically) contained in V.
MatrixXd complement_within(const MatrixXd& S, const MatrixXd& V);

/// [B, AB, ..., A^(n-1) B]
MatrixXd controllability_matrix(const MatrixXd& A, const MatrixXd& B);

/// [C; CA; ...; C A^(n-1)]
MatrixXd observability_matrix(const MatrixXd& C, const MatrixXd& A);

/// x' M^{-1} x for symmetric positive definite M. Returns false through `ok`
/// when the factorisation fails.
double inverse_quadratic_form(const MatrixXd& M, const VectorXd& x, bool* ok = nullptr);

/// Extremal eigenvalues of a symmetric matrix.
struct EigRange {
  double min = 0.0;
  double max = 0.0;
};
EigRange eig_range(const MatrixXd& S);

}  // namespace ukd::linalg
