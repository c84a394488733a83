#pragma once

#include <array>

#include <Eigen/Dense>

#include "ukd/model.hpp"

namespace ukd {

inline constexpr double kDefaultRankTol = 1e-8;

/// Linear subspace of R^n held as an orthonormal basis (n x k, k may be 0).
class Subspace {
 public:
  Subspace() = default;
  Subspace(MatrixXd basis);

  static Subspace zero(Eigen::Index n) { return Subspace(MatrixXd(n, 0)); }
  static Subspace full(Eigen::Index n) { return Subspace(MatrixXd::Identity(n, n)); }

  const MatrixXd& basis() const { return basis_; }
  Eigen::Index dim() const { return basis_.cols(); }
  Eigen::Index ambient_dim() const { return basis_.rows(); }

  MatrixXd projector() const { return basis_ * basis_.transpose(); }
  VectorXd project(const VectorXd& x) const { return basis_ * (basis_.transpose() * x); }

  /// Norm of the component of x orthogonal to the subspace.
  double distance(const VectorXd& x) const { return (x - project(x)).norm(); }

  /// distance(x) <= rel_tol * |x|
  bool contains(const VectorXd& x, double rel_tol) const;

  Subspace orthogonal_complement() const;

 private:
  MatrixXd basis_;
};

/// range [B, AB, ..., A^(n-1) B]. Rank cut at rel_tol * sigma_max.
Subspace controllable_subspace(const MatrixXd& A, const MatrixXd& B, double tol = kDefaultRankTol);

/// Intersection of null(C A^k), k = 0..n-1.
Subspace unobservable_subspace(const MatrixXd& C, const MatrixXd& A, double tol = kDefaultRankTol);

/// Orthogonal change of coordinates x~ = Tmat x that puts the controllable
/// subspace of (A, B) first:
///
///   T A T' = [A11 A12; 0 A22],  T B = [B11; 0]
///
/// applied to every matrix of the system.
struct StaircaseForm {
  MatrixXd Tmat;
  Eigen::Index k = 0;
  UncertainSystem transformed;
};

/// `decomposing_input` selects the columns that define controllability
/// (typically B1 or [B1 B2]); the transform is applied to the whole system.
StaircaseForm staircase(const UncertainSystem& sys, const MatrixXd& decomposing_input,
                        double tol = kDefaultRankTol);

/// Blocks of the four-way Kalman decomposition, in transformed order.
enum class KalmanBlock { kCo = 0, kCUnobs = 1, kUncObs = 2, kUncUnobs = 3 };

const char* to_string(KalmanBlock b);

struct FourBlockForm {
  MatrixXd Tmat;
  /// (controllable & observable, controllable & unobservable,
  ///  uncontrollable & observable, uncontrollable & unobservable)
  std::array<Eigen::Index, 4> dims{};
  UncertainSystem transformed;

  Eigen::Index offset(KalmanBlock b) const;
  Eigen::Index size(KalmanBlock b) const { return dims[static_cast<int>(b)]; }
};

/// Four-block decomposition of the triple (C, A, B) applied to `sys`.
///
/// With R = controllable subspace and N = unobservable subspace the blocks
/// are spanned by R ⊖ (R∩N), R∩N, (R+N)⊥ and the projection of N onto R⊥.
/// Tmat is orthogonal. R, R∩N and R+N are invariant and B lives in R, so the
/// input and dynamics zero pattern of the Kalman form holds. The output
/// columns of the last block vanish exactly when N ⊖ (R∩N) is orthogonal to
/// R; for a general (non-orthogonal) geometry no orthogonal transform can
/// achieve both.
FourBlockForm four_block(const UncertainSystem& sys, const MatrixXd& C, const MatrixXd& B,
                         double tol = kDefaultRankTol);

/// Largest absolute entry of the blocks that must vanish in a four-block
/// form: B rows of uncontrollable blocks, C columns of the (controllable,
/// unobservable) block and the dynamics couplings into R, R∩N and R+N.
/// `B` and `C` are the decomposing input/output already in transformed
/// coordinates.
struct FourBlockResiduals {
  double input = 0.0;
  double output = 0.0;
  double output_unc_unobs = 0.0;
  double dynamics = 0.0;
};
FourBlockResiduals four_block_residuals(const FourBlockForm& form, const MatrixXd& B_t,
                                        const MatrixXd& C_t);

/// W_c(t0, t1) = int_{t0}^{t1} e^{-At} B B' e^{-A't} dt, by fixed-step RK4 on
/// the pair Y' = -A Y, W' = Y B B' Y'.
MatrixXd gramian(const MatrixXd& A, const MatrixXd& B, double t0, double t1, int steps);

/// Steps used when callers ask for the default resolution.
int default_gramian_steps(double t0, double t1);

}  // namespace ukd
