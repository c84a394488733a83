#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ukd {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Uncertain LTI system
///
///   x' = A x + B1 u + B2 xi
///   z  = C1 x + D1 u
///   y  = C2 x + D2 xi
///
/// with state x (n), control u (m), uncertainty input xi (r), uncertainty
/// output z (h) and measured output y (l). The uncertainty is constrained
/// through an averaged integral quadratic constraint (see IqcConstraint).
struct UncertainSystem {
  MatrixXd A;
  MatrixXd B1;
  MatrixXd B2;
  MatrixXd C1;
  MatrixXd D1;
  MatrixXd C2;
  MatrixXd D2;

  Eigen::Index n() const { return A.rows(); }
  Eigen::Index m() const { return B1.cols(); }
  Eigen::Index r() const { return B2.cols(); }
  Eigen::Index h() const { return C1.rows(); }
  Eigen::Index l() const { return C2.rows(); }

  /// Applies x~ = T x: (T A T', T B1, T B2, C1 T', D1, C2 T', D2).
  UncertainSystem transformed(const MatrixXd& T) const;
};

/// Averaged IQC: for every admissible sequence xi^1..xi^q,
/// (1/q) sum_i int_0^T (|xi^i|^2 - |z^i|^2) dt <= d.
/// The sequences themselves are never materialised; the constraint enters
/// the computations only through the multiplier tau.
struct IqcConstraint {
  double d = 1.0;
  double T = 1.0;
};

enum class Channel {
  G,  ///< xi -> y: (C2, A, B2, D2)
  H,  ///< u -> z: (C1, A, B1, D1)
};

const char* to_string(Channel ch);

struct Violation {
  std::string matrix;
  std::string message;
};

/// Every dimension and finiteness violation; empty iff the system is valid.
std::vector<Violation> validate(const UncertainSystem& sys);

/// Max Frobenius norm over the seven matrices. Used as the single scale for
/// all relative tolerances.
double system_scale(const UncertainSystem& sys);

struct ChannelRealization {
  MatrixXd C;
  MatrixXd A;
  MatrixXd B;
  MatrixXd D;
};

ChannelRealization channel_realization(const UncertainSystem& sys, Channel ch);

/// [D, CB, CAB, ..., C A^k_max B] (k_max + 2 entries).
std::vector<MatrixXd> markov_parameters(const UncertainSystem& sys, Channel ch, int k_max);
std::vector<MatrixXd> markov_parameters(const ChannelRealization& g, int k_max);

inline constexpr double kDefaultZeroTol = 1e-8;

/// True iff the channel transfer function vanishes identically: feedthrough
/// and C A^k B for k = 0..n-1 all have Frobenius norm <= tol * (1 + scale).
bool transfer_is_zero(const UncertainSystem& sys, Channel ch, double tol = kDefaultZeroTol);

/// C (sI - A)^{-1} B + D. Throws PoleError when sI - A is singular.
Eigen::MatrixXcd eval_transfer(const UncertainSystem& sys, Channel ch, std::complex<double> s);

}  // namespace ukd
