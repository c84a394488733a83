#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ukd/model.hpp"

namespace ukd {

/// Which Riccati differential equation to integrate. All are solved backwards
/// from the terminal time T to 0.
///
///   kP          -P' = A'P + PA - (P B1 - tau C1'D1) R^{-1} (.)' - P B2 B2' P / tau
///                     - tau C1'C1,                         P(T) = I/eps
///   kSEps        S' = AS + SA' - (B1 - tau S C1'D1) R^{-1} (.)' - B2 B2'/tau
///                     - tau S C1'C1 S,                     S(T) = eps I
///   kS           same right-hand side as kSEps,            S(T) = 0
///   kSEpsDual    S' = AS + SA' - (S C1' - B1 D1') (I/tau - D1 D1')^{-1} (.)'
///                     - B2 B2'/tau - B1 B1',               S(T) = eps I
///   kSDual       same right-hand side as kSEpsDual,        S(T) = 0
///
/// with R = I - tau D1'D1. The dual forms are algebraically identical to
/// their primal counterparts; they exist as an independent cross-check.
enum class RdeKind { kP, kSEps, kS, kSEpsDual, kSDual };

const char* to_string(RdeKind kind);

struct RdeParams {
  double tau = 1.0;
  std::optional<double> eps;
  double T = 1.0;
  int steps = 2000;
};

/// Default resolution: 2000 RK4 steps per unit of horizon.
int default_rde_steps(double T);

struct RdeSolution {
  enum class Status { kCompleted, kEscaped };

  /// Ascending grid in [0, T]. After an escape only the times after the
  /// escape point are present.
  std::vector<double> times;
  std::vector<MatrixXd> values;
  Status status = Status::kCompleted;
  /// Time at which the backward integration diverged (escape only).
  double escape_time = 0.0;

  bool completed() const { return status == Status::kCompleted; }
  /// Solution at t = 0 (completed runs only).
  const MatrixXd& at_zero() const { return values.front(); }
};

/// I - tau D1'D1 > 0 with margin 1e-12.
bool feasibility(const UncertainSystem& sys, double tau);

/// Dual realization: state dynamics -A', input xi through C1', outputs
/// y = B1' x - D1' xi and z = B2' x.
struct DualSystem {
  MatrixXd A;   ///< -A'
  MatrixXd B;   ///< C1'
  MatrixXd Cy;  ///< B1'
  MatrixXd Dy;  ///< -D1'
  MatrixXd Cz;  ///< B2'
};

DualSystem build_dual(const UncertainSystem& sys);

/// Fixed-step RK4 integration from T down to 0. Escape is declared when the
/// Frobenius norm exceeds 1e9 * (1 + scale) or a value turns non-finite.
/// Throws FeasibilityError / ParameterError.
RdeSolution solve_rde(const UncertainSystem& sys, RdeKind kind, const RdeParams& params);

struct DualDeviation {
  /// sup_t |S_eps(t) - S_eps_dual(t)|; absent when params.eps is absent.
  std::optional<double> eps_forms;
  double s_forms = 0.0;
  double max() const { return eps_forms ? std::max(*eps_forms, s_forms) : s_forms; }
};

DualDeviation dual_form_equivalence(const UncertainSystem& sys, const RdeParams& params);

/// x0' [S_eps(0)]^{-1} x0. NoSolutionError on escape, DegeneracyError when
/// S_eps(0) is not positive definite.
double w_eps_tau(const UncertainSystem& sys, const VectorXd& x0, const RdeParams& params);

inline constexpr double kDefaultWRankTol = 1e-6;

struct WValue {
  bool finite = true;
  double value = 0.0;
  /// S(0) singular but x0 inside its range: the pseudo-inverse value is
  /// reported, which the underlying characterisation does not cover.
  bool outside_theorem = false;
};

/// W_tau(x0, T) from S_tau(0):
///   S(0) > 0                    -> x0' S(0)^{-1} x0
///   singular, x0 outside range  -> infinite
///   singular, x0 inside range   -> pseudo-inverse form, outside_theorem
WValue w_tau(const UncertainSystem& sys, const VectorXd& x0, double tau, double T, int steps,
             double rank_tol = kDefaultWRankTol);

/// Same classification, applied to an already computed S(0).
WValue w_from_s0(const MatrixXd& S0, const VectorXd& x0, double rank_tol);

/// tau = 0: the xi-penalty vanishes and xi becomes a free input. The value is
/// the minimum u-energy to reach the origin when xi is unconstrained:
/// infinite if x0 is outside range(W_c(A,[B1 B2])), otherwise
/// p' (P W1 P)^+ p with P the projector onto range(W_c(A,B2))⊥ and p = P x0.
WValue w_tau_zero(const UncertainSystem& sys, const VectorXd& x0, double T, int steps,
                  double rank_tol = kDefaultWRankTol);

std::vector<double> default_tau_grid();

struct SupW {
  bool finite = true;
  double value = 0.0;
  double argmax_tau = 0.0;
  /// First grid tau that produced an infinite value.
  double infinite_tau = 0.0;
  struct Point {
    double tau;
    WValue w;
  };
  std::vector<Point> points;  ///< tau = 0 first when evaluated, then grid order.
  /// max over evaluated tau of (W_tau - tau d); a grid estimate, not a
  /// certified supremum. Only set when a bound d was supplied.
  std::optional<double> lc_estimate;
};

/// Grid estimate of sup_{tau >= 0} W_tau(x0, T). Grid points are evaluated
/// first and the first infinite one is reported; tau = 0 is added through
/// the Gramian route when the whole grid is finite.
SupW sup_w_tau(const UncertainSystem& sys, const VectorXd& x0, double T,
               const std::vector<double>& tau_grid, int steps,
               double rank_tol = kDefaultWRankTol, std::optional<double> d = std::nullopt);

struct SweepRow {
  double T = 0.0;
  bool completed = true;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double escape_time = 0.0;
};

/// Extremal eigenvalues of S_tau(0) for each horizon. `steps_per_unit`
/// scales the RK4 step count with the horizon.
std::vector<SweepRow> eig_sweep(const UncertainSystem& sys, double tau,
                                const std::vector<double>& T_grid, int steps_per_unit = 2000);

}  // namespace ukd
