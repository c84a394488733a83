#pragma once

#include <string>
#include <vector>

#include "ukd/model.hpp"
#include "ukd/riccati.hpp"
#include "ukd/subspaces.hpp"

namespace ukd {

/// Possibly controllable and robustly unobservable subspaces.
///
///   H ≡ 0  -> possibly controllable = controllable subspace of (A, B1)       "T5"
///   H ≢ 0  -> possibly controllable = controllable subspace of (A, [B1 B2])  "T6"
///   G ≡ 0  -> robustly unobservable = unobservable subspace of (C2, A)       "T1"
///   G ≢ 0  -> robustly unobservable = unobservable subspace of ([C1; C2], A) "T2"
///
/// The unobservability characterisation presumes that some multiplier keeps
/// the associated worst-case output problem bounded; that is not verified.
struct Classification {
  Subspace possibly_controllable;
  Subspace robustly_unobservable;
  bool h_is_zero = false;
  bool g_is_zero = false;
  std::vector<std::string> theorem_trail;
};

Classification classify(const UncertainSystem& sys, double tol = kDefaultRankTol);

inline constexpr double kDefaultMembershipTol = 1e-6;

/// Membership of a nonzero x0 in the possibly controllable subspace. `tol`
/// is used both for the rank decisions and for the relative distance test.
/// Throws DomainError for x0 = 0.
bool is_possibly_controllable(const UncertainSystem& sys, const VectorXd& x0,
                              double tol = kDefaultMembershipTol);

/// Same as above for the robustly unobservable subspace.
bool is_robustly_unobservable(const UncertainSystem& sys, const VectorXd& x0,
                              double tol = kDefaultMembershipTol);

struct CrossCheckRow {
  double T = 0.0;
  WValue w;
  bool consistent = false;
};

struct CrossCheckReport {
  bool geometric_possibly_controllable = false;
  bool consistent = false;
  std::vector<CrossCheckRow> rows;
};

/// Compares the Riccati verdict (W_tau finite / infinite) at one multiplier
/// with the geometric classification, horizon by horizon. A state outside
/// the possibly controllable subspace must give an infinite W_tau; a state
/// inside it must give a finite one. `steps_per_unit` scales with T.
CrossCheckReport numeric_cross_check(const UncertainSystem& sys, const VectorXd& x0, double tau,
                                     const std::vector<double>& T_grid, int steps_per_unit,
                                     double rank_tol);

}  // namespace ukd
