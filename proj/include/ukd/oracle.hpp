#pragma once

#include <Eigen/Dense>

#include "ukd/model.hpp"

namespace ukd {

enum class LqScheme { kForwardEuler, kTrapezoidal, kExactHold };

/// Inputs are piecewise constant on `steps` equal intervals of [0, horizon].
/// The trapezoidal scheme propagates the state with the Crank-Nicolson map
/// and integrates |z|^2 with the trapezoidal rule; forward Euler uses the
/// left endpoint for both. kExactHold propagates with the matrix exponential
/// and integrates |z|^2 exactly over each step, so its value is the true
/// minimum over piecewise-constant inputs and cannot increase when the
/// number of steps is doubled.
struct LqDiscretization {
  int steps = 200;
  double horizon = 1.0;
  LqScheme scheme = LqScheme::kTrapezoidal;
};

/// Largest n * steps accepted by lq_solve.
inline constexpr long kMaxOracleSize = 50000;

struct LqResult {
  bool bounded = true;
  double value = 0.0;
  MatrixXd u;   ///< m x steps
  MatrixXd xi;  ///< r x steps
};

/// Brute-force minimisation of
///
///   |x(T)|^2 / eps + int_0^T (|u|^2 + tau |xi|^2 - tau |z|^2) dt
///
/// over the discretised inputs. All inputs are stacked into one vector, the
/// cost is assembled as a dense quadratic and its stationarity system is
/// solved by Cholesky. A Hessian with an eigenvalue below
/// -1e-10 (1 + scale) h yields bounded = false.
///
/// Throws ParameterError for invalid discretisations or oversized problems,
/// ConditioningError for a numerically singular (but not indefinite) Hessian.
LqResult lq_solve(const UncertainSystem& sys, const VectorXd& x0, double tau, double eps,
                  const LqDiscretization& disc);

struct IqcCost {
  VectorXd terminal_state;
  double u_energy = 0.0;      ///< int |u|^2
  double iqc_integral = 0.0;  ///< int (|xi|^2 - |z|^2)
};

/// Simulates the system with the given piecewise-constant inputs on the
/// discretisation grid (same quadrature as lq_solve).
IqcCost iqc_cost(const UncertainSystem& sys, const VectorXd& x0, const MatrixXd& u,
                 const MatrixXd& xi, const LqDiscretization& disc);

/// |x(T)|^2 / eps + int |u|^2 + tau int (|xi|^2 - |z|^2) for given inputs.
double lq_objective(const UncertainSystem& sys, const VectorXd& x0, double tau, double eps,
                    const MatrixXd& u, const MatrixXd& xi, const LqDiscretization& disc);

}  // namespace ukd
