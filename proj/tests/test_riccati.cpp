#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "test_util.hpp"
#include "ukd/error.hpp"
#include "ukd/linalg.hpp"
#include "ukd/oracle.hpp"
#include "ukd/riccati.hpp"
#include "ukd/subspaces.hpp"

using namespace ukd;
using ukd::test::Rng;

namespace {

UncertainSystem scalar(double a, double b1, double b2, double c1, double d1) {
  UncertainSystem s;
  s.A = MatrixXd::Constant(1, 1, a);
  s.B1 = MatrixXd::Constant(1, 1, b1);
  s.B2 = MatrixXd::Constant(1, 1, b2);
  s.C1 = MatrixXd::Constant(1, 1, c1);
  s.D1 = MatrixXd::Constant(1, 1, d1);
  s.C2 = MatrixXd::Zero(0, 1);
  s.D2 = MatrixXd::Zero(0, 1);
  return s;
}

UncertainSystem tan_system() { return scalar(0, 0, 1, 1, 0); }

RdeParams params(double tau, double T, std::optional<double> eps = std::nullopt) {
  RdeParams p;
  p.tau = tau;
  p.T = T;
  p.eps = eps;
  p.steps = default_rde_steps(T);
  return p;
}

// Random systems whose S and S_eps runs complete at the given tau.
UncertainSystem feasible_system(Rng& rng, double tau, double T, double d1_scale) {
  for (;;) {
    const Eigen::Index n = 1 + rng.integer(0, 2);
    auto s = test::random_system(rng, n, 1 + rng.integer(0, 1), 1, 1, 1, d1_scale);
    s.C1 *= 0.5;
    if (!feasibility(s, tau)) continue;
    if (solve_rde(s, RdeKind::kS, params(tau, T)).completed() &&
        solve_rde(s, RdeKind::kSEps, params(tau, T, 1.0)).completed()) {
      return s;
    }
  }
}

}  // namespace

TEST(Feasibility, Examples) {
  Rng rng(31);
  auto s = test::random_system(rng, 2, 1, 1, 1, 1);
  s.D1.setZero();
  EXPECT_TRUE(feasibility(s, 100.0));
  EXPECT_FALSE(feasibility(scalar(0, 1, 1, 1, 1.0), 2.0));
  EXPECT_TRUE(feasibility(scalar(0, 1, 1, 1, 0.5), 3.0));
}

TEST(Dual, Fields) {
  UncertainSystem s = test::load("example1.json");
  s.A = (MatrixXd(2, 2) << 0, 1, 0, 0).finished();
  const DualSystem d = build_dual(s);
  EXPECT_EQ(d.A, (MatrixXd(2, 2) << 0, 0, -1, 0).finished());
  EXPECT_EQ(d.Cy, (MatrixXd(1, 2) << 0.3911, 0.4348).finished());
  EXPECT_EQ(d.Dy.norm(), 0.0);
  EXPECT_EQ(d.B, s.C1.transpose());
  EXPECT_EQ(d.Cz, s.B2.transpose());
}

TEST(SolveRde, Example1SingularAlongX2) {
  const auto sys = test::load("example1.json");
  const RdeSolution sol = solve_rde(sys, RdeKind::kS, params(1.0, 1.0));
  ASSERT_TRUE(sol.completed());
  const MatrixXd& S0 = sol.at_zero();
  const auto e = linalg::eig_range(S0);
  EXPECT_LE(e.min, 1e-4 * e.max);
  EXPECT_LE((S0 * test::x2_example1()).norm(), 1e-3);
  EXPECT_DOUBLE_EQ(sol.times.front(), 0.0);
  EXPECT_DOUBLE_EQ(sol.times.back(), 1.0);
  for (const auto& S : sol.values) EXPECT_LE((S - S.transpose()).norm(), 1e-9);
}

TEST(SolveRde, TanClosedForm) {
  const RdeSolution sol = solve_rde(tan_system(), RdeKind::kS, params(1.0, 1.2));
  ASSERT_TRUE(sol.completed());
  for (std::size_t i = 0; i < sol.times.size(); i += 97) {
    EXPECT_NEAR(sol.values[i](0, 0), std::tan(1.2 - sol.times[i]), 1e-8);
  }
}

TEST(SolveRde, TanEscapes) {
  const double T = 2.0;
  const RdeSolution sol = solve_rde(tan_system(), RdeKind::kS, params(1.0, T));
  ASSERT_FALSE(sol.completed());
  EXPECT_NEAR(T - sol.escape_time, std::numbers::pi / 2, 0.01);
  ASSERT_FALSE(sol.times.empty());
  EXPECT_GT(sol.times.front(), sol.escape_time);
}

TEST(SolveRde, NoUncertaintyGivesGramian) {
  Rng rng(32);
  for (int trial = 0; trial < 6; ++trial) {
    auto s = test::random_system(rng, 1 + trial % 3, 2, 1, 1, 1);
    s.B2.setZero();
    s.C1.setZero();
    s.D1.setZero();
    for (double tau : {0.3, 4.0}) {
      const MatrixXd S0 = solve_rde(s, RdeKind::kS, params(tau, 0.8)).at_zero();
      const MatrixXd W = gramian(s.A, s.B1, 0, 0.8, 400);
      EXPECT_LE((S0 - W).norm(), 1e-6);
    }
  }
}

TEST(SolveRde, Errors) {
  const auto s = scalar(0, 1, 1, 1, 1.0);
  EXPECT_THROW(solve_rde(s, RdeKind::kS, params(2.0, 1.0)), FeasibilityError);
  EXPECT_THROW(solve_rde(s, RdeKind::kS, params(-1.0, 1.0)), ParameterError);
  EXPECT_THROW(solve_rde(s, RdeKind::kSEps, params(0.5, 1.0)), ParameterError);
  RdeParams p = params(0.5, 1.0);
  p.steps = 0;
  EXPECT_THROW(solve_rde(s, RdeKind::kS, p), ParameterError);
}

TEST(DualForms, Example1) {
  const auto d = dual_form_equivalence(test::load("example1.json"), params(1.0, 0.5, 0.1));
  ASSERT_TRUE(d.eps_forms.has_value());
  EXPECT_LE(d.max(), 1e-6);
}

TEST(DualForms, ZeroFeedthroughCoincide) {
  Rng rng(33);
  for (int trial = 0; trial < 5; ++trial) {
    auto s = test::random_system(rng, 2, 1, 1, 1, 1);
    while (!solve_rde(s, RdeKind::kSEps, params(0.7, 0.4, 0.5)).completed())
      s = test::random_system(rng, 2, 1, 1, 1, 1);
    EXPECT_LE(dual_form_equivalence(s, params(0.7, 0.4, 0.5)).max(), 1e-10);
  }
}

TEST(DualForms, NonzeroFeedthrough) {
  Rng rng(34);
  auto s = test::random_system(rng, 2, 1, 1, 1, 1);
  s.D1 << 0.5;
  const auto d = dual_form_equivalence(s, params(1.0, 0.4, 0.5));
  EXPECT_LE(d.max(), 1e-6);
}

TEST(WEpsTau, MatchesOracleOnScalar) {
  const auto s = scalar(-1, 1, 0.5, 1, 0);
  const VectorXd x0 = VectorXd::Ones(1);
  const double w = w_eps_tau(s, x0, params(1.0, 0.5, 0.1));
  LqDiscretization disc;
  disc.steps = 200;
  disc.horizon = 0.5;
  const LqResult r = lq_solve(s, x0, 1.0, 0.1, disc);
  ASSERT_TRUE(r.bounded);
  EXPECT_LE(std::abs(w - r.value), 0.01 * w);
}

TEST(WEpsTau, ZeroState) {
  EXPECT_EQ(w_eps_tau(test::load("example1.json"), VectorXd::Zero(2), params(1, 0.5, 0.1)), 0.0);
}

TEST(WEpsTau, Example1DivergesAlongX2) {
  const auto sys = test::load("example1.json");
  const double w = w_eps_tau(sys, test::x2_example1(), params(1.0, 0.5, 1e-4));
  EXPECT_GE(w, 1e3);
  RdeParams fine = params(1.0, 0.5, 1e-4);
  fine.steps *= 10;
  EXPECT_NEAR(w_eps_tau(sys, test::x2_example1(), fine), w, 1e-6 * w);
}

TEST(WEpsTau, EscapeIsNoSolution) {
  try {
    w_eps_tau(tan_system(), VectorXd::Ones(1), params(1.0, 2.0, 0.1));
    FAIL() << "expected NoSolutionError";
  } catch (const NoSolutionError& e) {
    EXPECT_GT(e.escape_time(), 0.0);
  }
}

TEST(WTau, Example1InfiniteAlongX2) {
  const auto sys = test::load("example1.json");
  for (double T : {0.1, 0.5, 1.0}) {
    const WValue w = w_tau(sys, test::x2_example1(), 1.0, T, default_rde_steps(T));
    EXPECT_FALSE(w.finite) << "T = " << T;
  }
}

TEST(WTau, ZeroState) {
  const WValue w = w_tau(test::load("example1.json"), VectorXd::Zero(2), 1.0, 0.5, 1000);
  EXPECT_TRUE(w.finite);
  EXPECT_EQ(w.value, 0.0);
}

TEST(WTau, NoUncertaintyIsMinimumEnergy) {
  Rng rng(35);
  auto s = test::random_system(rng, 2, 1, 1, 1, 1);
  s.B2.setZero();
  s.C1.setZero();
  s.D1.setZero();
  const VectorXd x0 = rng.vector(2);
  const WValue w = w_tau(s, x0, 5.0, 0.7, default_rde_steps(0.7));
  ASSERT_TRUE(w.finite);
  EXPECT_FALSE(w.outside_theorem);
  const MatrixXd W = test::simpson_gramian(s.A, s.B1, 0, 0.7, 2000);
  const double ref = x0.dot(W.ldlt().solve(x0));
  EXPECT_LE(std::abs(w.value - ref), 1e-5 * ref);
}

TEST(WFromS0, Branches) {
  const MatrixXd S = (MatrixXd(2, 2) << 2, 0, 0, 0).finished();
  const WValue inside = w_from_s0(S, (VectorXd(2) << 1, 0).finished(), 1e-6);
  EXPECT_TRUE(inside.finite);
  EXPECT_TRUE(inside.outside_theorem);
  EXPECT_DOUBLE_EQ(inside.value, 0.5);
  const WValue outside = w_from_s0(S, (VectorXd(2) << 1, 1).finished(), 1e-6);
  EXPECT_FALSE(outside.finite);
  const WValue regular = w_from_s0(MatrixXd::Identity(2, 2) * 4, VectorXd::Ones(2), 1e-6);
  EXPECT_TRUE(regular.finite);
  EXPECT_FALSE(regular.outside_theorem);
  EXPECT_DOUBLE_EQ(regular.value, 0.5);
}

TEST(SupW, Example1) {
  const auto sys = test::load("example1.json");
  const SupW inf = sup_w_tau(sys, test::x2_example1(), 0.5, {1.0}, 1000, 1e-3);
  EXPECT_FALSE(inf.finite);
  EXPECT_DOUBLE_EQ(inf.infinite_tau, 1.0);

  MatrixXd B(2, 2);
  B << sys.B1, sys.B2;
  const VectorXd x0 = controllable_subspace(sys.A, B, 1e-3).basis().col(0);
  const SupW fin = sup_w_tau(sys, x0, 0.25, {0.5, 1.0, 2.0}, 500, 1e-3);
  ASSERT_TRUE(fin.finite);
  const SupW fine = sup_w_tau(sys, x0, 0.25, {0.5, 1.0, 2.0}, 1000, 1e-3);
  EXPECT_NEAR(fin.value, fine.value, 0.01 * fine.value);
}

TEST(SupW, ZeroStateAndBadGrid) {
  const auto sys = test::load("example1.json");
  const SupW z = sup_w_tau(sys, VectorXd::Zero(2), 0.5, {1.0}, 500);
  EXPECT_TRUE(z.finite);
  EXPECT_EQ(z.value, 0.0);
  EXPECT_THROW(sup_w_tau(sys, VectorXd::Ones(2), 0.5, {2.0, 1.0}, 500), ParameterError);
  EXPECT_THROW(sup_w_tau(sys, VectorXd::Ones(2), 0.5, {}, 500), ParameterError);
  EXPECT_THROW(sup_w_tau(sys, VectorXd::Ones(2), 0.5, {0.0, 1.0}, 500), ParameterError);
}

TEST(SupW, LcEstimateSubtractsTauD) {
  Rng rng(36);
  const auto s = test::random_system(rng, 2, 2, 1, 1, 1);
  const VectorXd x0 = rng.vector(2);
  const SupW sup = sup_w_tau(s, x0, 0.3, {0.5, 1.0}, 600, kDefaultWRankTol, 2.0);
  ASSERT_TRUE(sup.finite);
  ASSERT_TRUE(sup.lc_estimate.has_value());
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& p : sup.points) best = std::max(best, p.w.value - 2.0 * p.tau);
  EXPECT_DOUBLE_EQ(*sup.lc_estimate, best);
}

TEST(TauZero, FreeUncertaintyInput) {
  // xi can steer along e2 for free, so only the e1 component costs energy.
  UncertainSystem s;
  s.A = MatrixXd::Zero(2, 2);
  s.B1 = (MatrixXd(2, 1) << 1, 0).finished();
  s.B2 = (MatrixXd(2, 1) << 0, 1).finished();
  s.C1 = MatrixXd::Zero(1, 2);
  s.D1 = MatrixXd::Zero(1, 1);
  s.C2 = MatrixXd::Zero(0, 2);
  s.D2 = MatrixXd::Zero(0, 1);
  const WValue w = w_tau_zero(s, (VectorXd(2) << 2, 5).finished(), 0.5, 200);
  ASSERT_TRUE(w.finite);
  EXPECT_NEAR(w.value, 4.0 / 0.5, 1e-9);

  s.B2.setZero();
  EXPECT_FALSE(w_tau_zero(s, (VectorXd(2) << 2, 5).finished(), 0.5, 200).finite);
}

TEST(Sweep, Example1) {
  const auto sys = test::load("example1.json");
  std::vector<double> grid;
  for (int i = 1; i <= 20; ++i) grid.push_back(0.05 * i);
  const auto rows = eig_sweep(sys, 1.0, grid);
  ASSERT_EQ(rows.size(), 20u);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    ASSERT_TRUE(rows[i].completed);
    EXPECT_LE(rows[i].lambda_min, 1e-4 * rows[i].lambda_max);
    if (i > 0) {
      EXPECT_GE(rows[i].lambda_max, rows[i - 1].lambda_max);
    }
  }
  const auto fine = eig_sweep(sys, 1.0, grid, 4000);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_NEAR(fine[i].lambda_max, rows[i].lambda_max, 1e-9 * rows[i].lambda_max);
  }
}

TEST(Sweep, TanEscapeRow) {
  const auto rows = eig_sweep(tan_system(), 1.0, {1.0, 1.7});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_TRUE(rows[0].completed);
  EXPECT_FALSE(rows[1].completed);
}

TEST(Property, MonotoneInEpsAndAboveS) {
  Rng rng(37);
  for (int trial = 0; trial < 15; ++trial) {
    const double tau = trial % 2 ? 0.5 : 2.0;
    const auto s = feasible_system(rng, tau, 0.6, 0.3);
    const double delta = 1e-8 * (1 + system_scale(s));
    const RdeSolution S = solve_rde(s, RdeKind::kS, params(tau, 0.6));
    std::optional<RdeSolution> prev;
    for (double eps : {1.0, 0.1, 0.01}) {
      const RdeSolution Se = solve_rde(s, RdeKind::kSEps, params(tau, 0.6, eps));
      ASSERT_TRUE(Se.completed());
      ASSERT_EQ(Se.times.size(), S.times.size());
      for (std::size_t i = 0; i < S.times.size(); i += 50) {
        EXPECT_GE(test::min_eig(S.values[i]), -delta);
        EXPECT_GE(test::min_eig(Se.values[i] - S.values[i]), -delta);
        if (prev) EXPECT_GE(test::min_eig(prev->values[i] - Se.values[i]), -delta);
      }
      prev = Se;
    }
  }
}

TEST(Property, NoZStructure) {
  Rng rng(38);
  for (int trial = 0; trial < 10; ++trial) {
    auto s = test::random_system(rng, 1 + trial % 3, 1, 1, 1, 1);
    s.C1.setZero();
    s.D1.setZero();
    const double T = 0.5;
    const MatrixXd W = gramian(s.A, s.B1, 0, T, 400);
    const MatrixXd S1 = solve_rde(s, RdeKind::kS, params(1.0, T)).at_zero();
    const MatrixXd S10 = solve_rde(s, RdeKind::kS, params(10.0, T)).at_zero();
    EXPECT_LE((1.0 * (S1 - W) - 10.0 * (S10 - W)).norm(), 1e-5 * (1 + system_scale(s)));
    EXPECT_GE(test::min_eig(S1 - S10), -1e-10);
  }
}

TEST(Property, PIsInverseOfSEps) {
  Rng rng(39);
  for (int trial = 0; trial < 10; ++trial) {
    const auto s = feasible_system(rng, 1.0, 0.4, 0.3);
    const RdeParams p = params(1.0, 0.4, 0.5);
    const RdeSolution P = solve_rde(s, RdeKind::kP, p);
    const RdeSolution Se = solve_rde(s, RdeKind::kSEps, p);
    if (!P.completed() || !Se.completed()) continue;
    for (std::size_t i = 0; i < P.times.size(); i += 40) {
      const MatrixXd inv = Se.values[i].inverse();
      EXPECT_LE((P.values[i] - inv).norm(), 1e-5 * P.values[i].norm());
    }
  }
}

TEST(Property, FourthOrderConvergence) {
  Rng rng(40);
  for (int trial = 0; trial < 5; ++trial) {
    const auto s = feasible_system(rng, 1.0, 0.5, 0.0);
    RdeParams p = params(1.0, 0.5, 0.5);
    p.steps = 20;
    const MatrixXd a = solve_rde(s, RdeKind::kSEps, p).at_zero();
    p.steps = 40;
    const MatrixXd b = solve_rde(s, RdeKind::kSEps, p).at_zero();
    p.steps = 80;
    const MatrixXd c = solve_rde(s, RdeKind::kSEps, p).at_zero();
    const double e1 = (a - b).norm(), e2 = (b - c).norm();
    if (e2 < 1e-13) continue;
    EXPECT_GT(e1 / e2, 10.0);
    EXPECT_LT(e1 / e2, 24.0);
  }
}

TEST(Property, InverseQuadraticFormBound) {
  Rng rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index n = 1 + trial % 4, k = 1 + trial % 3;
    const MatrixXd G = rng.matrix(n, n);
    const MatrixXd M = G * G.transpose() + 0.1 * MatrixXd::Identity(n, n);
    const MatrixXd N = rng.matrix(n, k);
    const VectorXd y0 = rng.vector(k);
    bool ok = false;
    const double lhs = linalg::inverse_quadratic_form(M + N * N.transpose(), N * y0, &ok);
    ASSERT_TRUE(ok);
    EXPECT_LE(lhs, y0.squaredNorm() + 1e-10);
  }
}
