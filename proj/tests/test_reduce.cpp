#include <gtest/gtest.h>

#include "test_util.hpp"
#include "ukd/error.hpp"
#include "ukd/reduce.hpp"

using namespace ukd;
using ukd::test::Rng;

namespace {

UncertainSystem two_modes(double b2_first, double b2_second) {
  UncertainSystem s;
  s.A = (MatrixXd(2, 2) << -1, 0, 0, -2).finished();
  s.B1 = (MatrixXd(2, 1) << 1, 1).finished();
  s.B2 = (MatrixXd(2, 1) << b2_first, b2_second).finished();
  s.C1 = (MatrixXd(1, 2) << 1, 0).finished();
  s.D1 = MatrixXd::Zero(1, 1);
  s.C2 = (MatrixXd(1, 2) << 0, 1).finished();
  s.D2 = MatrixXd::Zero(1, 1);
  return s;
}

UncertainSystem keep_first(const FourBlockForm& f) {
  const Eigen::Index k = f.dims[0];
  const UncertainSystem& t = f.transformed;
  UncertainSystem r;
  r.A = t.A.topLeftCorner(k, k);
  r.B1 = t.B1.topRows(k);
  r.B2 = t.B2.topRows(k);
  r.C1 = t.C1.leftCols(k);
  r.D1 = t.D1;
  r.C2 = t.C2.leftCols(k);
  r.D2 = t.D2;
  return r;
}

double deviation(const EquivalenceReport& r, IoChannel c) {
  for (const auto& row : r.table)
    if (row.channel == c) return row.deviation;
  return -1.0;
}

}  // namespace

TEST(SelectCase, Examples) {
  EXPECT_EQ(select_case(test::load("example2_case2.json")), CaseLabel::kCase4);
  EXPECT_EQ(select_case(test::load("example1.json"), 1e-3), CaseLabel::kCase4);
  auto s = test::load("example1.json");
  s.B2.setZero();
  s.D2.setZero();
  s.D1.setZero();
  s.C1.setZero();
  EXPECT_EQ(select_case(s), CaseLabel::kCase1);
}

TEST(SelectCase, AllFourLabels) {
  EXPECT_EQ(select_case(two_modes(1, 0)), CaseLabel::kCase3);  // G = 0
  auto s = two_modes(0, 1);
  s.B1 << 0, 1;
  EXPECT_EQ(select_case(s), CaseLabel::kCase2);  // H = 0
  EXPECT_EQ(select_case(two_modes(1, 1)), CaseLabel::kCase4);
}

TEST(Decompose, Example1) {
  const auto sys = test::load("example1.json");
  const DecompositionResult d = decompose(sys, 1e-3);
  EXPECT_EQ(d.case_label, CaseLabel::kCase4);
  ASSERT_TRUE(d.reduced.has_value());
  const UncertainSystem& r = *d.reduced;
  ASSERT_EQ(r.n(), 1);
  EXPECT_NEAR(r.A(0, 0), -0.95, 1e-3);
  EXPECT_NEAR(r.C1(0, 0) * r.B1(0, 0), 0.216, 1e-3);
  EXPECT_NEAR(r.C1(0, 0) * r.B2(0, 0), 0.3694 * 1.0843, 1e-3);
  EXPECT_NEAR(r.C2(0, 0) * r.B1(0, 0), 0.0082 * 0.5848, 1e-3);
  EXPECT_EQ(d.kept_states, (std::vector<Eigen::Index>{0}));
  EXPECT_TRUE(verify_io_equivalence(sys, r, 4, 1e-2).equivalent);
}

TEST(Decompose, Example2Case2) {
  const auto sys = test::load("example2_case2.json");
  const DecompositionResult d = decompose(sys);
  ASSERT_TRUE(d.reduced.has_value());
  const UncertainSystem& r = *d.reduced;
  ASSERT_EQ(r.n(), 1);
  EXPECT_NEAR(r.A(0, 0), -4.0, 1e-3);
  EXPECT_NEAR(eval_transfer(r, Channel::G, 0.0)(0, 0).real(), -0.25, 1e-3);
  EXPECT_NEAR(eval_transfer(r, Channel::H, 0.0)(0, 0).real(), 0.375, 1e-3);
  EXPECT_TRUE(verify_io_equivalence(sys, r, -1, 1e-9).equivalent);
}

TEST(Decompose, MinimalSystemKeepsAll) {
  const DecompositionResult d = decompose(test::load("example2_case1.json"));
  EXPECT_FALSE(d.reduced.has_value());
  EXPECT_EQ(d.kept_states, (std::vector<Eigen::Index>{0, 1}));
}

TEST(Decompose, TriplePerCase) {
  EXPECT_EQ(decompose(two_modes(1, 0)).triple, "(C2, A, [B1 B2])");
  EXPECT_EQ(decompose(two_modes(1, 1)).triple, "([C1; C2], A, [B1 B2])");
  auto s = two_modes(0, 1);
  s.B1 << 0, 1;
  EXPECT_EQ(decompose(s).triple, "([C1; C2], A, B1)");
}

TEST(Decompose, Case3KeepsMeasuredChannels) {
  // G = 0 and H != 0. Decomposing on C2 keeps the y-channels intact.
  const auto sys = two_modes(1, 0);
  const DecompositionResult d = decompose(sys);
  ASSERT_EQ(d.case_label, CaseLabel::kCase3);
  ASSERT_TRUE(d.reduced.has_value());
  EXPECT_EQ(d.preserved_channels, (std::vector<IoChannel>{IoChannel::kUY, IoChannel::kXiY}));
  EXPECT_TRUE(verify_io_equivalence(sys, *d.reduced, -1, 1e-9, d.preserved_channels).equivalent);

  // Decomposing on C1 instead would drop the mode u -> y runs through.
  MatrixXd B(2, 2);
  B << sys.B1, sys.B2;
  const UncertainSystem via_c1 = keep_first(four_block(sys, sys.C1, B));
  const EquivalenceReport rep = verify_io_equivalence(sys, via_c1, -1, 1e-6);
  EXPECT_GT(deviation(rep, IoChannel::kUY), 0.5);
}

TEST(Decompose, Case2) {
  auto sys = two_modes(0, 1);
  sys.B1 << 1, 0;
  sys.C1 << 0, 1;
  sys.C2 << 1, 1;
  const DecompositionResult d = decompose(sys);
  ASSERT_EQ(d.case_label, CaseLabel::kCase2);
  ASSERT_TRUE(d.reduced.has_value());
  EXPECT_EQ(d.reduced->n(), 1);
  EXPECT_TRUE(d.warnings.empty());
  EXPECT_TRUE(verify_io_equivalence(sys, *d.reduced, -1, 1e-9, d.preserved_channels).equivalent);
  EXPECT_FALSE(d.coupling_report.empty());
}

TEST(Equivalence, PaperReducedModel) {
  const auto sys = test::load("example1.json");
  UncertainSystem r;
  r.A = MatrixXd::Constant(1, 1, -0.95);
  r.B1 = MatrixXd::Constant(1, 1, 0.5848);
  r.B2 = MatrixXd::Constant(1, 1, 1.0843);
  r.C1 = MatrixXd::Constant(1, 1, 0.3694);
  r.D1 = MatrixXd::Zero(1, 1);
  r.C2 = MatrixXd::Constant(1, 1, 0.0082);
  r.D2 = MatrixXd::Zero(1, 1);
  EXPECT_TRUE(verify_io_equivalence(sys, r, -1, 1e-2).equivalent);
  r.A(0, 0) = -0.90;
  EXPECT_FALSE(verify_io_equivalence(sys, r, -1, 1e-2).equivalent);
}

TEST(Equivalence, SelfAndMismatch) {
  const auto sys = test::load("example2_case2.json");
  const EquivalenceReport rep = verify_io_equivalence(sys, sys, -1, 1e-12);
  EXPECT_TRUE(rep.equivalent);
  EXPECT_EQ(rep.max_deviation, 0.0);
  EXPECT_EQ(rep.k_max, 4);
  EXPECT_EQ(rep.table.size(), 4u);
  auto other = sys;
  other.C2 = MatrixXd::Zero(2, 2);
  other.D2 = MatrixXd::Zero(2, 1);
  EXPECT_THROW(verify_io_equivalence(sys, other, -1, 1e-6), DomainError);
}

TEST(Property, ConstructedSystemsReduce) {
  Rng rng(61);
  for (int trial = 0; trial < 40; ++trial) {
    std::array<Eigen::Index, 4> dims{};
    for (auto& d : dims) d = rng.integer(0, 2);
    dims[0] = std::max<Eigen::Index>(dims[0], 1);
    const auto c = test::constructed_system(rng, dims);
    const DecompositionResult d = decompose(c.sys);
    ASSERT_EQ(d.case_label, CaseLabel::kCase4);
    EXPECT_EQ(d.form.dims, dims);
    const Eigen::Index n = c.sys.n();
    EXPECT_EQ(d.reduced.has_value(), dims[0] < n);
    if (!d.reduced) continue;
    EXPECT_EQ(d.reduced->n(), dims[0]);
    EXPECT_EQ(d.reduced->D1, c.sys.D1);
    EXPECT_EQ(d.reduced->D2, c.sys.D2);
    EXPECT_TRUE(verify_io_equivalence(c.sys, *d.reduced, -1, 1e-6).equivalent);
  }
}

TEST(Property, CaseInvariantUnderRotation) {
  Rng rng(62);
  for (int trial = 0; trial < 30; ++trial) {
    auto s = two_modes(trial % 2, (trial / 2) % 2);
    if (trial % 3 == 0) s = test::random_system(rng, 3, 1, 1, 1, 1);
    EXPECT_EQ(select_case(s), select_case(s.transformed(rng.orthogonal(s.n()))));
  }
}
