#include "ukd/reduce.hpp"

#include <algorithm>
#include <sstream>

#include "ukd/error.hpp"

namespace ukd {

namespace {

MatrixXd hstack(const MatrixXd& a, const MatrixXd& b) {
  MatrixXd out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

MatrixXd vstack(const MatrixXd& a, const MatrixXd& b) {
  MatrixXd out(a.rows() + b.rows(), a.cols());
  out << a, b;
  return out;
}

ChannelRealization io_channel(const UncertainSystem& s, IoChannel ch) {
  switch (ch) {
    case IoChannel::kUZ:
      return {s.C1, s.A, s.B1, s.D1};
    case IoChannel::kUY:
      return {s.C2, s.A, s.B1, MatrixXd::Zero(s.l(), s.m())};
    case IoChannel::kXiZ:
      return {s.C1, s.A, s.B2, MatrixXd::Zero(s.h(), s.r())};
    case IoChannel::kXiY:
      return {s.C2, s.A, s.B2, s.D2};
  }
  throw DomainError("unknown channel");
}

constexpr KalmanBlock kBlocks[] = {KalmanBlock::kCo, KalmanBlock::kCUnobs, KalmanBlock::kUncObs,
                                   KalmanBlock::kUncUnobs};

void describe_coupling(DecompositionResult& res, double threshold) {
  const FourBlockForm& f = res.form;
  const UncertainSystem& t = f.transformed;
  std::vector<std::string> xi_in;
  std::vector<std::string> z_out;
  for (KalmanBlock b : kBlocks) {
    if (f.size(b) == 0) continue;
    if (t.B2.middleRows(f.offset(b), f.size(b)).norm() > threshold) xi_in.push_back(to_string(b));
    if (t.C1.middleCols(f.offset(b), f.size(b)).norm() > threshold) z_out.push_back(to_string(b));
  }
  const auto join = [](const std::vector<std::string>& v) {
    if (v.empty()) return std::string("none");
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + v[i];
    return s;
  };
  res.coupling_report.push_back("xi enters: " + join(xi_in));
  res.coupling_report.push_back("z reads: " + join(z_out));
  for (KalmanBlock to : kBlocks) {
    for (KalmanBlock from : kBlocks) {
      if (to == from || f.size(to) == 0 || f.size(from) == 0) continue;
      const double c =
          t.A.block(f.offset(to), f.offset(from), f.size(to), f.size(from)).norm();
      if (c > threshold) {
        res.coupling_report.push_back(std::string("coupling: ") + to_string(from) + " -> " +
                                      to_string(to));
      }
    }
  }
}

}  // namespace

const char* to_string(CaseLabel c) {
  switch (c) {
    case CaseLabel::kCase1:
      return "Case1";
    case CaseLabel::kCase2:
      return "Case2";
    case CaseLabel::kCase3:
      return "Case3";
    case CaseLabel::kCase4:
      return "Case4";
  }
  return "?";
}

const char* to_string(IoChannel c) {
  switch (c) {
    case IoChannel::kUZ:
      return "u->z";
    case IoChannel::kUY:
      return "u->y";
    case IoChannel::kXiZ:
      return "xi->z";
    case IoChannel::kXiY:
      return "xi->y";
  }
  return "?";
}

CaseLabel select_case(const UncertainSystem& sys, double tol) {
  const bool g0 = transfer_is_zero(sys, Channel::G, tol);
  const bool h0 = transfer_is_zero(sys, Channel::H, tol);
  if (g0 && h0) return CaseLabel::kCase1;
  if (h0) return CaseLabel::kCase2;
  if (g0) return CaseLabel::kCase3;
  return CaseLabel::kCase4;
}

DecomposingTriple decomposing_triple(const UncertainSystem& sys, CaseLabel c) {
  using IC = IoChannel;
  switch (c) {
    case CaseLabel::kCase1:
      return {sys.C2, sys.B1, "(C2, A, B1)", {IC::kUY}};
    case CaseLabel::kCase2:
      return {vstack(sys.C1, sys.C2), sys.B1, "([C1; C2], A, B1)", {IC::kUZ, IC::kUY}};
    case CaseLabel::kCase3:
      return {sys.C2, hstack(sys.B1, sys.B2), "(C2, A, [B1 B2])", {IC::kUY, IC::kXiY}};
    case CaseLabel::kCase4:
      return {vstack(sys.C1, sys.C2), hstack(sys.B1, sys.B2), "([C1; C2], A, [B1 B2])",
              kAllChannels};
  }
  throw DomainError("unknown case");
}

DecompositionResult decompose(const UncertainSystem& sys, double tol) {
  DecompositionResult res;
  res.case_label = select_case(sys, tol);
  const DecomposingTriple triple = decomposing_triple(sys, res.case_label);
  res.triple = triple.description;
  res.preserved_channels = triple.preserved;
  res.form = four_block(sys, triple.C, triple.B, tol);
  res.residuals = four_block_residuals(res.form, res.form.Tmat * triple.B,
                                       triple.C * res.form.Tmat.transpose());

  const Eigen::Index k = res.form.dims[0];
  for (Eigen::Index i = 0; i < k; ++i) res.kept_states.push_back(i);
  if (k < sys.n()) {
    const UncertainSystem& t = res.form.transformed;
    UncertainSystem red;
    red.A = t.A.topLeftCorner(k, k);
    red.B1 = t.B1.topRows(k);
    red.B2 = t.B2.topRows(k);
    red.C1 = t.C1.leftCols(k);
    red.D1 = t.D1;
    red.C2 = t.C2.leftCols(k);
    red.D2 = t.D2;
    res.reduced = std::move(red);
  }

  const double threshold = tol * (1.0 + system_scale(sys));
  describe_coupling(res, threshold);

  if (res.case_label == CaseLabel::kCase2) {
    const UncertainSystem& t = res.form.transformed;
    const double z_path = t.C1.leftCols(k).norm() + t.D1.norm();
    if (z_path > threshold) {
      std::ostringstream os;
      os << "controllable-observable block drives z (norm " << z_path
         << "); H ≡ 0 expects it to feed y only";
      res.warnings.push_back(os.str());
    }
  }
  return res;
}

EquivalenceReport verify_io_equivalence(const UncertainSystem& original,
                                        const UncertainSystem& reduced, int k_max, double tol,
                                        const std::vector<IoChannel>& channels) {
  if (original.m() != reduced.m() || original.r() != reduced.r() ||
      original.h() != reduced.h() || original.l() != reduced.l()) {
    throw DomainError("verify_io_equivalence: input/output dimensions differ");
  }
  EquivalenceReport rep;
  rep.k_max = k_max < 0 ? static_cast<int>(2 * original.n()) : k_max;
  rep.threshold = tol * (1.0 + system_scale(original));
  for (IoChannel ch : channels) {
    const auto a = markov_parameters(io_channel(original, ch), rep.k_max);
    const auto b = markov_parameters(io_channel(reduced, ch), rep.k_max);
    double dev = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) dev = std::max(dev, (a[i] - b[i]).norm());
    rep.table.push_back({ch, dev});
    rep.max_deviation = std::max(rep.max_deviation, dev);
  }
  rep.equivalent = rep.max_deviation <= rep.threshold;
  return rep;
}

}  // namespace ukd
