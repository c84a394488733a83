#include "ukd/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ukd/error.hpp"

namespace ukd {

namespace {

std::string shape(const MatrixXd& M) {
  std::ostringstream os;
  os << M.rows() << "x" << M.cols();
  return os.str();
}

void expect_shape(std::vector<Violation>& out, const char* name, const MatrixXd& M,
                  Eigen::Index rows, Eigen::Index cols, const char* why) {
  if (M.rows() != rows || M.cols() != cols) {
    std::ostringstream os;
    os << name << " is " << shape(M) << ", expected " << rows << "x" << cols << " (" << why
       << ")";
    out.push_back({name, os.str()});
  }
}

}  // namespace

UncertainSystem UncertainSystem::transformed(const MatrixXd& T) const {
  UncertainSystem out;
  out.A = T * A * T.transpose();
  out.B1 = T * B1;
  out.B2 = T * B2;
  out.C1 = C1 * T.transpose();
  out.D1 = D1;
  out.C2 = C2 * T.transpose();
  out.D2 = D2;
  return out;
}

const char* to_string(Channel ch) { return ch == Channel::G ? "G" : "H"; }

std::vector<Violation> validate(const UncertainSystem& sys) {
  std::vector<Violation> out;
  const Eigen::Index n = sys.A.rows();
  if (sys.A.cols() != n) {
    out.push_back({"A", "A is " + shape(sys.A) + ", expected a square matrix"});
  }
  if (sys.B1.rows() != n) {
    out.push_back({"B1", "B1 has " + std::to_string(sys.B1.rows()) + " rows, A has " +
                             std::to_string(n)});
  }
  if (sys.B2.rows() != n) {
    out.push_back({"B2", "B2 has " + std::to_string(sys.B2.rows()) + " rows, A has " +
                             std::to_string(n)});
  }
  if (sys.C1.cols() != n) {
    out.push_back({"C1", "C1 has " + std::to_string(sys.C1.cols()) + " columns, A has " +
                             std::to_string(n)});
  }
  if (sys.C2.cols() != n) {
    out.push_back({"C2", "C2 has " + std::to_string(sys.C2.cols()) + " columns, A has " +
                             std::to_string(n)});
  }
  expect_shape(out, "D1", sys.D1, sys.C1.rows(), sys.B1.cols(), "rows(C1) x cols(B1)");
  expect_shape(out, "D2", sys.D2, sys.C2.rows(), sys.B2.cols(), "rows(C2) x cols(B2)");

  const std::pair<const char*, const MatrixXd*> all[] = {
      {"A", &sys.A},   {"B1", &sys.B1}, {"B2", &sys.B2}, {"C1", &sys.C1},
      {"D1", &sys.D1}, {"C2", &sys.C2}, {"D2", &sys.D2}};
  for (const auto& [name, M] : all) {
    if (!M->allFinite()) {
      out.push_back({name, std::string(name) + " contains a non-finite entry"});
    }
  }
  return out;
}

double system_scale(const UncertainSystem& sys) {
  return std::max({sys.A.norm(), sys.B1.norm(), sys.B2.norm(), sys.C1.norm(), sys.D1.norm(),
                   sys.C2.norm(), sys.D2.norm()});
}

ChannelRealization channel_realization(const UncertainSystem& sys, Channel ch) {
  if (ch == Channel::G) return {sys.C2, sys.A, sys.B2, sys.D2};
  return {sys.C1, sys.A, sys.B1, sys.D1};
}

std::vector<MatrixXd> markov_parameters(const ChannelRealization& g, int k_max) {
  std::vector<MatrixXd> out;
  out.reserve(static_cast<std::size_t>(k_max) + 2);
  out.push_back(g.D);
  MatrixXd AkB = g.B;
  for (int k = 0; k <= k_max; ++k) {
    out.push_back(g.C * AkB);
    AkB = g.A * AkB;
  }
  return out;
}

std::vector<MatrixXd> markov_parameters(const UncertainSystem& sys, Channel ch, int k_max) {
  return markov_parameters(channel_realization(sys, ch), k_max);
}

bool transfer_is_zero(const UncertainSystem& sys, Channel ch, double tol) {
  const double threshold = tol * (1.0 + system_scale(sys));
  // Cayley-Hamilton: C A^k B for k <= n-1 determine every higher term.
  const int depth = std::max<int>(0, static_cast<int>(sys.n()) - 1);
  const auto params = markov_parameters(sys, ch, depth);
  const std::size_t used = sys.n() == 0 ? 1 : params.size();
  for (std::size_t k = 0; k < used; ++k) {
    if (params[k].norm() > threshold) return false;
  }
  return true;
}

Eigen::MatrixXcd eval_transfer(const UncertainSystem& sys, Channel ch, std::complex<double> s) {
  const auto g = channel_realization(sys, ch);
  const Eigen::Index n = g.A.rows();
  Eigen::MatrixXcd D = g.D.cast<std::complex<double>>();
  if (n == 0) return D;
  Eigen::MatrixXcd M = s * Eigen::MatrixXcd::Identity(n, n) - g.A.cast<std::complex<double>>();
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(M);
  if (!(lu.rcond() > 1e-12)) {
    std::ostringstream os;
    os << "transfer " << to_string(ch) << " evaluated at a pole (s = " << s.real()
       << (s.imag() < 0 ? "" : "+") << s.imag() << "i)";
    throw PoleError(os.str());
  }
  return g.C.cast<std::complex<double>>() * lu.solve(g.B.cast<std::complex<double>>()) + D;
}

}  // namespace ukd
