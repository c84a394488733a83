#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ukd/model.hpp"
#include "ukd/subspaces.hpp"

namespace ukd {

/// Zero pattern of the two uncertainty-related transfer functions.
enum class CaseLabel {
  kCase1,  ///< G ≡ 0, H ≡ 0
  kCase2,  ///< G ≢ 0, H ≡ 0
  kCase3,  ///< G ≡ 0, H ≢ 0
  kCase4,  ///< G ≢ 0, H ≢ 0
};

const char* to_string(CaseLabel c);

CaseLabel select_case(const UncertainSystem& sys, double tol = kDefaultZeroTol);

/// Input/output channels of the full map (u, xi) -> (z, y).
enum class IoChannel { kUZ, kUY, kXiZ, kXiY };

const char* to_string(IoChannel c);

inline const std::vector<IoChannel> kAllChannels = {IoChannel::kUZ, IoChannel::kUY,
                                                    IoChannel::kXiZ, IoChannel::kXiY};

/// Output stack C and input stack B the Kalman decomposition is built on:
///   Case1 (C2, B1)   Case2 ([C1; C2], B1)   Case3 (C2, [B1 B2])   Case4 ([C1; C2], [B1 B2])
struct DecomposingTriple {
  MatrixXd C;
  MatrixXd B;
  std::string description;
  /// Channels the reduced model reproduces exactly.
  std::vector<IoChannel> preserved;
};

DecomposingTriple decomposing_triple(const UncertainSystem& sys, CaseLabel c);

struct DecompositionResult {
  CaseLabel case_label = CaseLabel::kCase4;
  std::string triple;
  FourBlockForm form;
  FourBlockResiduals residuals;
  std::vector<std::string> coupling_report;
  std::vector<std::string> warnings;
  std::optional<UncertainSystem> reduced;
  std::vector<Eigen::Index> kept_states;
  std::vector<IoChannel> preserved_channels;
};

/// Selects the case, decomposes the case's triple and keeps the
/// controllable-observable block.
DecompositionResult decompose(const UncertainSystem& sys, double tol = kDefaultRankTol);

struct EquivalenceReport {
  bool equivalent = false;
  double max_deviation = 0.0;
  double threshold = 0.0;
  int k_max = 0;
  struct Row {
    IoChannel channel;
    double deviation;
  };
  std::vector<Row> table;
};

/// Compares D and C A^k B (k = 0..k_max) of the selected channels.
/// equivalent iff max deviation <= tol * (1 + scale(original)).
/// k_max < 0 selects 2n of the original. Throws DomainError when the
/// interfaces (m, r, h, l) differ.
EquivalenceReport verify_io_equivalence(const UncertainSystem& original,
                                        const UncertainSystem& reduced, int k_max, double tol,
                                        const std::vector<IoChannel>& channels = kAllChannels);

}  // namespace ukd
