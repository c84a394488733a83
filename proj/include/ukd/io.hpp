#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ukd/classify.hpp"
#include "ukd/model.hpp"
#include "ukd/reduce.hpp"
#include "ukd/riccati.hpp"

namespace ukd::io {

using nlohmann::json;

/// Contents of a system file.
///
/// Required keys "A", "B1", "B2", "C1", "D1", "C2", "D2" hold row-major
/// arrays of arrays of numbers. A matrix with zero columns is written as n
/// empty rows; a matrix with zero rows as []. Optional keys: "name"
/// (string), "d" (IQC bound, > 0) and "tol" (> 0, the rank/zero tolerance
/// appropriate for the precision of the data).
struct SystemFile {
  UncertainSystem system;
  std::string name;
  std::optional<IqcConstraint> iqc;
  std::optional<double> tol;
};

/// Throws ParseError (malformed JSON, missing key, wrong types) or
/// ValidationError (dimension / finiteness violations).
SystemFile parse_system(const std::string& text);
SystemFile parse_system_file(const std::string& path);

/// Full-precision (round-trip exact) serialisation.
json system_to_json(const UncertainSystem& sys, const std::string& name = {},
                    std::optional<double> d = std::nullopt);

/// Value rounded to 12 significant digits; -0 becomes 0.
double round12(double x);
std::string format12(double x);

json matrix_to_json(const MatrixXd& M, bool round = true);
json vector_to_json(const VectorXd& v, bool round = true);

json subspace_to_json(const Subspace& s);
json classification_to_json(const Classification& c);
json decomposition_to_json(const DecompositionResult& d);
json equivalence_to_json(const EquivalenceReport& r);
json w_value_to_json(const WValue& w);
json cross_check_to_json(const CrossCheckReport& r);

/// CSV with header T,lambda_min,lambda_max,status and LF line endings.
std::string sweep_to_csv(const std::vector<SweepRow>& rows);

/// "start:stop:step" (inclusive of stop within half a step) or a comma
/// separated list. Entries must be ascending. Throws ParameterError.
std::vector<double> parse_grid(const std::string& text);

/// Comma separated numbers.
VectorXd parse_vector(const std::string& text);

}  // namespace ukd::io
