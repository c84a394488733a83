#include "ukd/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "ukd/error.hpp"

namespace ukd::io {

namespace {

constexpr const char* kMatrixKeys[] = {"A", "B1", "B2", "C1", "D1", "C2", "D2"};

struct RawMatrix {
  std::vector<std::vector<double>> rows;
  Eigen::Index cols() const { return rows.empty() ? -1 : static_cast<Eigen::Index>(rows[0].size()); }
};

RawMatrix read_raw(const json& doc, const char* key) {
  if (!doc.contains(key)) throw ParseError(std::string("missing required key \"") + key + "\"");
  const json& v = doc.at(key);
  if (!v.is_array()) throw ParseError(std::string("\"") + key + "\" must be an array of rows");
  RawMatrix raw;
  for (const json& row : v) {
    if (!row.is_array()) {
      throw ParseError(std::string("\"") + key + "\" must be an array of arrays of numbers");
    }
    std::vector<double> r;
    for (const json& x : row) {
      if (!x.is_number()) throw ParseError(std::string("\"") + key + "\" contains a non-number");
      r.push_back(x.get<double>());
    }
    if (!raw.rows.empty() && r.size() != raw.rows[0].size()) {
      throw ParseError(std::string("\"") + key + "\" has rows of different lengths");
    }
    raw.rows.push_back(std::move(r));
  }
  return raw;
}

MatrixXd to_matrix(const RawMatrix& raw, Eigen::Index cols_if_empty) {
  if (raw.rows.empty()) return MatrixXd(0, std::max<Eigen::Index>(0, cols_if_empty));
  MatrixXd M(static_cast<Eigen::Index>(raw.rows.size()), raw.cols());
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) M(i, j) = raw.rows[i][j];
  }
  return M;
}

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x == 0.0 ? 0.0 : x);
  return buf;
}

}  // namespace

double round12(double x) {
  if (!std::isfinite(x)) return x;
  return std::strtod(num(x).c_str(), nullptr);
}

std::string format12(double x) { return num(x); }

SystemFile parse_system(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed system JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("system JSON must be an object");

  std::vector<RawMatrix> raw;
  for (const char* key : kMatrixKeys) raw.push_back(read_raw(doc, key));
  const RawMatrix& A = raw[0];
  const Eigen::Index n = static_cast<Eigen::Index>(A.rows.size());
  const auto cols_or = [](const RawMatrix& a, const RawMatrix& b) -> Eigen::Index {
    if (a.cols() >= 0) return a.cols();
    if (b.cols() >= 0) return b.cols();
    return 0;
  };
  const Eigen::Index m = cols_or(raw[1], raw[4]);
  const Eigen::Index r = cols_or(raw[2], raw[6]);

  SystemFile out;
  UncertainSystem& s = out.system;
  s.A = to_matrix(raw[0], n);
  s.B1 = to_matrix(raw[1], m);
  s.B2 = to_matrix(raw[2], r);
  s.C1 = to_matrix(raw[3], n);
  s.D1 = to_matrix(raw[4], m);
  s.C2 = to_matrix(raw[5], n);
  s.D2 = to_matrix(raw[6], r);

  if (doc.contains("name")) {
    if (!doc["name"].is_string()) throw ParseError("\"name\" must be a string");
    out.name = doc["name"].get<std::string>();
  }
  if (doc.contains("d")) {
    if (!doc["d"].is_number() || !(doc["d"].get<double>() > 0.0)) {
      throw ParseError("\"d\" must be a number > 0");
    }
    out.iqc = IqcConstraint{doc["d"].get<double>(), 1.0};
  }
  if (doc.contains("tol")) {
    if (!doc["tol"].is_number() || !(doc["tol"].get<double>() > 0.0)) {
      throw ParseError("\"tol\" must be a number > 0");
    }
    out.tol = doc["tol"].get<double>();
  }

  const auto violations = validate(s);
  if (!violations.empty()) {
    std::vector<std::string> msgs;
    std::string what = "invalid system:";
    for (const auto& v : violations) {
      msgs.push_back(v.message);
      what += " " + v.message + ";";
    }
    throw ValidationError(what, std::move(msgs));
  }
  return out;
}

SystemFile parse_system_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read system file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_system(buf.str());
}

json matrix_to_json(const MatrixXd& M, bool round) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      const double x = M(i, j) == 0.0 ? 0.0 : M(i, j);
      row.push_back(round ? round12(x) : x);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const VectorXd& v, bool round) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(round ? round12(v(i)) : v(i));
  return out;
}

json system_to_json(const UncertainSystem& sys, const std::string& name, std::optional<double> d) {
  json j;
  j["A"] = matrix_to_json(sys.A, false);
  j["B1"] = matrix_to_json(sys.B1, false);
  j["B2"] = matrix_to_json(sys.B2, false);
  j["C1"] = matrix_to_json(sys.C1, false);
  j["D1"] = matrix_to_json(sys.D1, false);
  j["C2"] = matrix_to_json(sys.C2, false);
  j["D2"] = matrix_to_json(sys.D2, false);
  if (!name.empty()) j["name"] = name;
  if (d) j["d"] = *d;
  return j;
}

json subspace_to_json(const Subspace& s) {
  return {{"dim", s.dim()}, {"ambient_dim", s.ambient_dim()}, {"basis", matrix_to_json(s.basis())}};
}

json classification_to_json(const Classification& c) {
  return {{"possibly_controllable", subspace_to_json(c.possibly_controllable)},
          {"robustly_unobservable", subspace_to_json(c.robustly_unobservable)},
          {"h_is_zero", c.h_is_zero},
          {"g_is_zero", c.g_is_zero},
          {"theorem_trail", c.theorem_trail}};
}

namespace {

json reduced_json(const UncertainSystem& s) {
  return {{"A", matrix_to_json(s.A)},   {"B1", matrix_to_json(s.B1)}, {"B2", matrix_to_json(s.B2)},
          {"C1", matrix_to_json(s.C1)}, {"D1", matrix_to_json(s.D1)}, {"C2", matrix_to_json(s.C2)},
          {"D2", matrix_to_json(s.D2)}};
}

json channels_json(const std::vector<IoChannel>& chs) {
  json out = json::array();
  for (IoChannel c : chs) out.push_back(to_string(c));
  return out;
}

}  // namespace

json decomposition_to_json(const DecompositionResult& d) {
  json j;
  j["case"] = to_string(d.case_label);
  j["triple"] = d.triple;
  j["dims"] = {{"co", d.form.dims[0]},
               {"c_unobs", d.form.dims[1]},
               {"unc_obs", d.form.dims[2]},
               {"unc_unobs", d.form.dims[3]}};
  j["Tmat"] = matrix_to_json(d.form.Tmat);
  j["transformed"] = reduced_json(d.form.transformed);
  j["kept_states"] = d.kept_states;
  j["reduced"] = d.reduced ? reduced_json(*d.reduced) : json(nullptr);
  j["coupling_report"] = d.coupling_report;
  j["warnings"] = d.warnings;
  j["preserved_channels"] = channels_json(d.preserved_channels);
  j["residuals"] = {{"input", round12(d.residuals.input)},
                    {"output", round12(d.residuals.output)},
                    {"output_unc_unobs", round12(d.residuals.output_unc_unobs)},
                    {"dynamics", round12(d.residuals.dynamics)}};
  return j;
}

json equivalence_to_json(const EquivalenceReport& r) {
  json table = json::array();
  for (const auto& row : r.table) {
    table.push_back({{"channel", to_string(row.channel)}, {"deviation", round12(row.deviation)}});
  }
  return {{"equivalent", r.equivalent},
          {"max_deviation", round12(r.max_deviation)},
          {"threshold", round12(r.threshold)},
          {"k_max", r.k_max},
          {"channels", table}};
}

json w_value_to_json(const WValue& w) {
  return {{"finite", w.finite},
          {"value", w.finite ? json(round12(w.value)) : json(nullptr)},
          {"outside_theorem", w.outside_theorem}};
}

json cross_check_to_json(const CrossCheckReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"T", round12(row.T)}, {"w", w_value_to_json(row.w)}, {"consistent", row.consistent}});
  }
  return {{"geometric_possibly_controllable", r.geometric_possibly_controllable},
          {"consistent", r.consistent},
          {"rows", rows}};
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  std::string out = "T,lambda_min,lambda_max,status\n";
  for (const auto& row : rows) {
    out += num(row.T) + ",";
    if (row.completed) {
      out += num(row.lambda_min) + "," + num(row.lambda_max) + ",completed\n";
    } else {
      out += ",,escaped\n";
    }
  }
  return out;
}

namespace {

double parse_number(const std::string& tok) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(tok, &used);
  } catch (const std::exception&) {
    throw ParameterError("not a number: \"" + tok + "\"");
  }
  while (used < tok.size() && std::isspace(static_cast<unsigned char>(tok[used]))) ++used;
  if (used != tok.size() || !std::isfinite(x)) throw ParameterError("not a number: \"" + tok + "\"");
  return x;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  if (text.find(':') != std::string::npos) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) throw ParameterError("grid must be start:stop:step");
    const double start = parse_number(parts[0]);
    const double stop = parse_number(parts[1]);
    const double step = parse_number(parts[2]);
    if (!(step > 0.0)) throw ParameterError("grid step must be > 0");
    if (stop < start) throw ParameterError("grid stop must be >= start");
    const long count = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
    if (count > 1000000) throw ParameterError("grid too large");
    for (long i = 0; i < count; ++i) grid.push_back(round12(start + i * step));
  } else {
    for (const auto& tok : split(text, ',')) grid.push_back(parse_number(tok));
  }
  if (grid.empty()) throw ParameterError("grid is empty");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw ParameterError("grid must be strictly ascending");
  }
  return grid;
}

VectorXd parse_vector(const std::string& text) {
  const auto toks = split(text, ',');
  if (toks.empty()) throw ParameterError("empty vector");
  VectorXd v(static_cast<Eigen::Index>(toks.size()));
  for (std::size_t i = 0; i < toks.size(); ++i) v(static_cast<Eigen::Index>(i)) = parse_number(toks[i]);
  return v;
}

}  // namespace ukd::io
