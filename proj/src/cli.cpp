#include "ukd/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "ukd/classify.hpp"
#include "ukd/error.hpp"
#include "ukd/io.hpp"
#include "ukd/oracle.hpp"
#include "ukd/reduce.hpp"
#include "ukd/riccati.hpp"
#include "ukd/subspaces.hpp"

namespace ukd::cli {

using io::json;

const char* to_string(Command c) {
  switch (c) {
    case Command::kAnalyze: return "analyze";
    case Command::kClassifyState: return "classify-state";
    case Command::kDecompose: return "decompose";
    case Command::kReduce: return "reduce";
    case Command::kRiccatiSweep: return "riccati-sweep";
    case Command::kOracleCheck: return "oracle-check";
  }
  return "?";
}

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr const char* kUnobservabilityNote =
    "robustly_unobservable assumes some multiplier keeps the worst-case output problem "
    "bounded; this is not checked";

// Knobs after defaults and validation.
struct Knobs {
  double tol = kDefaultRankTol;
  double tau = 1.0;
  double eps = 0.1;
  double horizon = 0.5;
  int steps = 0;
  std::vector<double> T_grid;
  std::vector<double> tau_grid;
  VectorXd x0;
};

double positive(const std::optional<double>& v, double fallback, const char* flag) {
  if (!v) return fallback;
  if (!(*v > 0.0)) throw UsageError(std::string(flag) + " must be > 0");
  return *v;
}

std::vector<double> grid_or(const std::optional<std::string>& text, const char* fallback,
                            const char* flag) {
  try {
    const auto g = io::parse_grid(text ? *text : fallback);
    if (g.front() <= 0.0) throw UsageError(std::string(flag) + " entries must be > 0");
    return g;
  } catch (const ParameterError& e) {
    throw UsageError(std::string(flag) + ": " + e.what());
  }
}

Knobs resolve(const RunConfig& cfg, const io::SystemFile& file) {
  Knobs k;
  k.tol = positive(cfg.tol, file.tol.value_or(kDefaultRankTol), "--tol");
  k.tau = positive(cfg.tau, 1.0, "--tau");
  k.eps = positive(cfg.eps, 0.1, "--eps");
  k.horizon = positive(cfg.horizon, 0.5, "--horizon");
  if (cfg.steps && *cfg.steps < 1) throw UsageError("--steps must be >= 1");

  switch (cfg.command) {
    case Command::kClassifyState:
      k.steps = cfg.steps.value_or(2000);
      k.T_grid = grid_or(cfg.T_grid, "0.25:1:0.25", "--T-grid");
      break;
    case Command::kRiccatiSweep:
      k.steps = cfg.steps.value_or(2000);
      k.T_grid = grid_or(cfg.T_grid, "0.05:1:0.05", "--T-grid");
      break;
    case Command::kOracleCheck:
      k.steps = cfg.steps.value_or(400);
      if (k.steps < 16) throw UsageError("--steps must be >= 16 for oracle-check");
      break;
    default:
      break;
  }
  if (cfg.tau_grid) k.tau_grid = grid_or(cfg.tau_grid, "", "--tau-grid");

  if (cfg.x0) {
    try {
      k.x0 = io::parse_vector(*cfg.x0);
    } catch (const ParameterError& e) {
      throw UsageError(std::string("--x0: ") + e.what());
    }
  } else if (cfg.command == Command::kClassifyState) {
    throw UsageError("classify-state requires --x0");
  } else if (cfg.command == Command::kOracleCheck) {
    k.x0 = VectorXd::Ones(file.system.n());
  }
  return k;
}

bool full_rank_pair(const MatrixXd& A, const MatrixXd& B, double tol) {
  return controllable_subspace(A, B, tol).dim() == A.rows();
}

bool observable_pair(const MatrixXd& C, const MatrixXd& A, double tol) {
  return unobservable_subspace(C, A, tol).dim() == 0;
}

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

json analyze(const io::SystemFile& file, const Knobs& k) {
  const UncertainSystem& sys = file.system;
  const Classification c = classify(sys, k.tol);
  const DecompositionResult d = decompose(sys, k.tol);

  json j;
  j["name"] = file.name;
  j["dims"] = {{"n", sys.n()}, {"m", sys.m()}, {"r", sys.r()}, {"h", sys.h()}, {"l", sys.l()}};
  j["tol"] = io::round12(k.tol);
  j["case"] = to_string(d.case_label);
  j["classification"] = io::classification_to_json(c);
  j["pairs"] = {
      {"A_B1_controllable", full_rank_pair(sys.A, sys.B1, k.tol)},
      {"A_B1B2_controllable", full_rank_pair(sys.A, hstack(sys.B1, sys.B2), k.tol)},
      {"C2_A_observable", observable_pair(sys.C2, sys.A, k.tol)},
      {"C1C2_A_observable", observable_pair(vstack(sys.C1, sys.C2), sys.A, k.tol)},
  };
  j["reduction"] = {{"available", d.reduced.has_value()},
                    {"triple", d.triple},
                    {"kept_states", d.form.dims[0]},
                    {"removed_states", sys.n() - d.form.dims[0]}};
  j["notes"] = json::array({kUnobservabilityNote});
  if (file.iqc) j["iqc_d"] = io::round12(file.iqc->d);
  return j;
}

json classify_state(const io::SystemFile& file, const Knobs& k) {
  const UncertainSystem& sys = file.system;
  if (k.x0.size() != sys.n()) {
    throw DomainError("--x0 has " + std::to_string(k.x0.size()) + " entries, system has n = " +
                      std::to_string(sys.n()));
  }
  const double rank_tol = std::max(k.tol, kDefaultWRankTol);
  json j;
  j["x0"] = io::vector_to_json(k.x0);
  j["tol"] = io::round12(k.tol);
  j["possibly_controllable"] = is_possibly_controllable(sys, k.x0, k.tol);
  j["robustly_unobservable"] = is_robustly_unobservable(sys, k.x0, k.tol);
  j["tau"] = io::round12(k.tau);
  j["cross_check"] = io::cross_check_to_json(
      numeric_cross_check(sys, k.x0, k.tau, k.T_grid, k.steps, rank_tol));
  if (!k.tau_grid.empty()) {
    const SupW s = sup_w_tau(sys, k.x0, k.T_grid.back(), k.tau_grid,
                             default_rde_steps(k.T_grid.back()), rank_tol,
                             file.iqc ? std::optional<double>(file.iqc->d) : std::nullopt);
    json pts = json::array();
    for (const auto& p : s.points) {
      pts.push_back({{"tau", io::round12(p.tau)}, {"w", io::w_value_to_json(p.w)}});
    }
    json sup = {{"T", io::round12(k.T_grid.back())},
                {"finite", s.finite},
                {"value", s.finite ? json(io::round12(s.value)) : json(nullptr)},
                {"points", pts}};
    if (s.finite) sup["argmax_tau"] = io::round12(s.argmax_tau);
    else sup["infinite_tau"] = io::round12(s.infinite_tau);
    if (s.lc_estimate) sup["lc_estimate"] = io::round12(*s.lc_estimate);
    j["sup_w_tau"] = sup;
  }
  j["notes"] = json::array({kUnobservabilityNote});
  return j;
}

std::optional<EquivalenceReport> equivalence(const UncertainSystem& sys,
                                             const DecompositionResult& d, double tol) {
  if (!d.reduced) return std::nullopt;
  return verify_io_equivalence(sys, *d.reduced, -1, std::max(tol, 1e-6), d.preserved_channels);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path);
  f << text;
  if (!f) throw Error("write failed: " + path);
}

json decompose_report(const io::SystemFile& file, const Knobs& k, const RunConfig& cfg,
                      bool reduce_view) {
  const UncertainSystem& sys = file.system;
  const DecompositionResult d = decompose(sys, k.tol);
  const auto eq = equivalence(sys, d, k.tol);

  if (cfg.reduced_output_path) {
    if (!d.reduced) throw DomainError("no states can be removed; no reduced system written");
    write_text(*cfg.reduced_output_path,
               io::system_to_json(*d.reduced, file.name.empty() ? "reduced" : file.name + "_reduced")
                       .dump(2) +
                   "\n");
  }

  json j;
  if (reduce_view) {
    j["case"] = to_string(d.case_label);
    j["triple"] = d.triple;
    j["original_states"] = sys.n();
    j["kept_states"] = d.form.dims[0];
    j["nothing_deletable"] = !d.reduced.has_value();
    j["reduced"] = d.reduced ? io::system_to_json(*d.reduced) : json(nullptr);
    j["warnings"] = d.warnings;
    json chans = json::array();
    for (IoChannel c : d.preserved_channels) chans.push_back(to_string(c));
    j["preserved_channels"] = chans;
  } else {
    j = io::decomposition_to_json(d);
  }
  j["tol"] = io::round12(k.tol);
  j["equivalence"] = eq ? io::equivalence_to_json(*eq) : json(nullptr);
  return j;
}

std::string oracle_check(const io::SystemFile& file, const Knobs& k) {
  const UncertainSystem& sys = file.system;
  if (k.x0.size() != sys.n()) {
    throw DomainError("--x0 has " + std::to_string(k.x0.size()) + " entries, system has n = " +
                      std::to_string(sys.n()));
  }
  RdeParams p;
  p.tau = k.tau;
  p.eps = k.eps;
  p.T = k.horizon;
  p.steps = default_rde_steps(k.horizon);

  std::string riccati;
  double reference = 0.0;
  bool have_reference = false;
  try {
    reference = w_eps_tau(sys, k.x0, p);
    have_reference = true;
    riccati = io::format12(reference);
  } catch (const NoSolutionError&) {
    riccati = "escaped";
  }

  std::string csv = "N,oracle,riccati,rel_diff\n";
  for (int N : {k.steps / 8, k.steps / 4, k.steps / 2, k.steps}) {
    LqDiscretization disc;
    disc.steps = N;
    disc.horizon = k.horizon;
    const LqResult r = lq_solve(sys, k.x0, k.tau, k.eps, disc);
    csv += std::to_string(N) + ",";
    if (!r.bounded) {
      csv += "unbounded," + riccati + ",\n";
      continue;
    }
    csv += io::format12(r.value) + "," + riccati + ",";
    if (have_reference) {
      csv += io::format12(std::abs(r.value - reference) / std::max(1.0, std::abs(reference)));
    }
    csv += "\n";
  }
  return csv;
}

}  // namespace

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    const io::SystemFile file = io::parse_system_file(cfg.system_path);
    const Knobs k = resolve(cfg, file);

    std::string text;
    switch (cfg.command) {
      case Command::kAnalyze: text = analyze(file, k).dump(2) + "\n"; break;
      case Command::kClassifyState: text = classify_state(file, k).dump(2) + "\n"; break;
      case Command::kDecompose: text = decompose_report(file, k, cfg, false).dump(2) + "\n"; break;
      case Command::kReduce: text = decompose_report(file, k, cfg, true).dump(2) + "\n"; break;
      case Command::kRiccatiSweep:
        text = io::sweep_to_csv(eig_sweep(file.system, k.tau, k.T_grid, k.steps));
        break;
      case Command::kOracleCheck: text = oracle_check(file, k); break;
    }
    if (cfg.output_path) {
      write_text(*cfg.output_path, text);
    } else {
      out << text;
    }
    return kExitOk;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ValidationError& e) {
    err << "error: invalid system\n";
    for (const auto& v : e.violations()) err << "  " << v << "\n";
    return kExitDomain;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomain;
  }
}

int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Possible controllability and model reduction for uncertain linear systems"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string out_path, reduced_out, tau_grid, T_grid, x0;
  double tau = 0.0, eps = 0.0, horizon = 0.0, tol = 0.0;
  int steps = 0;

  struct Sub {
    Command command;
    const char* help;
  };
  const Sub subs[] = {
      {Command::kAnalyze, "classification, case and reduction availability (JSON)"},
      {Command::kClassifyState, "membership of --x0 plus Riccati cross-check (JSON)"},
      {Command::kDecompose, "four-block decomposition (JSON)"},
      {Command::kReduce, "reduced model and equivalence report (JSON)"},
      {Command::kRiccatiSweep, "eigenvalues of S_tau(0) over --T-grid (CSV)"},
      {Command::kOracleCheck, "brute-force LQ oracle against the Riccati value (CSV)"},
  };
  std::vector<std::pair<Command, CLI::App*>> parsed;
  std::vector<CLI::Option*> opts;
  for (const Sub& s : subs) {
    CLI::App* sub = app.add_subcommand(to_string(s.command), s.help);
    sub->add_option("--system", cfg.system_path, "system JSON file")->required();
    sub->add_option("--out", out_path, "write the report here instead of stdout");
    sub->add_option("--tau", tau, "multiplier tau");
    sub->add_option("--eps", eps, "terminal weight epsilon");
    sub->add_option("--horizon", horizon, "horizon T for oracle-check");
    sub->add_option("--steps", steps, "steps per unit horizon (sweeps) or largest N (oracle)");
    sub->add_option("--tol", tol, "rank / zero tolerance");
    sub->add_option("--tau-grid", tau_grid, "start:stop:step or comma list");
    sub->add_option("--T-grid", T_grid, "start:stop:step or comma list");
    sub->add_option("--x0", x0, "comma separated initial state");
    if (s.command == Command::kDecompose || s.command == Command::kReduce) {
      sub->add_option("--reduced-out", reduced_out, "write the reduced system JSON here");
    }
    parsed.emplace_back(s.command, sub);
  }

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();
  try {
    app.parse(rev);
  } catch (const CLI::Success& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  for (const auto& [command, sub] : parsed) {
    if (!sub->parsed()) continue;
    cfg.command = command;
    const auto given = [&](const char* name) { return sub->count(name) > 0; };
    if (given("--out")) cfg.output_path = out_path;
    if (command == Command::kDecompose || command == Command::kReduce) {
      if (given("--reduced-out")) cfg.reduced_output_path = reduced_out;
    }
    if (given("--tau")) cfg.tau = tau;
    if (given("--eps")) cfg.eps = eps;
    if (given("--horizon")) cfg.horizon = horizon;
    if (given("--steps")) cfg.steps = steps;
    if (given("--tol")) cfg.tol = tol;
    if (given("--tau-grid")) cfg.tau_grid = tau_grid;
    if (given("--T-grid")) cfg.T_grid = T_grid;
    if (given("--x0")) cfg.x0 = x0;
  }
  return run(cfg, out, err);
}

}  // namespace ukd::cli
