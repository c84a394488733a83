#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ukd::cli {

enum class Command { kAnalyze, kClassifyState, kDecompose, kReduce, kRiccatiSweep, kOracleCheck };

const char* to_string(Command c);

/// Parsed command line. Unset knobs fall back to per-command defaults.
struct RunConfig {
  Command command = Command::kAnalyze;
  std::string system_path;
  std::optional<std::string> output_path;
  std::optional<std::string> reduced_output_path;
  std::optional<double> tau;
  std::optional<double> eps;
  std::optional<double> horizon;
  std::optional<int> steps;
  std::optional<double> tol;
  std::optional<std::string> tau_grid;
  std::optional<std::string> T_grid;
  std::optional<std::string> x0;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;

/// Runs one command. Reports go to `out` unless an output path is set;
/// diagnostics go to `err`.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Parses argv (argv[0] is the program name) and runs the command.
int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ukd::cli
