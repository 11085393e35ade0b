#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace hvi {

enum class Command { validate, certify, solve_elliptic, solve_parabolic, verify, exhaust };
enum class ReportFormat { human, machine };

/// Exit codes of `run`.
inline constexpr int kExitOk = 0;
inline constexpr int kExitNoConvergence = 1;
inline constexpr int kExitInputError = 2;

struct RunConfig {
  Command command = Command::validate;
  /// Graph file; for `exhaust`, the generator spec file.
  std::optional<std::filesystem::path> graph;
  std::optional<std::filesystem::path> problem;
  /// `verify` only: a node map {id: value} or a document with a "phi" map.
  std::optional<std::filesystem::path> solution;
  /// Report destination; stdout when absent.
  std::optional<std::filesystem::path> out;
  std::optional<double> tol;
  std::vector<double> radii;
  std::optional<double> eps;
  ReportFormat format = ReportFormat::human;
};

std::optional<Command> parse_command(const std::string& name);
const char* command_name(Command c);

struct RunResult {
  int status = kExitOk;
  /// Report text as written to `out` (or to be printed).
  std::string report;
  /// Input-error message for stderr; empty on success.
  std::string error;
};

/// Loads and checks every referenced file first, then dispatches. Never throws
/// for bad input: those become kExitInputError with a message.
RunResult run(const RunConfig& config);

}  // namespace hvi
