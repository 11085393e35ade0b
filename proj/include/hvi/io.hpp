#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "hvi/exhaustion.hpp"
#include "hvi/graph.hpp"
#include "hvi/solvers.hpp"
#include "hvi/superpotential.hpp"
#include "json.hpp"

namespace hvi {

inline constexpr int kSchemaVersion = 1;

/// Parsed problem file. Relative paths resolve against the file's directory.
struct ProblemFile {
  WeightedGraph graph;
  Superpotential sp;
  NodeFunction f;
  std::optional<ParabolicProblem> parabolic;
  SolverOptions solver;
};

/// Node map {id: value} -> NodeFunction; absent nodes get `fill`, unknown ids throw.
NodeFunction parse_node_map(const WeightedGraph& g, const nlohmann::json& doc, const char* what, double fill = 0.0);
nlohmann::json node_map(const WeightedGraph& g, const NodeFunction& phi);

ProblemFile parse_problem(const nlohmann::json& doc, const std::filesystem::path& base_dir);
ProblemFile load_problem_file(const std::filesystem::path& path);
void apply_solver_section(const nlohmann::json& doc, SolverOptions& opts);

WeightLaw parse_weight_law(const nlohmann::json& doc);
nlohmann::json weight_law_to_json(const WeightLaw& w);

struct GeneratorFile {
  GraphGenerator generator;
  WeightLaw f = WeightLaw::geometric(1.0, 0.0);
};
GeneratorFile parse_generator(const nlohmann::json& doc);
GeneratorFile load_generator_file(const std::filesystem::path& path);

nlohmann::json read_json_file(const std::filesystem::path& path);

/// Deterministic text: sorted keys, floats with 17 significant digits,
/// non-finite floats as the strings "inf", "-inf", "nan".
std::string to_machine_text(const nlohmann::json& doc);
/// Indented key/value rendering for people.
std::string to_human_text(const nlohmann::json& doc);

/// Writes via a temporary file in the same directory and a rename.
void write_atomic(const std::filesystem::path& path, const std::string& content);

nlohmann::json constants_to_json(const OperatorConstants& c);
nlohmann::json certificates_to_json(const std::vector<Certificate>& certs);
nlohmann::json solve_report_to_json(const WeightedGraph& g, const SolveReport& r);

}  // namespace hvi
