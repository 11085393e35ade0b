#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "hvi/graph.hpp"
#include "hvi/solvers.hpp"
#include "hvi/superpotential.hpp"

namespace hvi {

/// Closed-form law in the combinatorial depth d of a node (for an edge, the
/// smaller depth of its endpoints).
struct WeightLaw {
  enum class Kind { constant, geometric, power };
  Kind kind = Kind::constant;
  double c = 1.0;
  /// ratio q for geometric (c q^d), exponent for power (c (1+d)^q)
  double q = 0.0;

  double operator()(std::size_t depth) const;
  static WeightLaw constant(double c) { return {Kind::constant, c, 0.0}; }
  static WeightLaw geometric(double c, double q) { return {Kind::geometric, c, q}; }
  static WeightLaw power(double c, double p) { return {Kind::power, c, p}; }
};

/// Parametrically infinite graph rooted at `root()`:
///   path        p0 - p1 - p2 - ...                      depth d
///   binary_tree t0.0 with children t{d+1}.{2i}, .{2i+1}   depth d
///   lattice_2d  l{x},{y} on Z^2, 4-neighbour             depth |x|+|y|
struct GraphGenerator {
  enum class Kind { path, binary_tree, lattice_2d };
  Kind kind = Kind::path;
  WeightLaw mu;
  WeightLaw rho;
  WeightLaw gamma;
  WeightLaw kappa;
  /// Guard against runaway truncations.
  std::size_t max_nodes = 2'000'000;

  NodeId root() const;
  /// Throws InputError when a law is non-positive on the depths it can reach.
  void validate() const;
};

/// Induced subgraph on the strict rho-ball B(root, r).
WeightedGraph truncate(const GraphGenerator& gen, double r);

/// Combinatorial depth of a generated node id.
std::size_t generated_depth(const GraphGenerator& gen, const NodeId& id);

struct ExhaustionTemplate {
  Superpotential sp;
  /// Load as a depth law; geometric with q = 0 is supported at the root only.
  WeightLaw f = WeightLaw::geometric(1.0, 0.0);
  SolverOptions options;
};

struct ExhaustionReport {
  std::vector<double> radii;
  std::vector<WeightedGraph> graphs;
  std::vector<SolveReport> solutions;
  /// ||phi_{i+1}|_{G_i} - phi_i||_W on the smaller truncation G_i.
  std::vector<double> increments;
  /// ||phi_i||_{l2(V,mu)} outside the previous ball (whole norm for i = 0).
  std::vector<double> tail_masses;
  bool converged = false;
  /// Set when a level failed to converge; the report stops at that level.
  std::string error;
};

/// Solves on each truncation, warm-starting from the zero extension of the
/// previous level's solution. Radii must be strictly increasing.
ExhaustionReport exhaust(const GraphGenerator& gen, const ExhaustionTemplate& problem, const std::vector<double>& radii,
                         double eps);

/// Restriction of phi (on `from`) to the nodes of `to`, zero where absent.
NodeFunction transfer(const WeightedGraph& from, const NodeFunction& phi, const WeightedGraph& to);

}  // namespace hvi
