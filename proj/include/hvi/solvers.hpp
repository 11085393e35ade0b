#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "hvi/graph.hpp"
#include "hvi/operators.hpp"
#include "hvi/superpotential.hpp"

namespace hvi {

/// L phi + dJ(phi) ∋ f on a finite weighted graph.
struct EllipticProblem {
  WeightedGraph graph;
  Superpotential sp;
  NodeFunction f;
};

/// phi' + L phi + dJ(phi) ∋ f on (0, T], phi(0) = phi0, uniform steps.
struct ParabolicProblem {
  WeightedGraph graph;
  SuperpotentialSchedule schedule;
  /// One load per step (value on ((k-1)tau, k tau]), or a single constant load.
  std::vector<NodeFunction> f_table;
  NodeFunction phi0;
  double T = 1.0;
  std::size_t steps = 1;

  double tau() const { return T / static_cast<double>(steps); }
  const NodeFunction& load(std::size_t step) const { return f_table.size() == 1 ? f_table[0] : f_table[step - 1]; }
  /// Throws InputError on inconsistent sizes or non-positive T/steps.
  void validate() const;
};

enum class Strategy { semismooth_newton, picard };

/// Geometric ramp widths 1e-1, 1e-2, ..., 1e-6.
std::vector<double> default_h_schedule();

struct SolverOptions {
  /// Stopping threshold on the l2(V,mu) norm of the inclusion residual.
  double tol = 1e-8;
  /// Ramp widths for continuation; clipped below half the breakpoint gap.
  std::vector<double> h_schedule = default_h_schedule();
  /// Active-set rounds of the exact (unregularized) polish.
  std::size_t max_outer = 50;
  /// Newton/Picard iterations per continuation level and per polish round.
  std::size_t max_inner = 200;
  Strategy strategy = Strategy::semismooth_newton;
  /// Relative tolerance of every inner linear solve.
  double linear_tol = 1e-13;
  std::optional<NodeFunction> initial;
  /// Attach existence/uniqueness certificates to the report.
  bool certify = true;
  /// Certification range R; <= 0 picks one from the data and the solution.
  double certify_range = 0.0;
};

struct TraceEntry {
  std::string phase;  ///< "continuation" or "polish"
  double h = 0.0;     ///< ramp width (0 for the exact polish)
  std::size_t steps = 0;
  double residual = 0.0;
};

struct Certificate {
  enum class Kind { existence_smallness, uniqueness };
  Kind kind = Kind::existence_smallness;
  bool satisfied = false;
  double lhs = 0.0;
  double rhs = 0.0;
  std::string note;
};

const char* to_string(Certificate::Kind k);

struct SolveReport {
  NodeFunction phi;
  /// Selected subgradient: projection of f - L phi onto [beta_lo, beta_hi](phi).
  NodeFunction xi;
  NodeFunction inclusion_residual;
  double residual_norm = 0.0;
  bool converged = false;
  std::vector<TraceEntry> iterations;
  std::vector<Certificate> certificates;
  std::vector<std::string> warnings;
};

/// J(phi) = sum_v mu(v) j(phi(v)).
double sum_functional(const WeightedGraph& g, const Superpotential& sp, const NodeFunction& phi);

/// sum_v mu(v) j°(phi(v); psi(v)), an upper bound for J°(phi; psi) that is
/// exact for piecewise-polynomial densities.
double sum_directional_bound(const WeightedGraph& g, const Superpotential& sp, const NodeFunction& phi,
                             const NodeFunction& psi);

/// residual(v) = dist(f(v) - (L phi)(v), [beta_lo(phi(v)), beta_hi(phi(v))]).
NodeFunction verify_inclusion(const WeightedGraph& g, const Superpotential& sp, const NodeFunction& phi,
                              const NodeFunction& f);

/// ||r||_{l2(V,mu)}.
double residual_norm(const WeightedGraph& g, const NodeFunction& r);

/// For each test psi: <L phi - f, psi - phi>_mu + sum mu j°(phi; psi - phi).
/// Evaluated in parallel over the test set.
std::vector<double> hvi_residual(const WeightedGraph& g, const Superpotential& sp, const NodeFunction& phi,
                                 const NodeFunction& f, const std::vector<NodeFunction>& tests);

/// E(phi) = 1/2 a(phi, phi) + J(phi) - <f, phi>_mu.
double energy(const WeightedGraph& g, const Superpotential& sp, const NodeFunction& f, const NodeFunction& phi);

/// Ramp-regularized continuation (damped semismooth Newton with Levenberg
/// shift, Picard fallback) followed by an exact active-set polish on the
/// unregularized inclusion. Non-convergence is reported, not thrown.
SolveReport solve_elliptic(const EllipticProblem& p, const SolverOptions& opts = {});

/// A-priori certification range from |f|, the density near 0 and kappa/mu.
double default_certify_range(const EllipticProblem& p);

/// Existence-smallness and uniqueness certificates on [-R, R]; advisory.
std::vector<Certificate> certify(const EllipticProblem& p, double R);

struct ParabolicReport {
  double tau = 0.0;
  /// phi^0 .. phi^K; shorter when a step failed.
  std::vector<NodeFunction> trajectory;
  /// Report of the elliptic solve of each step k = 1..K.
  std::vector<SolveReport> steps;
  bool converged = false;
  std::vector<Certificate> certificates;
};

/// Implicit Euler: M (phi^k - phi^{k-1}) / tau + (K + C) phi^k + M xi^k = M f^k,
/// xi^k ∈ d j(phi^k), each step an elliptic solve with kappa + mu/tau.
ParabolicReport solve_parabolic(const ParabolicProblem& p, const SolverOptions& opts = {});

}  // namespace hvi
