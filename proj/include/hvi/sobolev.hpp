#pragma once

#include <cstddef>
#include <limits>

#include "hvi/graph.hpp"

namespace hvi {

inline constexpr double kInfinityNorm = std::numeric_limits<double>::infinity();

/// (I^T phi)(e) = phi(e.dst) - phi(e.src).
EdgeFunction difference(const WeightedGraph& g, const NodeFunction& phi);

/// (sum_v |phi(v)|^p mu(v))^(1/p). For p = kInfinityNorm this is
/// sup_v |phi(v)| mu(v): the weight stays inside the sup, which is not the
/// usual unweighted sup norm.
double lp_norm_nodes(const WeightedGraph& g, const NodeFunction& phi, double p);
/// Same over all directed edges with weight rho.
double lp_norm_edges(const WeightedGraph& g, const EdgeFunction& psi, double p);

/// <phi, psi>_{rho,mu} = sum mu phi psi + sum_e rho (I^T phi)(I^T psi).
double sobolev_inner(const WeightedGraph& g, const NodeFunction& phi, const NodeFunction& psi);
/// sqrt(sobolev_inner(phi, phi)); the norm used by all solver stopping rules.
double w_hilbert_norm(const WeightedGraph& g, const NodeFunction& phi);

struct SobolevNormReport {
  double l2_node = 0.0;    ///< ||phi||_{l2(V,mu)}
  double l2_edge = 0.0;    ///< ||I^T phi||_{l2(E,rho)}
  double w_sum = 0.0;      ///< l2_node + l2_edge
  double w_hilbert = 0.0;  ///< sqrt(l2_node^2 + l2_edge^2)
};

SobolevNormReport sobolev_norms(const WeightedGraph& g, const NodeFunction& phi);

struct EmbeddingDiagnostics {
  bool ball_finite = true;
  std::size_t ball_size = 0;
  /// (sum_{w outside B(center, r)} |phi(w)|^2 mu(w))^(1/2)
  double tail_mass = 0.0;
};

EmbeddingDiagnostics embedding_diagnostics(const WeightedGraph& g, const NodeId& center, double r,
                                           const NodeFunction& phi);

}  // namespace hvi
