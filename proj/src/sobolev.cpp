#include "hvi/sobolev.hpp"

#include <algorithm>
#include <cmath>

#include "hvi/kernels.hpp"

namespace hvi {

namespace {

double weighted_lp(std::span<const double> x, std::span<const double> w, double p) {
  if (std::isnan(p) || p < 1.0) throw std::invalid_argument("p must be >= 1 or infinity");
  if (std::isinf(p)) {
    double m = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i]) * w[i]);
    return m;
  }
  if (p == 2.0) return std::sqrt(kernels::parallel::weighted_dot(w, x, x));
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += std::pow(std::abs(x[i]), p) * w[i];
  return std::pow(s, 1.0 / p);
}

}  // namespace

EdgeFunction difference(const WeightedGraph& g, const NodeFunction& phi) {
  require_on(g, phi, "phi");
  EdgeFunction out(g.num_edges());
  kernels::parallel::difference(g.edges(), phi.span(), out.values);
  return out;
}

double lp_norm_nodes(const WeightedGraph& g, const NodeFunction& phi, double p) {
  require_on(g, phi, "phi");
  return weighted_lp(phi.span(), g.mu(), p);
}

double lp_norm_edges(const WeightedGraph& g, const EdgeFunction& psi, double p) {
  if (psi.size() != g.num_edges()) throw DimensionError("edge function size does not match graph");
  std::vector<double> rho(g.num_edges());
  std::transform(g.edges().begin(), g.edges().end(), rho.begin(), [](const Edge& e) { return e.rho; });
  return weighted_lp(psi.span(), rho, p);
}

double sobolev_inner(const WeightedGraph& g, const NodeFunction& phi, const NodeFunction& psi) {
  require_on(g, phi, "phi");
  require_on(g, psi, "psi");
  return kernels::parallel::weighted_dot(g.mu(), phi.span(), psi.span()) +
         kernels::parallel::edge_form(g.edges(), EdgeWeight::rho, phi.span(), psi.span());
}

double w_hilbert_norm(const WeightedGraph& g, const NodeFunction& phi) {
  return std::sqrt(std::max(0.0, sobolev_inner(g, phi, phi)));
}

SobolevNormReport sobolev_norms(const WeightedGraph& g, const NodeFunction& phi) {
  require_on(g, phi, "phi");
  SobolevNormReport r;
  r.l2_node = std::sqrt(kernels::parallel::weighted_dot(g.mu(), phi.span(), phi.span()));
  r.l2_edge = std::sqrt(kernels::parallel::edge_form(g.edges(), EdgeWeight::rho, phi.span(), phi.span()));
  r.w_sum = r.l2_node + r.l2_edge;
  r.w_hilbert = std::hypot(r.l2_node, r.l2_edge);
  return r;
}

EmbeddingDiagnostics embedding_diagnostics(const WeightedGraph& g, const NodeId& center, double r,
                                           const NodeFunction& phi) {
  require_on(g, phi, "phi");
  const auto inside = ball(g, center, r);
  std::vector<char> in_ball(g.num_nodes(), 0);
  for (auto v : inside) in_ball[v] = 1;
  double tail = 0.0;
  for (std::size_t v = 0; v < g.num_nodes(); ++v) {
    if (!in_ball[v]) tail += phi[v] * phi[v] * g.mu()[v];
  }
  return {true, inside.size(), std::sqrt(tail)};
}

}  // namespace hvi
