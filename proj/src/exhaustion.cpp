#include "hvi/exhaustion.hpp"

#include <cmath>
#include <cstdint>
#include <map>
#include <queue>
#include <string>

#include "hvi/sobolev.hpp"

namespace hvi {

namespace {

using Key = std::pair<std::int64_t, std::int64_t>;

std::size_t key_depth(GraphGenerator::Kind kind, const Key& k) {
  switch (kind) {
    case GraphGenerator::Kind::path:
    case GraphGenerator::Kind::binary_tree:
      return static_cast<std::size_t>(k.first);
    case GraphGenerator::Kind::lattice_2d:
      return static_cast<std::size_t>(std::llabs(k.first) + std::llabs(k.second));
  }
  return 0;
}

std::string key_id(GraphGenerator::Kind kind, const Key& k) {
  switch (kind) {
    case GraphGenerator::Kind::path:
      return "p" + std::to_string(k.first);
    case GraphGenerator::Kind::binary_tree:
      return "t" + std::to_string(k.first) + "." + std::to_string(k.second);
    case GraphGenerator::Kind::lattice_2d:
      return "l" + std::to_string(k.first) + "," + std::to_string(k.second);
  }
  return {};
}

std::vector<Key> neighbours(GraphGenerator::Kind kind, const Key& k) {
  switch (kind) {
    case GraphGenerator::Kind::path:
      if (k.first == 0) return {{1, 0}};
      return {{k.first - 1, 0}, {k.first + 1, 0}};
    case GraphGenerator::Kind::binary_tree: {
      std::vector<Key> out;
      if (k.first > 0) out.push_back({k.first - 1, k.second / 2});
      out.push_back({k.first + 1, 2 * k.second});
      out.push_back({k.first + 1, 2 * k.second + 1});
      return out;
    }
    case GraphGenerator::Kind::lattice_2d:
      return {{k.first + 1, k.second}, {k.first - 1, k.second}, {k.first, k.second + 1}, {k.first, k.second - 1}};
  }
  return {};
}

Key parse_id(GraphGenerator::Kind kind, const NodeId& id) {
  try {
    switch (kind) {
      case GraphGenerator::Kind::path:
        if (id.size() > 1 && id[0] == 'p') return {std::stoll(id.substr(1)), 0};
        break;
      case GraphGenerator::Kind::binary_tree:
        if (auto dot = id.find('.'); id.size() > 1 && id[0] == 't' && dot != std::string::npos) {
          return {std::stoll(id.substr(1, dot - 1)), std::stoll(id.substr(dot + 1))};
        }
        break;
      case GraphGenerator::Kind::lattice_2d:
        if (auto comma = id.find(','); id.size() > 1 && id[0] == 'l' && comma != std::string::npos) {
          return {std::stoll(id.substr(1, comma - 1)), std::stoll(id.substr(comma + 1))};
        }
        break;
    }
  } catch (const std::exception&) {
  }
  throw InputError("not a generated node id: '" + id + "'");
}

}  // namespace

double WeightLaw::operator()(std::size_t depth) const {
  const double d = static_cast<double>(depth);
  switch (kind) {
    case Kind::constant:
      return c;
    case Kind::geometric:
      return c * std::pow(q, d);
    case Kind::power:
      return c * std::pow(1.0 + d, q);
  }
  return c;
}

NodeId GraphGenerator::root() const { return key_id(kind, {0, 0}); }

void GraphGenerator::validate() const {
  auto check = [](const WeightLaw& w, const char* name) {
    const bool ok = w.c > 0.0 && std::isfinite(w.c) && std::isfinite(w.q) &&
                    (w.kind != WeightLaw::Kind::geometric || w.q > 0.0);
    if (!ok) throw InputError(std::string("generator law '") + name + "' is not positive at every depth");
  };
  check(mu, "mu");
  check(rho, "rho");
  check(gamma, "gamma");
  check(kappa, "kappa");
  if (max_nodes == 0) throw InputError("generator max_nodes must be positive");
}

std::size_t generated_depth(const GraphGenerator& gen, const NodeId& id) { return key_depth(gen.kind, parse_id(gen.kind, id)); }

WeightedGraph truncate(const GraphGenerator& gen, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("truncate: radius must be positive");
  gen.validate();
  // Dijkstra from the root, expanding only nodes strictly inside the ball.
  std::map<Key, double> dist;
  std::vector<Key> settled;
  std::map<Key, bool> done;
  using Item = std::pair<double, Key>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  const Key root{0, 0};
  dist[root] = 0.0;
  heap.push({0.0, root});
  while (!heap.empty()) {
    auto [d, k] = heap.top();
    heap.pop();
    if (done[k]) continue;
    done[k] = true;
    if (!(d < r)) break;
    settled.push_back(k);
    if (settled.size() > gen.max_nodes) {
      throw InputError("truncation at radius " + std::to_string(r) + " exceeds " + std::to_string(gen.max_nodes) +
                       " nodes");
    }
    const std::size_t dk = key_depth(gen.kind, k);
    for (const auto& nb : neighbours(gen.kind, k)) {
      const double len = gen.rho(std::min(dk, key_depth(gen.kind, nb)));
      const double nd = d + len;
      auto it = dist.find(nb);
      if (nd < r && (it == dist.end() || nd < it->second)) {
        dist[nb] = nd;
        heap.push({nd, nb});
      }
    }
  }

  std::map<Key, std::size_t> inside;
  std::vector<NodeSpec> nodes;
  for (const auto& k : settled) {
    const std::size_t d = key_depth(gen.kind, k);
    inside[k] = nodes.size();
    nodes.push_back({key_id(gen.kind, k), gen.mu(d), gen.kappa(d)});
  }
  std::vector<AdjacencySpec> adj;
  for (const auto& k : settled) {
    const std::size_t dk = key_depth(gen.kind, k);
    for (const auto& nb : neighbours(gen.kind, k)) {
      auto it = inside.find(nb);
      if (it == inside.end() || it->second < inside[k]) continue;
      const std::size_t de = std::min(dk, key_depth(gen.kind, nb));
      adj.push_back({key_id(gen.kind, k), key_id(gen.kind, nb), gen.rho(de), gen.gamma(de)});
    }
  }
  return WeightedGraph(std::move(nodes), adj);
}

NodeFunction transfer(const WeightedGraph& from, const NodeFunction& phi, const WeightedGraph& to) {
  require_on(from, phi, "phi");
  NodeFunction out(to.num_nodes());
  for (std::size_t v = 0; v < to.num_nodes(); ++v) {
    if (from.contains(to.id(v))) out[v] = phi[from.index_of(to.id(v))];
  }
  return out;
}

ExhaustionReport exhaust(const GraphGenerator& gen, const ExhaustionTemplate& problem, const std::vector<double>& radii,
                         double eps) {
  if (radii.empty()) throw std::invalid_argument("exhaust: empty radius list");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0)) throw std::invalid_argument("exhaust: radii must be positive");
    if (i > 0 && !(radii[i] > radii[i - 1])) throw std::invalid_argument("exhaust: radii must be strictly increasing");
  }
  if (!(eps > 0.0)) throw std::invalid_argument("exhaust: eps must be positive");

  ExhaustionReport rep;
  for (double r : radii) {
    WeightedGraph g = truncate(gen, r);
    NodeFunction f(g.num_nodes());
    for (std::size_t v = 0; v < g.num_nodes(); ++v) f[v] = problem.f(generated_depth(gen, g.id(v)));

    SolverOptions opts = problem.options;
    if (!rep.graphs.empty()) opts.initial = transfer(rep.graphs.back(), rep.solutions.back().phi, g);
    auto sol = solve_elliptic({g, problem.sp, f}, opts);

    double tail = 0.0;
    for (std::size_t v = 0; v < g.num_nodes(); ++v) {
      if (rep.graphs.empty() || !rep.graphs.back().contains(g.id(v))) tail += g.mu()[v] * sol.phi[v] * sol.phi[v];
    }
    if (!rep.graphs.empty()) {
      const auto& prev = rep.graphs.back();
      NodeFunction diff = transfer(g, sol.phi, prev);
      for (std::size_t v = 0; v < diff.size(); ++v) diff[v] -= rep.solutions.back().phi[v];
      rep.increments.push_back(w_hilbert_norm(prev, diff));
    }
    const bool ok = sol.converged;
    rep.radii.push_back(r);
    rep.tail_masses.push_back(std::sqrt(tail));
    rep.graphs.push_back(std::move(g));
    rep.solutions.push_back(std::move(sol));
    if (!ok) {
      rep.error = "solve did not converge at radius " + std::to_string(r);
      return rep;
    }
  }
  rep.converged = rep.increments.size() >= 1 && rep.increments.back() < eps && rep.tail_masses.back() < eps;
  return rep;
}

}  // namespace hvi
