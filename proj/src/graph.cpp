#include "hvi/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <queue>
#include <set>
#include <utility>

namespace hvi {

namespace {

void require_positive(double x, const std::string& what, const std::string& record) {
  if (!std::isfinite(x) || !(x > 0.0)) {
    throw InputError("non-positive " + what + " in " + record);
  }
}

void reject_unknown_keys(const nlohmann::json& obj, std::initializer_list<const char*> allowed,
                         const std::string& record) {
  for (const auto& [key, _] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw InputError("unknown key '" + key + "' in " + record);
    }
  }
}

double number_field(const nlohmann::json& obj, const char* key, const std::string& record) {
  auto it = obj.find(key);
  if (it == obj.end()) throw InputError(std::string("missing key '") + key + "' in " + record);
  if (!it->is_number()) throw InputError(std::string("key '") + key + "' is not a number in " + record);
  return it->get<double>();
}

std::string string_field(const nlohmann::json& obj, const char* key, const std::string& record) {
  auto it = obj.find(key);
  if (it == obj.end()) throw InputError(std::string("missing key '") + key + "' in " + record);
  if (!it->is_string()) throw InputError(std::string("key '") + key + "' is not a string in " + record);
  return it->get<std::string>();
}

}  // namespace

WeightedGraph::WeightedGraph(std::vector<NodeSpec> nodes, const std::vector<AdjacencySpec>& adjacencies) {
  ids_.reserve(nodes.size());
  mu_.reserve(nodes.size());
  kappa_.reserve(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    auto& n = nodes[i];
    const std::string record = "nodes[" + std::to_string(i) + "] ('" + n.id + "')";
    if (index_.count(n.id)) throw InputError("duplicate node id in " + record);
    require_positive(n.mu, "measure", record);
    require_positive(n.kappa, "kappa", record);
    index_.emplace(n.id, ids_.size());
    ids_.push_back(std::move(n.id));
    mu_.push_back(n.mu);
    kappa_.push_back(n.kappa);
  }

  std::set<std::pair<std::size_t, std::size_t>> seen;
  edges_.reserve(2 * adjacencies.size());
  for (std::size_t i = 0; i < adjacencies.size(); ++i) {
    const auto& a = adjacencies[i];
    const std::string record = "adjacencies[" + std::to_string(i) + "] (" + a.a + ", " + a.b + ")";
    auto ia = index_.find(a.a);
    auto ib = index_.find(a.b);
    if (ia == index_.end()) throw InputError("unknown node '" + a.a + "' in " + record);
    if (ib == index_.end()) throw InputError("unknown node '" + a.b + "' in " + record);
    if (ia->second == ib->second) throw InputError("self-loop in " + record);
    require_positive(a.rho, "weight rho", record);
    require_positive(a.gamma, "weight gamma", record);
    auto key = std::minmax(ia->second, ib->second);
    if (!seen.insert(key).second) throw InputError("duplicate adjacency in " + record);
    edges_.push_back({ia->second, ib->second, a.rho, a.gamma});
    edges_.push_back({ib->second, ia->second, a.rho, a.gamma});
  }

  const std::size_t n = ids_.size();
  out_offsets_.assign(n + 1, 0);
  for (const auto& e : edges_) ++out_offsets_[e.src + 1];
  for (std::size_t v = 0; v < n; ++v) out_offsets_[v + 1] += out_offsets_[v];
  out_edges_.resize(edges_.size());
  std::vector<std::size_t> cursor(out_offsets_.begin(), out_offsets_.end() - 1);
  for (std::size_t k = 0; k < edges_.size(); ++k) out_edges_[cursor[edges_[k].src]++] = k;
}

std::size_t WeightedGraph::index_of(const NodeId& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw InputError("unknown node id '" + id + "'");
  return it->second;
}

WeightedGraph WeightedGraph::with_kappa(std::vector<double> kappa) const {
  if (kappa.size() != num_nodes()) throw DimensionError("kappa field size does not match graph");
  for (std::size_t v = 0; v < kappa.size(); ++v) require_positive(kappa[v], "kappa", "node '" + ids_[v] + "'");
  WeightedGraph copy = *this;
  copy.kappa_ = std::move(kappa);
  return copy;
}

std::vector<AdjacencySpec> WeightedGraph::adjacencies() const {
  std::vector<AdjacencySpec> out;
  out.reserve(edges_.size() / 2);
  for (std::size_t k = 0; k < edges_.size(); k += 2) {
    const auto& e = edges_[k];
    out.push_back({ids_[e.src], ids_[e.dst], e.rho, e.gamma});
  }
  return out;
}

std::vector<NodeSpec> WeightedGraph::node_specs() const {
  std::vector<NodeSpec> out;
  out.reserve(ids_.size());
  for (std::size_t v = 0; v < ids_.size(); ++v) out.push_back({ids_[v], mu_[v], kappa_[v]});
  return out;
}

WeightedGraph load_graph(const nlohmann::json& document) {
  if (!document.is_object()) throw InputError("graph document is not an object");
  reject_unknown_keys(document, {"nodes", "adjacencies"}, "graph document");
  auto nodes_it = document.find("nodes");
  if (nodes_it == document.end() || !nodes_it->is_array()) throw InputError("graph document lacks a 'nodes' array");

  std::vector<NodeSpec> nodes;
  std::size_t pos = 0;
  for (const auto& n : *nodes_it) {
    const std::string record = "nodes[" + std::to_string(pos++) + "]";
    if (!n.is_object()) throw InputError(record + " is not an object");
    reject_unknown_keys(n, {"id", "mu", "kappa"}, record);
    nodes.push_back({string_field(n, "id", record), number_field(n, "mu", record), number_field(n, "kappa", record)});
  }

  std::vector<AdjacencySpec> adjacencies;
  if (auto adj_it = document.find("adjacencies"); adj_it != document.end()) {
    if (!adj_it->is_array()) throw InputError("'adjacencies' is not an array");
    pos = 0;
    for (const auto& a : *adj_it) {
      const std::string record = "adjacencies[" + std::to_string(pos++) + "]";
      if (!a.is_object()) throw InputError(record + " is not an object");
      reject_unknown_keys(a, {"a", "b", "rho", "gamma"}, record);
      adjacencies.push_back({string_field(a, "a", record), string_field(a, "b", record),
                             number_field(a, "rho", record), number_field(a, "gamma", record)});
    }
  }
  return WeightedGraph(std::move(nodes), adjacencies);
}

WeightedGraph load_graph_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open graph file " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  try {
    return load_graph(doc);
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

nlohmann::json graph_to_json(const WeightedGraph& g) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : g.node_specs()) nodes.push_back({{"id", n.id}, {"mu", n.mu}, {"kappa", n.kappa}});
  nlohmann::json adj = nlohmann::json::array();
  for (const auto& a : g.adjacencies()) adj.push_back({{"a", a.a}, {"b", a.b}, {"rho", a.rho}, {"gamma", a.gamma}});
  return {{"nodes", std::move(nodes)}, {"adjacencies", std::move(adj)}};
}

std::vector<DegreeRecord> degrees(const WeightedGraph& g) {
  std::vector<DegreeRecord> out(g.num_nodes());
  for (const auto& e : g.edges()) {
    out[e.src].deg_out += e.rho;
    out[e.dst].deg_in += e.rho;
  }
  for (auto& d : out) d.deg = d.deg_out + d.deg_in;
  return out;
}

std::vector<double> distances_from(const WeightedGraph& g, std::size_t source) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(g.num_nodes(), inf);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  dist[source] = 0.0;
  queue.emplace(0.0, source);
  while (!queue.empty()) {
    auto [d, v] = queue.top();
    queue.pop();
    if (d > dist[v]) continue;
    for (std::size_t k : g.out_edges(v)) {
      const auto& e = g.edges()[k];
      const double nd = d + e.rho;
      if (nd < dist[e.dst]) {
        dist[e.dst] = nd;
        queue.emplace(nd, e.dst);
      }
    }
  }
  return dist;
}

double rho_distance(const WeightedGraph& g, const NodeId& v, const NodeId& w) {
  const std::size_t iv = g.index_of(v);
  const std::size_t iw = g.index_of(w);
  if (iv == iw) return 0.0;
  return distances_from(g, iv)[iw];
}

std::vector<std::size_t> ball(const WeightedGraph& g, const NodeId& center, double r) {
  const auto dist = distances_from(g, g.index_of(center));
  std::vector<std::size_t> out;
  for (std::size_t v = 0; v < dist.size(); ++v) {
    if (dist[v] < r) out.push_back(v);
  }
  return out;
}

double volume(const WeightedGraph& g) {
  double s = 0.0;
  for (const auto& e : g.edges()) s += e.rho;
  return s;
}

double total_measure(const WeightedGraph& g) {
  double s = 0.0;
  for (double m : g.mu()) s += m;
  return s;
}

void require_on(const WeightedGraph& g, const NodeFunction& f, const char* what) {
  if (f.size() != g.num_nodes()) {
    throw DimensionError(std::string(what) + " has " + std::to_string(f.size()) + " values but the graph has " +
                         std::to_string(g.num_nodes()) + " nodes");
  }
}

}  // namespace hvi
