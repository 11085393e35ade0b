#pragma once

#include <cstddef>
#include <filesystem>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

namespace hvi {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or invariant-violating input data (files, node ids, weights).
class InputError : public Error {
 public:
  using Error::Error;
};

/// Function/operator size does not match the graph it is used with.
class DimensionError : public Error {
 public:
  using Error::Error;
};

using NodeId = std::string;

/// Real values indexed by the canonical node order of one graph.
struct NodeFunction {
  std::vector<double> values;

  NodeFunction() = default;
  explicit NodeFunction(std::size_t n, double fill = 0.0) : values(n, fill) {}
  explicit NodeFunction(std::vector<double> v) : values(std::move(v)) {}
  NodeFunction(std::initializer_list<double> v) : values(v) {}

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
  std::span<const double> span() const { return values; }
  std::span<double> span() { return values; }
};

/// Real values indexed by directed edge (see WeightedGraph::edges()).
struct EdgeFunction {
  std::vector<double> values;

  EdgeFunction() = default;
  explicit EdgeFunction(std::size_t n, double fill = 0.0) : values(n, fill) {}
  explicit EdgeFunction(std::vector<double> v) : values(std::move(v)) {}
  EdgeFunction(std::initializer_list<double> v) : values(v) {}

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
  std::span<const double> span() const { return values; }
};

struct NodeSpec {
  NodeId id;
  double mu = 1.0;
  double kappa = 1.0;
};

/// One undirected adjacency; materialized as two directed edges.
struct AdjacencySpec {
  NodeId a;
  NodeId b;
  double rho = 1.0;
  double gamma = 1.0;
};

/// Directed edge e = (src -> dst). The reversal of edge k is edge k ^ 1.
struct Edge {
  std::size_t src;
  std::size_t dst;
  double rho;
  double gamma;
};

/// Finite weighted graph G = (V, E, rho, mu) with coefficient fields kappa on
/// nodes and gamma on edges. Immutable once constructed.
class WeightedGraph {
 public:
  WeightedGraph() = default;

  /// Validates and builds. Throws InputError naming the offending record.
  WeightedGraph(std::vector<NodeSpec> nodes, const std::vector<AdjacencySpec>& adjacencies);

  std::size_t num_nodes() const { return ids_.size(); }
  std::size_t num_edges() const { return edges_.size(); }

  const std::vector<NodeId>& ids() const { return ids_; }
  const NodeId& id(std::size_t v) const { return ids_[v]; }
  /// Throws InputError for unknown ids.
  std::size_t index_of(const NodeId& id) const;
  bool contains(const NodeId& id) const { return index_.count(id) != 0; }

  std::span<const double> mu() const { return mu_; }
  std::span<const double> kappa() const { return kappa_; }
  const std::vector<Edge>& edges() const { return edges_; }

  /// Edge indices leaving v, in insertion order.
  std::span<const std::size_t> out_edges(std::size_t v) const {
    return {out_edges_.data() + out_offsets_[v], out_offsets_[v + 1] - out_offsets_[v]};
  }

  /// Copy with a replaced potential field (used by implicit time stepping).
  WeightedGraph with_kappa(std::vector<double> kappa) const;

  /// Adjacency list as stored on disk (one entry per undirected pair).
  std::vector<AdjacencySpec> adjacencies() const;
  std::vector<NodeSpec> node_specs() const;

 private:
  std::vector<NodeId> ids_;
  std::unordered_map<NodeId, std::size_t> index_;
  std::vector<double> mu_;
  std::vector<double> kappa_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> out_offsets_;
  std::vector<std::size_t> out_edges_;
};

WeightedGraph load_graph(const nlohmann::json& document);
WeightedGraph load_graph_file(const std::filesystem::path& path);
nlohmann::json graph_to_json(const WeightedGraph& g);

struct DegreeRecord {
  double deg_out = 0.0;
  double deg_in = 0.0;
  double deg = 0.0;
};

std::vector<DegreeRecord> degrees(const WeightedGraph& g);

/// Shortest-path distances under rho from one source (Dijkstra); +inf when
/// unreachable.
std::vector<double> distances_from(const WeightedGraph& g, std::size_t source);
double rho_distance(const WeightedGraph& g, const NodeId& v, const NodeId& w);

/// Nodes w with dist(center, w) < r, in canonical order.
std::vector<std::size_t> ball(const WeightedGraph& g, const NodeId& center, double r);

/// vol_rho(G): sum of rho over all directed edges.
double volume(const WeightedGraph& g);
/// mu(V).
double total_measure(const WeightedGraph& g);

/// Throws DimensionError unless f has one value per node of g.
void require_on(const WeightedGraph& g, const NodeFunction& f, const char* what);

}  // namespace hvi
