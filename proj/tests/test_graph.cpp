#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "hvi/graph.hpp"
#include "support/random_graphs.hpp"

using namespace hvi;
using nlohmann::json;

namespace {

json two_node_doc() {
  return json::parse(R"({"nodes": [{"id": "a", "mu": 1, "kappa": 1}, {"id": "b", "mu": 1, "kappa": 1}],
                         "adjacencies": [{"a": "a", "b": "b", "rho": 1, "gamma": 1}]})");
}

std::string load_error(const json& doc) {
  try {
    load_graph(doc);
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_SUITE("graph") {
  TEST_CASE("two-node document materializes both orientations") {
    const auto g = load_graph(two_node_doc());
    CHECK(g.num_nodes() == 2);
    REQUIRE(g.num_edges() == 2);
    const auto& e = g.edges();
    CHECK(e[0].src == e[1].dst);
    CHECK(e[0].dst == e[1].src);
    CHECK(e[0].rho == e[1].rho);
    CHECK(e[0].gamma == e[1].gamma);
    CHECK(g.id(0) == "a");
    CHECK(g.index_of("b") == 1);
  }

  TEST_CASE("invalid documents name the violated invariant and record") {
    auto doc = two_node_doc();
    doc["adjacencies"][0]["b"] = "a";
    CHECK(load_error(doc).find("self-loop") != std::string::npos);
    CHECK(load_error(doc).find("adjacencies[0]") != std::string::npos);

    doc = two_node_doc();
    doc["nodes"][0]["mu"] = 0;
    CHECK(load_error(doc).find("non-positive measure") != std::string::npos);

    doc = two_node_doc();
    doc["nodes"][1]["id"] = "a";
    CHECK(load_error(doc).find("duplicate node id") != std::string::npos);

    doc = two_node_doc();
    doc["adjacencies"][0]["b"] = "zz";
    CHECK(load_error(doc).find("unknown node") != std::string::npos);

    doc = two_node_doc();
    doc["adjacencies"][0]["gamma"] = -1;
    CHECK(load_error(doc).find("non-positive") != std::string::npos);

    doc = two_node_doc();
    doc["extra"] = 1;
    CHECK(load_error(doc).find("unknown key") != std::string::npos);

    doc = two_node_doc();
    doc["adjacencies"].push_back({{"a", "b"}, {"b", "a"}, {"rho", 1}, {"gamma", 1}});
    CHECK(load_error(doc).find("duplicate adjacency") != std::string::npos);
  }

  TEST_CASE("round trip through the file format") {
    std::mt19937_64 rng(3);
    const auto g = testing::random_graph(rng, {.nodes = 12});
    const auto h = load_graph(graph_to_json(g));
    REQUIRE(h.num_nodes() == g.num_nodes());
    REQUIRE(h.num_edges() == g.num_edges());
    for (std::size_t v = 0; v < g.num_nodes(); ++v) {
      CHECK(h.id(v) == g.id(v));
      CHECK(h.mu()[v] == g.mu()[v]);
      CHECK(h.kappa()[v] == g.kappa()[v]);
    }
    for (std::size_t k = 0; k < g.num_edges(); ++k) {
      CHECK(h.edges()[k].src == g.edges()[k].src);
      CHECK(h.edges()[k].rho == g.edges()[k].rho);
    }
  }

  TEST_CASE("degrees") {
    const auto g = load_graph(two_node_doc());
    const auto d = degrees(g);
    CHECK(d[0].deg_out == 1.0);
    CHECK(d[0].deg_in == 1.0);
    CHECK(d[0].deg == 2.0);

    const WeightedGraph iso({{"x", 1, 1}}, {});
    CHECK(degrees(iso)[0].deg == 0.0);

    const WeightedGraph star({{"c", 1, 1}, {"s1", 1, 1}, {"s2", 1, 1}, {"s3", 1, 1}},
                             {{"c", "s1", 2, 1}, {"c", "s2", 2, 1}, {"c", "s3", 2, 1}});
    CHECK(degrees(star)[0].deg == 12.0);
  }

  TEST_CASE("rho distance") {
    const auto g = load_graph(two_node_doc());
    CHECK(rho_distance(g, "a", "a") == 0.0);
    CHECK(rho_distance(g, "a", "b") == 1.0);
    const WeightedGraph split({{"a", 1, 1}, {"b", 1, 1}, {"c", 1, 1}}, {{"a", "b", 1, 1}});
    CHECK(rho_distance(split, "a", "c") == std::numeric_limits<double>::infinity());
    CHECK_THROWS_AS(rho_distance(split, "a", "nope"), InputError);
  }

  TEST_CASE("distance is a pseudometric on random graphs") {
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 5; ++rep) {
      const auto g = testing::random_graph(rng, {.nodes = 15, .extra_per_node = 0.5});
      const std::size_t n = g.num_nodes();
      std::vector<std::vector<double>> d(n);
      for (std::size_t v = 0; v < n; ++v) d[v] = distances_from(g, v);
      for (std::size_t a = 0; a < n; ++a) {
        CHECK(d[a][a] == 0.0);
        for (std::size_t b = 0; b < n; ++b) {
          CHECK(d[a][b] == doctest::Approx(d[b][a]).epsilon(1e-12));
          for (std::size_t c = 0; c < n; ++c) CHECK(d[a][c] <= d[a][b] + d[b][c] + 1e-12);
        }
      }
    }
  }

  TEST_CASE("balls are strict and nested") {
    const auto g = load_graph(two_node_doc());
    CHECK(ball(g, "a", 1.0) == std::vector<std::size_t>{0});
    CHECK(ball(g, "a", 0.5) == std::vector<std::size_t>{0});
    CHECK(ball(g, "a", volume(g) + 1.0).size() == 2);

    std::mt19937_64 rng(5);
    const auto h = testing::random_graph(rng, {.nodes = 30});
    CHECK(ball(h, "n0", volume(h) + 1.0).size() == h.num_nodes());
    std::vector<std::size_t> prev;
    for (double r = 0.1; r < 10.0; r *= 1.5) {
      const auto b = ball(h, "n0", r);
      CHECK(std::includes(b.begin(), b.end(), prev.begin(), prev.end()));
      prev = b;
    }
  }

  TEST_CASE("volume") {
    CHECK(volume(WeightedGraph({{"x", 1, 1}}, {})) == 0.0);
    CHECK(volume(load_graph(two_node_doc())) == 2.0);
    const WeightedGraph tri({{"a", 1, 1}, {"b", 1, 1}, {"c", 1, 1}},
                            {{"a", "b", 0.5, 1}, {"b", "c", 0.5, 1}, {"c", "a", 0.5, 1}});
    CHECK(volume(tri) == 3.0);

    std::mt19937_64 rng(9);
    const auto g = testing::random_graph(rng, {.nodes = 25});
    double twice = 0.0;
    for (const auto& a : g.adjacencies()) twice += 2.0 * a.rho;
    CHECK(volume(g) == doctest::Approx(twice).epsilon(1e-13));
    CHECK(total_measure(g) > 0.0);
  }

  TEST_CASE("orientation symmetry by full scan") {
    std::mt19937_64 rng(13);
    const auto g = testing::random_graph(rng, {.nodes = 40});
    const auto& e = g.edges();
    for (std::size_t k = 0; k < e.size(); ++k) {
      const auto& r = e[k ^ 1];
      CHECK(r.src == e[k].dst);
      CHECK(r.dst == e[k].src);
      CHECK(r.rho == e[k].rho);
      CHECK(r.gamma == e[k].gamma);
    }
  }
}
