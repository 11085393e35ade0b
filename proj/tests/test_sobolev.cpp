#include <cmath>
#include <random>

#include "doctest.h"
#include "hvi/sobolev.hpp"
#include "support/random_graphs.hpp"

using namespace hvi;

namespace {

WeightedGraph two_node() { return WeightedGraph({{"a", 1, 1}, {"b", 1, 1}}, {{"a", "b", 1, 1}}); }

}  // namespace

TEST_SUITE("sobolev") {
  TEST_CASE("difference operator") {
    const auto g = two_node();
    const auto d = difference(g, NodeFunction({1.0, 0.0}));
    // edge 0 is a -> b
    CHECK(d[0] == -1.0);
    CHECK(d[1] == 1.0);
    for (double x : difference(g, NodeFunction({3.5, 3.5})).values) CHECK(x == 0.0);
    CHECK_THROWS_AS(difference(g, NodeFunction(3)), DimensionError);
  }

  TEST_CASE("difference is linear") {
    std::mt19937_64 rng(1);
    const auto g = testing::random_graph(rng, {.nodes = 30});
    const auto x = testing::random_function(rng, 30);
    const auto y = testing::random_function(rng, 30);
    NodeFunction comb(30);
    for (std::size_t v = 0; v < 30; ++v) comb[v] = 2.5 * x[v] + y[v];
    const auto dx = difference(g, x), dy = difference(g, y), dc = difference(g, comb);
    for (std::size_t e = 0; e < dc.size(); ++e) CHECK(dc[e] == doctest::Approx(2.5 * dx[e] + dy[e]).epsilon(1e-13));
  }

  TEST_CASE("node norms") {
    const auto g = two_node();
    for (double p : {1.0, 2.0, 3.0, kInfinityNorm}) CHECK(lp_norm_nodes(g, NodeFunction(2), p) == 0.0);
    CHECK(lp_norm_nodes(g, NodeFunction({1.0, 0.0}), 2.0) == 1.0);
    const WeightedGraph h({{"a", 4, 1}, {"b", 1, 1}}, {});
    CHECK(lp_norm_nodes(h, NodeFunction({1.0, 1.0}), kInfinityNorm) == 4.0);
    CHECK_THROWS_AS(lp_norm_nodes(g, NodeFunction(2), 0.5), std::invalid_argument);
  }

  TEST_CASE("edge norms") {
    const auto g = two_node();
    CHECK(lp_norm_edges(g, EdgeFunction(2), 2.0) == 0.0);
    CHECK(lp_norm_edges(g, difference(g, NodeFunction({1.0, 0.0})), 2.0) == doctest::Approx(std::sqrt(2.0)));
    std::mt19937_64 rng(2);
    const auto r = testing::random_graph(rng, {.nodes = 20});
    const auto psi = difference(r, testing::random_function(rng, 20));
    EdgeFunction scaled(psi.values);
    for (auto& x : scaled.values) x *= -3.0;
    for (double p : {1.0, 2.0, 4.0, kInfinityNorm}) {
      CHECK(lp_norm_edges(r, scaled, p) == doctest::Approx(3.0 * lp_norm_edges(r, psi, p)).epsilon(1e-13));
    }
  }

  TEST_CASE("norm axioms on random inputs") {
    std::mt19937_64 rng(4);
    const auto g = testing::random_graph(rng, {.nodes = 25});
    for (int rep = 0; rep < 20; ++rep) {
      const auto x = testing::random_function(rng, 25);
      const auto y = testing::random_function(rng, 25);
      NodeFunction s(25);
      for (std::size_t v = 0; v < 25; ++v) s[v] = x[v] + y[v];
      for (double p : {1.0, 2.0, 3.0, kInfinityNorm}) {
        CHECK(lp_norm_nodes(g, s, p) <= lp_norm_nodes(g, x, p) + lp_norm_nodes(g, y, p) + 1e-12);
      }
      CHECK(w_hilbert_norm(g, s) <= w_hilbert_norm(g, x) + w_hilbert_norm(g, y) + 1e-12);
      const auto rep_x = sobolev_norms(g, x);
      CHECK(rep_x.w_hilbert <= rep_x.w_sum + 1e-14);
      CHECK(rep_x.w_sum <= std::sqrt(2.0) * rep_x.w_hilbert + 1e-12);
      CHECK(sobolev_inner(g, x, x) == doctest::Approx(rep_x.w_hilbert * rep_x.w_hilbert).epsilon(1e-12));
    }
  }

  TEST_CASE("sobolev norm report") {
    const auto g = two_node();
    const auto z = sobolev_norms(g, NodeFunction(2));
    CHECK(z.w_sum == 0.0);
    CHECK(z.w_hilbert == 0.0);
    const auto r = sobolev_norms(g, NodeFunction({1.0, 0.0}));
    CHECK(r.l2_node == doctest::Approx(1.0));
    CHECK(r.l2_edge == doctest::Approx(std::sqrt(2.0)));
    CHECK(r.w_sum == doctest::Approx(1.0 + std::sqrt(2.0)));
    CHECK(r.w_hilbert == doctest::Approx(std::sqrt(3.0)));
  }

  TEST_CASE("embedding diagnostics") {
    const WeightedGraph path({{"a", 1, 1}, {"b", 1, 1}, {"c", 1, 1}}, {{"a", "b", 1, 1}, {"b", "c", 1, 1}});
    const auto d = embedding_diagnostics(path, "a", 1.5, NodeFunction({0.0, 0.0, 2.0}));
    CHECK(d.ball_finite);
    CHECK(d.ball_size == 2);
    CHECK(d.tail_mass == doctest::Approx(2.0));
    CHECK(embedding_diagnostics(path, "a", volume(path) + 1.0, NodeFunction({1.0, 2.0, 3.0})).tail_mass == 0.0);
    CHECK(embedding_diagnostics(path, "a", 1.5, NodeFunction({5.0, -1.0, 0.0})).tail_mass == 0.0);
    CHECK_THROWS_AS(embedding_diagnostics(path, "zz", 1.0, NodeFunction(3)), InputError);
  }
}
