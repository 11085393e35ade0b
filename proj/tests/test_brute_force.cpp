#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "hvi/solvers.hpp"
#include "oracles/brute_force.hpp"
#include "support/instances.hpp"

using namespace hvi;

namespace {

std::vector<double> as_vector(const NodeFunction& f) { return f.values; }

double chebyshev(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace

TEST_SUITE("brute_force") {
  TEST_CASE("grid search finds the soft-threshold solutions") {
    const WeightedGraph g({{"x", 1, 1}}, {});
    oracle::PiecewiseLinear sign{{0.0}, {{-1.0, 0.0}, {1.0, 0.0}}};
    const auto l = oracle::dense_operator(g);
    for (auto [f, phi] : std::vector<std::pair<double, double>>{{0.5, 0.0}, {2.0, 1.0}, {-2.7, -1.7}}) {
      const auto res = oracle::grid_search(l, sign, {f});
      REQUIRE_FALSE(res.hits.empty());
      CHECK(oracle::distance_to_hits(res, {phi}) == 0.0);
      CHECK(res.best_residual <= 1e-12);
    }
  }

  TEST_CASE("grid search agrees with exhaustive enumeration on a coarse grid") {
    std::mt19937_64 rng(3);
    const auto inst = testing::small_nonconvex(rng, 2);
    const auto l = oracle::dense_operator(inst.problem.graph);
    oracle::GridSearch coarse{.lo = -5.0, .per_unit = 20, .points = 201};
    const auto res = oracle::grid_search(l, inst.beta, inst.problem.f.values, coarse);
    std::size_t count = 0;
    for (std::int64_t i = 0; i < coarse.points; ++i) {
      for (std::int64_t k = 0; k < coarse.points; ++k) {
        const double r = oracle::max_residual(l, inst.beta, inst.problem.f.values, {coarse.value(i), coarse.value(k)});
        if (r <= res.tolerance) ++count;
      }
    }
    CHECK(count == res.hits.size());
  }

  TEST_CASE("solver output lies in the near-zero set and every cluster is a reachable fixed point") {
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 4; ++rep) {
      const std::size_t n = 1 + static_cast<std::size_t>(rep % 3);
      const auto inst = testing::small_nonconvex(rng, n);
      const auto l = oracle::dense_operator(inst.problem.graph);
      const auto res = oracle::grid_search(l, inst.beta, inst.problem.f.values);
      REQUIRE_FALSE(res.truncated);
      REQUIRE_FALSE(res.hits.empty());

      const auto sol = solve_elliptic(inst.problem);
      REQUIRE(sol.converged);
      const double step = 1e-3;
      CHECK(oracle::distance_to_hits(res, as_vector(sol.phi)) <= step * (1.0 + 1e-9));

      // A hit only bounds the residual, so it need not lie within one step of
      // an exact solution. Clusters of adjacent hits must each touch one,
      // reached by runs without regularization started inside the cluster.
      const std::size_t m = res.hits.size();
      std::vector<std::size_t> parent(m);
      for (std::size_t i = 0; i < m; ++i) parent[i] = i;
      auto find = [&](std::size_t i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
      };
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t k = i + 1; k < m; ++k) {
          if (chebyshev(res.hits[i], res.hits[k]) <= step * (1.0 + 1e-9)) parent[find(i)] = find(k);
        }
      }
      std::vector<std::vector<double>> fixed_points;
      for (std::size_t i = 0; i < m; ++i) {
        if (find(i) != i) continue;
        SolverOptions opts;
        opts.initial = NodeFunction(res.hits[i]);
        opts.h_schedule = {};
        opts.certify = false;
        const auto r = solve_elliptic(inst.problem, opts);
        if (r.converged) fixed_points.push_back(r.phi.values);
      }
      std::set<std::size_t> touched;
      for (std::size_t i = 0; i < m; ++i) {
        for (const auto& p : fixed_points) {
          if (chebyshev(p, res.hits[i]) <= step * (1.0 + 1e-9)) touched.insert(find(i));
        }
      }
      for (std::size_t i = 0; i < m; ++i) CHECK(touched.count(find(i)) == 1);
    }
  }
}
