#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "hvi/operators.hpp"
#include "hvi/sobolev.hpp"
#include "hvi/solvers.hpp"
#include "oracles/dense.hpp"
#include "support/densities.hpp"
#include "support/random_graphs.hpp"

using namespace hvi;
using testing::density;

namespace {

WeightedGraph single() { return WeightedGraph({{"x", 1, 1}}, {}); }
WeightedGraph two_node() { return WeightedGraph({{"a", 1, 1}, {"b", 1, 1}}, {{"a", "b", 1, 1}}); }

std::vector<NodeFunction> random_tests(std::mt19937_64& rng, const NodeFunction& phi, std::size_t count) {
  std::vector<NodeFunction> out;
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> scale(-6.0, 1.0);
  for (std::size_t i = 0; i < count; ++i) {
    NodeFunction psi = phi;
    const double s = std::pow(10.0, scale(rng));
    for (auto& x : psi.values) x += s * u(rng);
    out.push_back(std::move(psi));
  }
  return out;
}

}  // namespace

TEST_SUITE("solvers") {
  TEST_CASE("sum functional") {
    const auto g2 = WeightedGraph({{"a", 1, 1}, {"b", 1, 1}}, {});
    CHECK(sum_functional(g2, testing::abs_value(), NodeFunction(2)) == 0.0);
    CHECK(sum_functional(g2, testing::abs_value(), NodeFunction({1.0, -2.0})) == doctest::Approx(3.0));
    const auto w = WeightedGraph({{"a", 2, 1}, {"b", 1, 1}}, {});
    CHECK(sum_functional(w, testing::half_square(), NodeFunction({1.0, 2.0})) == doctest::Approx(3.0));
  }

  TEST_CASE("sum directional bound") {
    const auto g2 = WeightedGraph({{"a", 1, 1}, {"b", 1, 1}}, {});
    const NodeFunction phi({0.3, -1.0});
    CHECK(sum_directional_bound(g2, testing::abs_value(), phi, NodeFunction(2)) == 0.0);
    CHECK(sum_directional_bound(g2, testing::abs_value(), NodeFunction(2), NodeFunction({1.0, -1.0})) == 2.0);
    const NodeFunction psi({0.7, 2.0});
    CHECK(sum_directional_bound(g2, testing::half_square(), phi, psi) == doctest::Approx(0.3 * 0.7 - 2.0));
  }

  TEST_CASE("verify inclusion") {
    const auto g = single();
    const auto abs = testing::abs_value();
    CHECK(verify_inclusion(g, abs, NodeFunction({0.0}), NodeFunction({0.5}))[0] == 0.0);
    CHECK(verify_inclusion(g, abs, NodeFunction({1.0}), NodeFunction({0.5}))[0] == doctest::Approx(1.5));
    // f - L phi = 0.5 - 1 = -0.5, interval [1, 1]
    CHECK(verify_inclusion(g, abs, NodeFunction({1.0}), NodeFunction({-0.5}))[0] == doctest::Approx(2.5));

    std::mt19937_64 rng(2);
    const auto h = testing::random_graph(rng, {.nodes = 10});
    const auto phi = testing::random_function(rng, 10);
    const auto f = testing::random_function(rng, 10);
    const auto r = verify_inclusion(h, testing::half_square(), phi, f);
    const auto lphi = oracle::multiply(oracle::dense_operator(h), phi.values);
    for (std::size_t v = 0; v < 10; ++v) CHECK(r[v] == doctest::Approx(std::abs(f[v] - lphi[v] - phi[v])).epsilon(1e-12));
  }

  TEST_CASE("hvi residual") {
    const auto g = single();
    const auto abs = testing::abs_value();
    const NodeFunction f({0.5});
    const NodeFunction sol({0.0});
    CHECK(hvi_residual(g, abs, sol, f, {sol})[0] == 0.0);
    std::mt19937_64 rng(4);
    for (double r : hvi_residual(g, abs, sol, f, random_tests(rng, sol, 200))) CHECK(r >= 0.0);

    // phi = 1 has residual 2.5 at f = -0.5; moving toward the solution breaks the inequality.
    const NodeFunction bad({1.0});
    const NodeFunction fb({-0.5});
    CHECK(verify_inclusion(g, abs, bad, fb)[0] > 0.0);
    const auto vals = hvi_residual(g, abs, bad, fb, {NodeFunction({0.9}), NodeFunction({1.1})});
    CHECK(std::min(vals[0], vals[1]) < 0.0);
  }

  TEST_CASE("linear two-node example") {
    SolverOptions opts;
    opts.tol = 1e-12;
    const auto rep = solve_elliptic({two_node(), testing::half_square(), NodeFunction({3.0, -1.0})}, opts);
    CHECK(rep.converged);
    CHECK(rep.phi[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(rep.phi[1]) <= 1e-12);
    CHECK(rep.residual_norm <= 1e-12);
  }

  TEST_CASE("single-node soft threshold") {
    for (auto [f, phi, xi] : std::vector<std::array<double, 3>>{{0.5, 0.0, 0.5}, {2.0, 1.0, 1.0}, {-0.3, 0.0, -0.3}}) {
      const auto rep = solve_elliptic({single(), testing::abs_value(), NodeFunction({f})});
      CHECK(rep.converged);
      CHECK(rep.phi[0] == doctest::Approx(phi).epsilon(1e-12));
      CHECK(rep.xi[0] == doctest::Approx(xi).epsilon(1e-12));
      CHECK(rep.residual_norm == 0.0);
    }
  }

  TEST_CASE("report invariants: xi selection and discrete balance") {
    std::mt19937_64 rng(6);
    const auto sp = density({-0.5, 0.5}, {{-1.0, 0.5}, {0.2, 1.0}, {2.0, 0.25}});
    for (int rep_i = 0; rep_i < 5; ++rep_i) {
      const auto g = testing::random_graph(rng, {.nodes = 30});
      const auto f = testing::random_function(rng, 30, -3.0, 3.0);
      const auto rep = solve_elliptic({g, sp, f});
      REQUIRE(rep.converged);
      const auto a = oracle::multiply(oracle::dense_stiffness(g), rep.phi.values);
      for (std::size_t v = 0; v < 30; ++v) {
        const auto iv = sp.subdifferential(rep.phi[v]);
        CHECK(rep.xi[v] >= iv.lo - rep.inclusion_residual[v] - 1e-15);
        CHECK(rep.xi[v] <= iv.hi + rep.inclusion_residual[v] + 1e-15);
        const double balance = a[v] + g.mu()[v] * rep.xi[v] - g.mu()[v] * f[v];
        CHECK(std::abs(balance) <= g.mu()[v] * rep.inclusion_residual[v] + 1e-10 * (1.0 + std::abs(a[v])));
      }
    }
  }

  TEST_CASE("soft-threshold oracle on edgeless graphs") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> w(0.2, 3.0);
    for (std::size_t n : {1u, 10u, 300u}) {
      std::vector<double> mu(n), kappa(n);
      for (std::size_t v = 0; v < n; ++v) {
        mu[v] = w(rng);
        kappa[v] = w(rng);
      }
      const auto g = testing::edgeless_graph(mu, kappa);
      const auto f = testing::random_function(rng, n, -4.0, 4.0);
      const auto rep = solve_elliptic({g, testing::abs_value(), f});
      CHECK(rep.converged);
      for (std::size_t v = 0; v < n; ++v) {
        const double z = f[v] * mu[v] / kappa[v], t = mu[v] / kappa[v];
        const double expect = z > t ? z - t : (z < -t ? z + t : 0.0);
        CHECK(std::abs(rep.phi[v] - expect) <= 1e-12 * (1.0 + std::abs(expect)));
      }
    }
  }

  TEST_CASE("linear oracle: quadratic j against the SPD solve") {
    std::mt19937_64 rng(10);
    for (int rep_i = 0; rep_i < 5; ++rep_i) {
      const auto g = testing::random_graph(rng, {.nodes = 50, .extra_per_node = 2.0});
      const auto f = testing::random_function(rng, 50);
      const double c = 0.5 + rep_i;
      const auto sp = density({}, {{0.3, c}});
      SolverOptions opts;
      opts.tol = 1e-12;
      const auto rep = solve_elliptic({g, sp, f}, opts);
      const auto op = assemble(g);
      std::vector<double> shift(50);
      NodeFunction rhs(50);
      for (std::size_t v = 0; v < 50; ++v) {
        shift[v] = c * g.mu()[v];
        rhs[v] = g.mu()[v] * (f[v] - 0.3);
      }
      const auto ref = solve_spd(op, shift, rhs, 1e-14, 2000);
      NodeFunction diff(50);
      for (std::size_t v = 0; v < 50; ++v) diff[v] = rep.phi[v] - ref[v];
      CHECK(w_hilbert_norm(g, diff) <= 1e-10 * w_hilbert_norm(g, ref));
    }
  }

  TEST_CASE("gradient check for smooth j") {
    std::mt19937_64 rng(12);
    const auto sp = density({0.0}, {{0.0, 1.0}, {0.0, 1.0, 0.5}});  // C^1 at 0
    const auto g = testing::random_graph(rng, {.nodes = 20});
    const auto f = testing::random_function(rng, 20, -2.0, 2.0);
    const auto rep = solve_elliptic({g, sp, f});
    REQUIRE(rep.converged);
    double fnorm = 0.0, gn = 0.0;
    for (std::size_t v = 0; v < 20; ++v) fnorm += g.mu()[v] * f[v] * f[v];
    for (std::size_t v = 0; v < 20; ++v) {
      const double h = 1e-6;
      NodeFunction p = rep.phi, m = rep.phi;
      p[v] += h;
      m[v] -= h;
      const double d = (energy(g, sp, f, p) - energy(g, sp, f, m)) / (2 * h);
      gn += (d / g.mu()[v]) * (d / g.mu()[v]) * g.mu()[v];
    }
    CHECK(std::sqrt(gn) <= 1e-6 * (1.0 + std::sqrt(fnorm)));
  }

  TEST_CASE("inclusion implies inequality on random tests") {
    std::mt19937_64 rng(14);
    const auto sp = density({-1.0, 0.0, 1.0}, {{-2.0, 0.5}, {-0.5}, {0.5, 0.25}, {2.0}});
    for (int rep_i = 0; rep_i < 4; ++rep_i) {
      const auto g = testing::random_graph(rng, {.nodes = 15, .kappa = {2.0, 4.0}});
      const auto f = testing::random_function(rng, 15, -4.0, 4.0);
      const auto rep = solve_elliptic({g, sp, f});
      REQUIRE(rep.converged);
      double rmax = 0.0;
      for (double r : rep.inclusion_residual.values) rmax = std::max(rmax, r);
      if (rmax > 1e-12) continue;
      for (double r : hvi_residual(g, sp, rep.phi, f, random_tests(rng, rep.phi, 1000))) CHECK(r >= -1e-9);
    }
  }

  TEST_CASE("nonconvex density with downward jump") {
    std::mt19937_64 rng(16);
    const auto sp = density({0.5}, {{1.0, 0.5}, {-1.0, 0.5}});
    for (int rep_i = 0; rep_i < 5; ++rep_i) {
      const auto g = testing::random_graph(rng, {.nodes = 12, .kappa = {1.0, 3.0}});
      const auto f = testing::random_function(rng, 12, -3.0, 3.0);
      const auto rep = solve_elliptic({g, sp, f});
      CHECK(rep.converged);
      CHECK(rep.residual_norm <= 1e-8);
    }
  }

  TEST_CASE("picard strategy converges on a contractive instance") {
    std::mt19937_64 rng(18);
    const auto g = testing::random_graph(rng, {.nodes = 20, .kappa = {2.0, 3.0}});
    const auto sp = density({0.0}, {{0.0, 0.3}, {0.0, -0.2}});
    SolverOptions opts;
    opts.strategy = Strategy::picard;
    const auto f = testing::random_function(rng, 20, -2.0, 2.0);
    const auto rep = solve_elliptic({g, sp, f}, opts);
    CHECK(rep.converged);
    const auto ref = solve_elliptic({g, sp, f});
    for (std::size_t v = 0; v < 20; ++v) CHECK(rep.phi[v] == doctest::Approx(ref.phi[v]).epsilon(1e-7));
  }

  TEST_CASE("certificates") {
    // m_coercive = 3 from gamma = 3 rho, kappa = 3 mu
    const WeightedGraph g({{"a", 1, 3}, {"b", 1, 3}}, {{"a", "b", 1, 3}});
    const EllipticProblem quad{g, testing::half_square(), NodeFunction(2)};
    auto certs = certify(quad, 5.0);
    REQUIRE(certs.size() == 2);
    CHECK(certs[0].kind == Certificate::Kind::existence_smallness);
    CHECK(certs[0].lhs == doctest::Approx(1.0));
    CHECK(certs[0].rhs == doctest::Approx(1.5));
    CHECK(certs[0].satisfied);
    CHECK(certs[1].lhs == doctest::Approx(1.0));
    CHECK(certs[1].satisfied);

    const EllipticProblem abs{two_node(), testing::abs_value(), NodeFunction(2)};
    certs = certify(abs, 5.0);
    CHECK(certs[1].lhs == doctest::Approx(1.0));
    CHECK(certs[1].rhs == doctest::Approx(0.5));
    CHECK_FALSE(certs[1].satisfied);

    const EllipticProblem huge{two_node(), density({0.0}, {{-100.0}, {100.0}}), NodeFunction(2)};
    certs = certify(huge, 5.0);
    CHECK(certs[0].lhs == doctest::Approx(100.0));
    CHECK_FALSE(certs[0].satisfied);
    CHECK(certs[0].note.find("violated") != std::string::npos);

    const auto rep = solve_elliptic(abs);
    CHECK(std::find(rep.warnings.begin(), rep.warnings.end(), "solution may not be unique") != rep.warnings.end());
  }

  TEST_CASE("uniqueness certificate implies initialization independence") {
    std::mt19937_64 rng(20);
    const auto sp = density({0.0}, {{-0.4, 0.3}, {0.4, -0.2}});
    for (int rep_i = 0; rep_i < 3; ++rep_i) {
      const auto g = testing::random_graph(rng, {.nodes = 15, .kappa = {6.0, 8.0}, .rho = {0.5, 1.0}, .gamma = {4.0, 6.0}});
      const auto f = testing::random_function(rng, 15, -3.0, 3.0);
      const EllipticProblem p{g, sp, f};
      REQUIRE(certify(p, default_certify_range(p))[1].satisfied);
      std::vector<NodeFunction> sols;
      for (int k = 0; k < 10; ++k) {
        SolverOptions opts;
        opts.initial = testing::random_function(rng, 15, -5.0, 5.0);
        const auto rep = solve_elliptic(p, opts);
        REQUIRE(rep.converged);
        sols.push_back(rep.phi);
      }
      for (std::size_t a = 0; a < sols.size(); ++a) {
        for (std::size_t b = a + 1; b < sols.size(); ++b) {
          NodeFunction d(15);
          for (std::size_t v = 0; v < 15; ++v) d[v] = sols[a][v] - sols[b][v];
          CHECK(w_hilbert_norm(g, d) <= 1e-6);
        }
      }
    }
  }

  TEST_CASE("non-convergence is reported, not thrown") {
    SolverOptions opts;
    opts.max_inner = 1;
    opts.max_outer = 1;
    opts.h_schedule = {0.1};
    opts.tol = 1e-14;
    std::mt19937_64 rng(22);
    const auto g = testing::random_graph(rng, {.nodes = 40});
    const auto sp = density({-0.2, 0.3}, {{0.0, 0.0, 0.0, 1.0}, {1.0, -2.0}, {-1.0, 0.0, 2.0}});
    const auto rep = solve_elliptic({g, sp, testing::random_function(rng, 40, -5.0, 5.0)}, opts);
    CHECK_FALSE(rep.converged);
    CHECK_FALSE(rep.warnings.empty());
    CHECK_FALSE(rep.iterations.empty());
  }

  TEST_CASE("argument checks") {
    CHECK_THROWS_AS(solve_elliptic({two_node(), testing::abs_value(), NodeFunction(3)}), DimensionError);
    SolverOptions opts;
    opts.h_schedule = {0.1, 0.2};
    CHECK_THROWS_AS(solve_elliptic({two_node(), testing::abs_value(), NodeFunction(2)}, opts), std::invalid_argument);
  }
}
