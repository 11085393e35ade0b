// Serial reference kernels against their OpenMP twins on random sparse graphs.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>

#include "hvi/kernels.hpp"
#include "hvi/operators.hpp"
#include "support/random_graphs.hpp"

namespace {

template <class F>
double seconds_per_call(F&& f, int reps) {
  f();
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) f();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count() / reps;
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t n = argc > 1 ? std::stoul(argv[1]) : 200000;
  const int reps = argc > 2 ? std::stoi(argv[2]) : 20;
  std::mt19937_64 rng(7);
  hvi::testing::RandomGraphSpec spec;
  spec.nodes = n;
  spec.extra_per_node = 3.0;
  const auto g = hvi::testing::random_graph(rng, spec);
  const auto op = hvi::assemble(g);
  const auto x = hvi::testing::random_function(rng, n);
  const auto y = hvi::testing::random_function(rng, n);
  std::vector<double> out(n), out2(n), diff(g.num_edges()), diff2(g.num_edges());

  std::printf("nodes %zu, directed edges %zu, threads %d\n", n, g.num_edges(), hvi::kernels::max_threads());
  std::printf("%-14s %12s %12s %8s %12s\n", "kernel", "serial [ms]", "parallel [ms]", "speedup", "max |diff|");

  auto row = [&](const char* name, auto serial, auto parallel, double gap) {
    const double s = seconds_per_call(serial, reps) * 1e3;
    const double p = seconds_per_call(parallel, reps) * 1e3;
    std::printf("%-14s %12.3f %12.3f %8.2f %12.3g\n", name, s, p, s / p, gap);
  };

  namespace ks = hvi::kernels::serial;
  namespace kp = hvi::kernels::parallel;
  ks::spmv(op.stiffness, op.potential, x.span(), out);
  kp::spmv(op.stiffness, op.potential, x.span(), out2);
  double gap = 0.0;
  for (std::size_t i = 0; i < n; ++i) gap = std::max(gap, std::abs(out[i] - out2[i]));
  row("spmv", [&] { ks::spmv(op.stiffness, op.potential, x.span(), out); },
      [&] { kp::spmv(op.stiffness, op.potential, x.span(), out2); }, gap);

  volatile double sink = 0.0;
  gap = std::abs(ks::weighted_dot(op.mass, x.span(), y.span()) - kp::weighted_dot(op.mass, x.span(), y.span()));
  row("weighted_dot", [&] { sink = ks::weighted_dot(op.mass, x.span(), y.span()); },
      [&] { sink = kp::weighted_dot(op.mass, x.span(), y.span()); }, gap);

  gap = std::abs(ks::edge_form(op.edges, hvi::EdgeWeight::gamma, x.span(), y.span()) -
                 kp::edge_form(op.edges, hvi::EdgeWeight::gamma, x.span(), y.span()));
  row("edge_form", [&] { sink = ks::edge_form(op.edges, hvi::EdgeWeight::gamma, x.span(), y.span()); },
      [&] { sink = kp::edge_form(op.edges, hvi::EdgeWeight::gamma, x.span(), y.span()); }, gap);

  ks::difference(op.edges, x.span(), diff);
  kp::difference(op.edges, x.span(), diff2);
  gap = 0.0;
  for (std::size_t i = 0; i < diff.size(); ++i) gap = std::max(gap, std::abs(diff[i] - diff2[i]));
  row("difference", [&] { ks::difference(op.edges, x.span(), diff); },
      [&] { kp::difference(op.edges, x.span(), diff2); }, gap);
  (void)sink;
  return 0;
}
