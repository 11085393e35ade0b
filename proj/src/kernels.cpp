#include "hvi/kernels.hpp"

#include <algorithm>

#include <omp.h>

namespace hvi {

double CsrMatrix::at(std::size_t i, std::size_t j) const {
  for (std::size_t k = offsets[i]; k < offsets[i + 1]; ++k) {
    if (cols[k] == j) return vals[k];
  }
  return 0.0;
}

namespace kernels {

namespace {

inline double weight_of(const Edge& e, EdgeWeight which) { return which == EdgeWeight::rho ? e.rho : e.gamma; }

// Below this many entries the fork/join costs more than the loop.
constexpr std::size_t kParallelThreshold = 4096;

template <class BlockSum>
double blocked_reduce(std::size_t n, BlockSum&& block_sum) {
  const std::size_t blocks = (n + kReductionBlock - 1) / kReductionBlock;
  std::vector<double> partial(blocks, 0.0);
  const auto nb = static_cast<std::ptrdiff_t>(blocks);
#pragma omp parallel for schedule(static) if (n > kParallelThreshold)
  for (std::ptrdiff_t b = 0; b < nb; ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kReductionBlock;
    const std::size_t hi = std::min(n, lo + kReductionBlock);
    partial[static_cast<std::size_t>(b)] = block_sum(lo, hi);
  }
  double s = 0.0;
  for (double p : partial) s += p;
  return s;
}

}  // namespace

namespace serial {

void spmv(const CsrMatrix& a, std::span<const double> diag, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < a.rows; ++i) {
    double s = diag.empty() ? 0.0 : diag[i] * x[i];
    for (std::size_t k = a.offsets[i]; k < a.offsets[i + 1]; ++k) s += a.vals[k] * x[a.cols[k]];
    y[i] = s;
  }
}

double weighted_dot(std::span<const double> w, std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * x[i] * y[i];
  return s;
}

double edge_form(std::span<const Edge> edges, EdgeWeight which, std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (const auto& e : edges) s += weight_of(e, which) * (x[e.src] - x[e.dst]) * (y[e.src] - y[e.dst]);
  return s;
}

void difference(std::span<const Edge> edges, std::span<const double> x, std::span<double> out) {
  for (std::size_t k = 0; k < edges.size(); ++k) out[k] = x[edges[k].dst] - x[edges[k].src];
}

}  // namespace serial

namespace parallel {

void spmv(const CsrMatrix& a, std::span<const double> diag, std::span<const double> x, std::span<double> y) {
  const auto n = static_cast<std::ptrdiff_t>(a.rows);
#pragma omp parallel for schedule(static) if (a.rows > kParallelThreshold)
  for (std::ptrdiff_t ii = 0; ii < n; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    double s = diag.empty() ? 0.0 : diag[i] * x[i];
    for (std::size_t k = a.offsets[i]; k < a.offsets[i + 1]; ++k) s += a.vals[k] * x[a.cols[k]];
    y[i] = s;
  }
}

double weighted_dot(std::span<const double> w, std::span<const double> x, std::span<const double> y) {
  return blocked_reduce(x.size(), [&](std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += w[i] * x[i] * y[i];
    return s;
  });
}

double edge_form(std::span<const Edge> edges, EdgeWeight which, std::span<const double> x, std::span<const double> y) {
  return blocked_reduce(edges.size(), [&](std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t k = lo; k < hi; ++k) {
      const auto& e = edges[k];
      s += weight_of(e, which) * (x[e.src] - x[e.dst]) * (y[e.src] - y[e.dst]);
    }
    return s;
  });
}

void difference(std::span<const Edge> edges, std::span<const double> x, std::span<double> out) {
  const auto m = static_cast<std::ptrdiff_t>(edges.size());
#pragma omp parallel for schedule(static) if (edges.size() > kParallelThreshold)
  for (std::ptrdiff_t kk = 0; kk < m; ++kk) {
    const auto k = static_cast<std::size_t>(kk);
    out[k] = x[edges[k].dst] - x[edges[k].src];
  }
}

}  // namespace parallel

int max_threads() { return omp_get_max_threads(); }

}  // namespace kernels
}  // namespace hvi
