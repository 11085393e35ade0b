#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hvi/graph.hpp"

namespace hvi {

/// Compressed sparse row matrix, square, rows in canonical node order.
struct CsrMatrix {
  std::size_t rows = 0;
  std::vector<std::size_t> offsets{0};
  std::vector<std::size_t> cols;
  std::vector<double> vals;

  double at(std::size_t i, std::size_t j) const;
};

enum class EdgeWeight { rho, gamma };

// Two implementations of every hot loop. `serial` is the reference used by the
// single-solve state machines; `parallel` is the OpenMP variant used by the
// pure library surface and batch evaluations. Parallel reductions sum fixed
// blocks of kReductionBlock entries and then add the block partials in order,
// so their result does not depend on the thread count.
namespace kernels {

inline constexpr std::size_t kReductionBlock = 2048;

namespace serial {
/// y = A x + diag .* x   (diag may be empty)
void spmv(const CsrMatrix& a, std::span<const double> diag, std::span<const double> x, std::span<double> y);
/// sum_i w_i x_i y_i
double weighted_dot(std::span<const double> w, std::span<const double> x, std::span<const double> y);
/// sum_e weight(e) (x(e.src) - x(e.dst)) (y(e.src) - y(e.dst))
double edge_form(std::span<const Edge> edges, EdgeWeight which, std::span<const double> x, std::span<const double> y);
/// out(e) = x(e.dst) - x(e.src)
void difference(std::span<const Edge> edges, std::span<const double> x, std::span<double> out);
}  // namespace serial

namespace parallel {
void spmv(const CsrMatrix& a, std::span<const double> diag, std::span<const double> x, std::span<double> y);
double weighted_dot(std::span<const double> w, std::span<const double> x, std::span<const double> y);
double edge_form(std::span<const Edge> edges, EdgeWeight which, std::span<const double> x, std::span<const double> y);
void difference(std::span<const Edge> edges, std::span<const double> x, std::span<double> out);
}  // namespace parallel

/// Threads OpenMP will use for the parallel kernels.
int max_threads();

}  // namespace kernels
}  // namespace hvi
