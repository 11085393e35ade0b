#include "hvi/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hvi {

AssembledOperator assemble(const WeightedGraph& g) {
  const std::size_t n = g.num_nodes();
  AssembledOperator op;
  op.potential.assign(g.kappa().begin(), g.kappa().end());
  op.mass.assign(g.mu().begin(), g.mu().end());
  op.edges = g.edges();

  auto& k = op.stiffness;
  k.rows = n;
  k.offsets.assign(1, 0);
  std::vector<std::pair<std::size_t, double>> row;
  for (std::size_t v = 0; v < n; ++v) {
    row.clear();
    double diag = 0.0;
    for (std::size_t e : g.out_edges(v)) {
      const auto& edge = g.edges()[e];
      diag += edge.gamma;
      row.emplace_back(edge.dst, -edge.gamma);
    }
    row.emplace_back(v, diag);
    std::sort(row.begin(), row.end());
    for (auto [col, val] : row) {
      k.cols.push_back(col);
      k.vals.push_back(val);
    }
    k.offsets.push_back(k.cols.size());
  }
  return op;
}

NodeFunction apply(const AssembledOperator& op, const NodeFunction& phi) {
  if (phi.size() != op.size()) throw DimensionError("apply: phi size does not match operator");
  NodeFunction out(op.size());
  kernels::parallel::spmv(op.stiffness, op.potential, phi.span(), out.values);
  for (std::size_t v = 0; v < out.size(); ++v) out[v] /= op.mass[v];
  return out;
}

double bilinear_form(const AssembledOperator& op, const NodeFunction& phi, const NodeFunction& psi) {
  if (phi.size() != op.size() || psi.size() != op.size()) {
    throw DimensionError("bilinear_form: argument size does not match operator");
  }
  return 0.5 * kernels::parallel::edge_form(op.edges, EdgeWeight::gamma, phi.span(), psi.span()) +
         kernels::parallel::weighted_dot(op.potential, phi.span(), psi.span());
}

OperatorConstants constants(const WeightedGraph& g) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  OperatorConstants c;
  c.m_gamma_lo = inf;
  c.m_gamma_hi = 0.0;
  for (const auto& e : g.edges()) {
    const double r = e.gamma / e.rho;
    c.m_gamma_lo = std::min(c.m_gamma_lo, r);
    c.m_gamma_hi = std::max(c.m_gamma_hi, r);
  }
  c.m_kappa_lo = inf;
  c.m_kappa_hi = 0.0;
  for (std::size_t v = 0; v < g.num_nodes(); ++v) {
    const double r = g.kappa()[v] / g.mu()[v];
    c.m_kappa_lo = std::min(c.m_kappa_lo, r);
    c.m_kappa_hi = std::max(c.m_kappa_hi, r);
  }
  c.m_coercive = std::min(c.m_gamma_lo, c.m_kappa_lo);
  c.m_bounded = std::max(c.m_gamma_hi, c.m_kappa_hi);
  return c;
}

void apply_shifted(const AssembledOperator& op, std::span<const double> extra, std::span<const double> x,
                   std::span<double> y) {
  kernels::serial::spmv(op.stiffness, op.potential, x, y);
  if (!extra.empty()) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += extra[i] * x[i];
  }
}

SpdSolve conjugate_gradient(const AssembledOperator& op, std::span<const double> shift, const NodeFunction& rhs,
                            double tol, std::size_t max_iter, const NodeFunction* initial) {
  const std::size_t n = op.size();
  if (rhs.size() != n) throw DimensionError("conjugate_gradient: rhs size does not match operator");
  if (!shift.empty() && shift.size() != n) throw DimensionError("conjugate_gradient: shift size does not match");
  if (!(tol > 0.0)) throw std::invalid_argument("conjugate_gradient: tol must be positive");

  std::vector<double> precond(n);
  for (std::size_t i = 0; i < n; ++i) {
    precond[i] = 1.0 / (op.stiffness.at(i, i) + op.potential[i] + (shift.empty() ? 0.0 : shift[i]));
  }
  return detail::preconditioned_cg([&](std::span<const double> x, std::span<double> y) { apply_shifted(op, shift, x, y); },
                                   precond, rhs, tol, max_iter, initial);
}

NodeFunction solve_spd(const AssembledOperator& op, std::span<const double> shift, const NodeFunction& rhs,
                       double tol, std::size_t max_iter) {
  for (double s : shift) {
    if (!(s >= 0.0)) throw std::invalid_argument("solve_spd: shift entries must be nonnegative");
  }
  auto res = conjugate_gradient(op, shift, rhs, tol, max_iter);
  if (!res.converged) {
    throw ConvergenceError("solve_spd: no convergence after " + std::to_string(res.iterations) +
                               " iterations (residual " + std::to_string(res.residual) + ")",
                           res.residual);
  }
  return std::move(res.solution);
}

}  // namespace hvi
