#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "hvi/graph.hpp"
#include "hvi/kernels.hpp"

namespace hvi {

/// L = M^{-1} (K + C) in canonical node order, where
///   (K phi)(v) = sum_{w~v} gamma(v,w) (phi(v) - phi(w)),  C = diag(kappa),  M = diag(mu).
struct AssembledOperator {
  CsrMatrix stiffness;
  std::vector<double> potential;
  std::vector<double> mass;
  /// Directed edges, kept for the edge-sum form of the bilinear form.
  std::vector<Edge> edges;

  std::size_t size() const { return mass.size(); }
};

AssembledOperator assemble(const WeightedGraph& g);

/// (L phi)(v) = (1/mu(v)) [ sum_{w~v} gamma(v,w)(phi(v)-phi(w)) + kappa(v) phi(v) ].
NodeFunction apply(const AssembledOperator& op, const NodeFunction& phi);

/// 1/2 sum_{(v,w) in E} gamma (phi(v)-phi(w)) (psi(v)-psi(w)) + sum_v kappa phi psi.
/// Equals <L phi, psi>_{l2(V,mu)}.
double bilinear_form(const AssembledOperator& op, const NodeFunction& phi, const NodeFunction& psi);

/// Data-derived ratio extrema of gamma/rho and kappa/mu.
struct OperatorConstants {
  double m_gamma_lo = 0.0;
  double m_gamma_hi = 0.0;
  double m_kappa_lo = 0.0;
  double m_kappa_hi = 0.0;
  /// <L phi, phi> >= m_coercive (1/2 ||I^T phi||^2 + ||phi||^2)
  double m_coercive = 0.0;
  double m_bounded = 0.0;

  /// Strong-monotonicity constant against the squared W-Hilbert norm:
  /// <L phi, phi> >= margin ||phi||_W^2 with margin = m_coercive / 2.
  double hilbert_margin() const { return 0.5 * m_coercive; }
};

/// Edgeless graphs have no gamma/rho ratios; they contribute +inf / 0 to the
/// gamma extrema so that m_coercive and m_bounded come from kappa/mu alone.
OperatorConstants constants(const WeightedGraph& g);

/// y = K x + (kappa + extra) .* x, serial reference kernel.
void apply_shifted(const AssembledOperator& op, std::span<const double> extra, std::span<const double> x,
                   std::span<double> y);

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual) : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

struct SpdSolve {
  NodeFunction solution;
  std::size_t iterations = 0;
  /// ||(K + C + shift) x - rhs||_2
  double residual = 0.0;
  bool converged = false;
  /// Non-positive curvature met: the shifted matrix is not positive definite.
  bool indefinite = false;
};

namespace detail {

/// Preconditioned CG for a symmetric operator given as `apply(x, y)` (y = A x)
/// with diagonal preconditioner `inv_diag`. Serial and deterministic.
template <class Apply>
SpdSolve preconditioned_cg(Apply&& apply, std::span<const double> inv_diag, const NodeFunction& rhs, double tol,
                           std::size_t max_iter, const NodeFunction* initial) {
  const std::size_t n = rhs.size();
  auto dot = [](std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
  };

  SpdSolve out;
  out.solution = initial ? *initial : NodeFunction(n);
  auto& x = out.solution.values;
  std::vector<double> r(n), z(n), p(n), ap(n);
  apply(std::span<const double>(x), std::span<double>(ap));
  for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - ap[i];
  const double rhs_norm = std::sqrt(dot(rhs.span(), rhs.span()));
  const double target = tol * rhs_norm;
  double rnorm = std::sqrt(dot(r, r));
  if (rnorm == 0.0) {
    out.converged = true;
    return out;
  }

  for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
  p = z;
  double rz = dot(r, z);
  std::size_t it = 0;
  while (rnorm > target && it < max_iter) {
    apply(std::span<const double>(p), std::span<double>(ap));
    const double curvature = dot(p, ap);
    if (!(curvature > 0.0)) {
      out.indefinite = true;
      break;
    }
    const double alpha = rz / curvature;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    ++it;
    rnorm = std::sqrt(dot(r, r));
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    const double rz_next = dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }

  apply(std::span<const double>(x), std::span<double>(ap));
  for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - ap[i];
  out.residual = std::sqrt(dot(r, r));
  out.iterations = it;
  // The recurrence residual can undershoot the true one by a few ulps of
  // ||rhs||; accept that drift.
  const double floor = 16.0 * std::numeric_limits<double>::epsilon() * rhs_norm;
  out.converged = !out.indefinite && out.residual <= std::max(target, floor);
  return out;
}

}  // namespace detail

/// Jacobi-preconditioned conjugate gradients on (K + C + diag(shift)).
/// Requires kappa + shift > 0 entrywise; stops when
/// ||r||_2 <= tol ||rhs||_2. Deterministic for fixed inputs.
SpdSolve conjugate_gradient(const AssembledOperator& op, std::span<const double> shift, const NodeFunction& rhs,
                            double tol, std::size_t max_iter, const NodeFunction* initial = nullptr);

/// As conjugate_gradient with shift >= 0 required; throws ConvergenceError
/// (carrying the residual) when max_iter is exhausted.
NodeFunction solve_spd(const AssembledOperator& op, std::span<const double> shift, const NodeFunction& rhs,
                       double tol, std::size_t max_iter);

}  // namespace hvi
