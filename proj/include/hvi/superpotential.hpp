#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "json.hpp"

namespace hvi {

/// Real polynomial, coefficients in ascending degree.
class Polynomial {
 public:
  Polynomial() : coeffs_{0.0} {}
  explicit Polynomial(std::vector<double> ascending);

  double operator()(double t) const;
  Polynomial derivative() const;
  /// Antiderivative with zero constant term.
  Polynomial antiderivative() const;
  Polynomial shifted_constant(double c) const;
  /// Degree after dropping trailing zero coefficients (zero polynomial: 0).
  int degree() const;
  const std::vector<double>& coefficients() const { return coeffs_; }

 private:
  std::vector<double> coeffs_;
};

/// beta on R, polynomial between strictly increasing breakpoints.
/// pieces[i] lives on (b[i-1], b[i]) with b[-1] = -inf and b[k] = +inf.
struct PiecewiseDensity {
  std::vector<double> breakpoints;
  std::vector<Polynomial> pieces;

  /// Throws InputError on a non-increasing breakpoint list or a piece count
  /// that does not equal breakpoints + 1.
  void validate() const;
  /// Piece containing t; at a breakpoint, the piece to its right.
  std::size_t piece_at(double t) const;
};

/// Filled-in subdifferential [lo, hi] of j at a point.
struct SubdifferentialInterval {
  double lo = 0.0;
  double hi = 0.0;

  double distance(double x) const { return x < lo ? lo - x : (x > hi ? x - hi : 0.0); }
  double project(double x) const { return x < lo ? lo : (x > hi ? hi : x); }
};

/// j(t) = int_0^t beta(s) ds for a piecewise-polynomial beta, together with
/// its Clarke calculus. Immutable.
class Superpotential {
 public:
  Superpotential();  // beta == 0
  explicit Superpotential(PiecewiseDensity density);

  const PiecewiseDensity& density() const { return density_; }

  /// j(t); continuous, j(0) = 0.
  double value(double t) const;
  double left_limit(double t) const;
  double right_limit(double t) const;
  /// [min, max] of the one-sided limits of beta at t.
  SubdifferentialInterval subdifferential(double t) const;
  /// j°(s; d) = max(lo d, hi d).
  double directional_derivative(double s, double d) const;

  /// Index of the breakpoint equal to t, if any.
  std::optional<std::size_t> breakpoint_at(double t) const;
  bool is_jump(std::size_t breakpoint) const;
  bool has_jumps() const;
  double max_jump() const;
  /// Smallest distance between consecutive breakpoints (+inf with < 2).
  double min_gap() const;

  /// beta'(t) on the piece containing t (right piece at breakpoints).
  double slope(double t) const;
  /// Upper bound of |beta'| over [lo, hi] (sampled per piece).
  double density_lipschitz(double lo, double hi) const;

 private:
  PiecewiseDensity density_;
  std::vector<Polynomial> antiderivatives_;
  std::vector<char> jumps_;
};

Superpotential build(PiecewiseDensity density);
SubdifferentialInterval subdifferential(const Superpotential& sp, double t);
double directional_derivative(const Superpotential& sp, double s, double d);

struct GrowthCertificate {
  double alpha_j = 0.0;
  double range_lo = 0.0;
  double range_hi = 0.0;
  /// True when the bound holds on all of R (all unbounded pieces affine).
  bool global = false;
};

/// Smallest alpha with max(|lo|,|hi|) of d j(s) <= alpha (1 + |s|) on [-R, R],
/// evaluated on breakpoints, interior extrema of beta(s)/(1+|s|) and a dense
/// grid. When `global`, alpha also covers the affine tails out to infinity.
GrowthCertificate growth_certificate(const Superpotential& sp, double R);

/// Lower estimate of the relaxed-monotonicity constant
/// max [j°(s;t-s) + j°(t;s-t)] / |t-s|^2 over a lattice in [-R, R] that
/// includes every breakpoint and points just beside it. Floored at 0.
double relaxed_monotonicity_estimate(const Superpotential& sp, double R, std::size_t samples);

/// sup over [-R, R] of max(|beta(t-0)|, |beta(t+0)|): the Lipschitz rank of j.
double lipschitz_rank(const Superpotential& sp, double R);

/// Replaces every jump at b by the linear ramp joining beta(b-h) on the left
/// piece and beta(b+h) on the right piece. Requires 0 < h < min_gap / 2.
Superpotential mollify(const Superpotential& sp, double h);

/// Piecewise-constant-in-time family: entry i is active for
/// until[i-1] < t <= until[i]; times past the last entry use the last one.
class SuperpotentialSchedule {
 public:
  SuperpotentialSchedule() = default;
  explicit SuperpotentialSchedule(Superpotential constant);
  void add(double until, Superpotential sp);
  const Superpotential& at(double t) const;
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }

 private:
  std::vector<std::pair<double, Superpotential>> entries_;
};

PiecewiseDensity parse_density(const nlohmann::json& doc);
nlohmann::json density_to_json(const PiecewiseDensity& d);
SuperpotentialSchedule parse_schedule(const nlohmann::json& doc);

}  // namespace hvi
