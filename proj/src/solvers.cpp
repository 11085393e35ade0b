#include "hvi/solvers.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>

#include "hvi/kernels.hpp"
#include "hvi/sobolev.hpp"

namespace hvi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kMonotonicitySamples = 801;
constexpr std::size_t kCgMaxIter = 20000;

struct Workspace {
  const WeightedGraph& g;
  AssembledOperator op;
  std::span<const double> mu;
  std::span<const double> f;
};

// (K + C) phi
std::vector<double> stiffness_apply(const AssembledOperator& op, std::span<const double> phi) {
  std::vector<double> y(phi.size());
  kernels::serial::spmv(op.stiffness, op.potential, phi, y);
  return y;
}

double mu_norm_of_scaled(std::span<const double> r, std::span<const double> mu) {
  // ||r / mu||_{l2(V,mu)}
  double s = 0.0;
  for (std::size_t v = 0; v < r.size(); ++v) s += r[v] * r[v] / mu[v];
  return std::sqrt(s);
}

double smooth_energy(const Workspace& w, const Superpotential& sp, std::span<const double> phi) {
  const auto a = stiffness_apply(w.op, phi);
  double e = 0.0;
  for (std::size_t v = 0; v < phi.size(); ++v) {
    e += 0.5 * a[v] * phi[v] + w.mu[v] * (sp.value(phi[v]) - w.f[v] * phi[v]);
  }
  return e;
}

// (K + C) phi + M (beta(phi) - f), with beta the right-continuous density.
std::vector<double> smooth_gradient(const Workspace& w, const Superpotential& sp, std::span<const double> phi) {
  auto g = stiffness_apply(w.op, phi);
  for (std::size_t v = 0; v < phi.size(); ++v) g[v] += w.mu[v] * (sp.right_limit(phi[v]) - w.f[v]);
  return g;
}

double exact_residual_norm(const Workspace& w, const Superpotential& sp, std::span<const double> phi) {
  const auto a = stiffness_apply(w.op, phi);
  double s = 0.0;
  for (std::size_t v = 0; v < phi.size(); ++v) {
    const double r = sp.subdifferential(phi[v]).distance(w.f[v] - a[v] / w.mu[v]);
    s += w.mu[v] * r * r;
  }
  return std::sqrt(s);
}

bool picard_step(const Workspace& w, const Superpotential& sp, std::vector<double>& phi, double linear_tol) {
  const auto [lo_it, hi_it] = std::minmax_element(phi.begin(), phi.end());
  const double sigma = std::max(sp.density_lipschitz(*lo_it - 1.0, *hi_it + 1.0), 1e-12);
  const std::size_t n = phi.size();
  std::vector<double> shift(n);
  NodeFunction rhs(n);
  for (std::size_t v = 0; v < n; ++v) {
    shift[v] = sigma * w.mu[v];
    rhs[v] = w.mu[v] * (w.f[v] - sp.right_limit(phi[v]) + sigma * phi[v]);
  }
  NodeFunction start(phi);
  auto res = conjugate_gradient(w.op, shift, rhs, linear_tol, kCgMaxIter, &start);
  if (res.indefinite) return false;
  phi = std::move(res.solution.values);
  return true;
}

// Damped semismooth Newton on the energy of a (continuous) density; Picard
// steps when Newton stalls. Returns the number of steps taken.
std::size_t smooth_solve(const Workspace& w, const Superpotential& sp, std::vector<double>& phi, double target,
                         const SolverOptions& opts, double& merit) {
  const std::size_t n = phi.size();
  auto grad = smooth_gradient(w, sp, phi);
  merit = mu_norm_of_scaled(grad, w.mu);
  std::size_t steps = 0;
  while (merit > target && steps < opts.max_inner) {
    ++steps;
    bool moved = false;
    if (opts.strategy == Strategy::semismooth_newton) {
      std::vector<double> slope(n);
      double sigma = 0.0;
      for (std::size_t v = 0; v < n; ++v) {
        slope[v] = sp.slope(phi[v]);
        sigma = std::max(sigma, -slope[v] - 0.5 * w.op.potential[v] / w.mu[v]);
      }
      NodeFunction rhs(n);
      for (std::size_t v = 0; v < n; ++v) rhs[v] = -grad[v];

      auto newton_direction = [&](double shift_level) -> std::optional<std::vector<double>> {
        std::vector<double> shift(n);
        for (std::size_t v = 0; v < n; ++v) shift[v] = w.mu[v] * (slope[v] + shift_level);
        // Jacobi preconditioner needs a positive diagonal.
        for (std::size_t v = 0; v < n; ++v) {
          if (!(w.op.stiffness.at(v, v) + w.op.potential[v] + shift[v] > 0.0)) return std::nullopt;
        }
        auto res = conjugate_gradient(w.op, shift, rhs, opts.linear_tol, kCgMaxIter);
        if (res.indefinite) return std::nullopt;
        double descent = 0.0;
        for (std::size_t v = 0; v < n; ++v) descent += grad[v] * res.solution[v];
        if (!(descent < 0.0)) return std::nullopt;
        return std::move(res.solution.values);
      };

      auto dir = newton_direction(0.0);
      if (!dir && sigma > 0.0) dir = newton_direction(sigma);
      if (dir) {
        const double e0 = smooth_energy(w, sp, phi);
        double slope0 = 0.0;
        for (std::size_t v = 0; v < n; ++v) slope0 += grad[v] * (*dir)[v];
        std::vector<double> trial(n);
        for (double t = 1.0; t > 1e-12; t *= 0.5) {
          for (std::size_t v = 0; v < n; ++v) trial[v] = phi[v] + t * (*dir)[v];
          auto trial_grad = smooth_gradient(w, sp, trial);
          const double trial_merit = mu_norm_of_scaled(trial_grad, w.mu);
          const bool armijo = smooth_energy(w, sp, trial) <= e0 + 1e-4 * t * slope0;
          if (armijo || trial_merit < merit) {
            phi.swap(trial);
            grad = std::move(trial_grad);
            merit = trial_merit;
            moved = true;
            break;
          }
        }
      }
    }
    if (!moved) {
      if (!picard_step(w, sp, phi, opts.linear_tol)) break;
      grad = smooth_gradient(w, sp, phi);
      merit = mu_norm_of_scaled(grad, w.mu);
    }
  }
  return steps;
}

std::vector<double> continuation_widths(const Superpotential& sp, const std::vector<double>& schedule) {
  std::vector<double> out;
  const double cap = 0.45 * sp.min_gap();
  for (double h : schedule) {
    const double c = std::min(h, cap);
    if (c > 0.0 && (out.empty() || c < out.back())) out.push_back(c);
  }
  return out;
}

// Exact active-set state of one node: pinned to a jump breakpoint, or free on
// the closure of one polynomial piece.
struct NodeState {
  bool pinned = false;
  std::size_t index = 0;  // breakpoint when pinned, piece otherwise

  bool operator<(const NodeState& o) const { return pinned != o.pinned ? pinned < o.pinned : index < o.index; }
  bool operator==(const NodeState& o) const { return pinned == o.pinned && index == o.index; }
};

class Polisher {
 public:
  Polisher(const Workspace& w, const Superpotential& sp, const SolverOptions& opts) : w_(w), sp_(sp), opts_(opts) {
    const auto& d = sp.density();
    for (const auto& p : d.pieces) slopes_.push_back(p.derivative());
  }

  std::vector<NodeState> classify(std::span<const double> phi, double width) const {
    const auto& b = sp_.density().breakpoints;
    std::vector<NodeState> s(phi.size());
    for (std::size_t v = 0; v < phi.size(); ++v) {
      const std::size_t piece = sp_.density().piece_at(phi[v]);
      s[v] = {false, piece};
      for (std::size_t k : {piece, piece == 0 ? b.size() : piece - 1}) {
        if (k < b.size() && sp_.is_jump(k) && std::abs(phi[v] - b[k]) <= width) s[v] = {true, k};
      }
    }
    return s;
  }

  // Newton on the free nodes with pinned nodes held at their breakpoints.
  std::size_t solve_free(const std::vector<NodeState>& state, std::vector<double>& phi) const {
    const auto& d = sp_.density();
    const std::size_t n = phi.size();
    std::vector<std::ptrdiff_t> slot(n, -1);
    std::vector<std::size_t> free;
    for (std::size_t v = 0; v < n; ++v) {
      if (state[v].pinned) {
        phi[v] = d.breakpoints[state[v].index];
      } else {
        slot[v] = static_cast<std::ptrdiff_t>(free.size());
        free.push_back(v);
      }
    }
    if (free.empty()) return 0;

    auto residual = [&](std::span<const double> x, Eigen::VectorXd& r) {
      const auto a = stiffness_apply(w_.op, x);
      r.resize(static_cast<Eigen::Index>(free.size()));
      for (std::size_t i = 0; i < free.size(); ++i) {
        const std::size_t v = free[i];
        r[static_cast<Eigen::Index>(i)] = a[v] + w_.mu[v] * (d.pieces[state[v].index](x[v]) - w_.f[v]);
      }
    };
    auto size = [&](const Eigen::VectorXd& r) {
      double s = 0.0;
      for (std::size_t i = 0; i < free.size(); ++i) s += r[static_cast<Eigen::Index>(i)] * r[static_cast<Eigen::Index>(i)] / w_.mu[free[i]];
      return std::sqrt(s);
    };

    Eigen::VectorXd r;
    residual(phi, r);
    double norm = size(r);
    std::size_t steps = 0;
    const double target = 1e-3 * opts_.tol;
    while (norm > target && steps < opts_.max_inner) {
      ++steps;
      std::vector<Eigen::Triplet<double>> trip;
      for (std::size_t i = 0; i < free.size(); ++i) {
        const std::size_t v = free[i];
        const auto& k = w_.op.stiffness;
        for (std::size_t p = k.offsets[v]; p < k.offsets[v + 1]; ++p) {
          const std::ptrdiff_t j = slot[k.cols[p]];
          if (j >= 0) trip.emplace_back(static_cast<int>(i), static_cast<int>(j), k.vals[p]);
        }
        trip.emplace_back(static_cast<int>(i), static_cast<int>(i),
                          w_.op.potential[v] + w_.mu[v] * slopes_[state[v].index](phi[v]));
      }
      const auto m = static_cast<Eigen::Index>(free.size());
      Eigen::SparseMatrix<double> jac(m, m);
      jac.setFromTriplets(trip.begin(), trip.end());
      Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
      lu.compute(jac);
      if (lu.info() != Eigen::Success) break;
      const Eigen::VectorXd delta = lu.solve(-r);
      if (lu.info() != Eigen::Success || !delta.allFinite()) break;

      std::vector<double> trial(phi);
      bool improved = false;
      Eigen::VectorXd tr;
      for (double t = 1.0; t > 1e-6; t *= 0.5) {
        for (std::size_t i = 0; i < free.size(); ++i) trial[free[i]] = phi[free[i]] + t * delta[static_cast<Eigen::Index>(i)];
        residual(trial, tr);
        if (size(tr) < norm) {
          improved = true;
          break;
        }
      }
      if (!improved) break;
      phi.swap(trial);
      r = std::move(tr);
      norm = size(r);
    }
    return steps;
  }

  // Moves nodes whose state is inconsistent with phi or with the selected
  // subgradient. Returns false when the state is consistent.
  bool update(std::vector<NodeState>& state, std::vector<double>& phi) const {
    const auto& d = sp_.density();
    const auto& b = d.breakpoints;
    const auto a = stiffness_apply(w_.op, phi);
    bool changed = false;
    for (std::size_t v = 0; v < phi.size(); ++v) {
      auto& s = state[v];
      if (s.pinned) {
        const double xi = w_.f[v] - a[v] / w_.mu[v];
        const auto iv = sp_.subdifferential(b[s.index]);
        if (xi > iv.hi) {
          s = {false, s.index + 1};
          changed = true;
        } else if (xi < iv.lo) {
          s = {false, s.index};
          changed = true;
        }
        continue;
      }
      const double left = s.index == 0 ? -kInf : b[s.index - 1];
      const double right = s.index == b.size() ? kInf : b[s.index];
      const double eps = 1e-12 * (1.0 + std::abs(phi[v]));
      if (phi[v] > right) {
        if (phi[v] - right <= eps) {
          phi[v] = right;
        } else {
          s = sp_.is_jump(s.index) ? NodeState{true, s.index} : NodeState{false, s.index + 1};
          changed = true;
        }
      } else if (phi[v] < left) {
        if (left - phi[v] <= eps) {
          phi[v] = left;
        } else {
          s = sp_.is_jump(s.index - 1) ? NodeState{true, s.index - 1} : NodeState{false, s.index - 1};
          changed = true;
        }
      }
    }
    return changed;
  }

 private:
  const Workspace& w_;
  const Superpotential& sp_;
  const SolverOptions& opts_;
  std::vector<Polynomial> slopes_;
};

}  // namespace

void ParabolicProblem::validate() const {
  if (!(T > 0.0) || !std::isfinite(T)) throw InputError("parabolic: T must be positive");
  if (steps == 0) throw InputError("parabolic: steps must be positive");
  if (schedule.empty()) throw InputError("parabolic: empty superpotential schedule");
  if (f_table.size() != 1 && f_table.size() != steps) {
    throw InputError("parabolic: f_table has " + std::to_string(f_table.size()) + " entries, expected 1 or " +
                     std::to_string(steps));
  }
  for (const auto& f : f_table) require_on(graph, f, "parabolic load");
  require_on(graph, phi0, "phi0");
}

std::vector<double> default_h_schedule() { return {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6}; }

const char* to_string(Certificate::Kind k) {
  return k == Certificate::Kind::existence_smallness ? "existence-smallness" : "uniqueness";
}

double sum_functional(const WeightedGraph& g, const Superpotential& sp, const NodeFunction& phi) {
  require_on(g, phi, "phi");
  double s = 0.0;
  for (std::size_t v = 0; v < phi.size(); ++v) s += g.mu()[v] * sp.value(phi[v]);
  return s;
}

double sum_directional_bound(const WeightedGraph& g, const Superpotential& sp, const NodeFunction& phi,
                             const NodeFunction& psi) {
  require_on(g, phi, "phi");
  require_on(g, psi, "psi");
  double s = 0.0;
  for (std::size_t v = 0; v < phi.size(); ++v) s += g.mu()[v] * sp.directional_derivative(phi[v], psi[v]);
  return s;
}

NodeFunction verify_inclusion(const WeightedGraph& g, const Superpotential& sp, const NodeFunction& phi,
                              const NodeFunction& f) {
  require_on(g, phi, "phi");
  require_on(g, f, "f");
  const auto lphi = apply(assemble(g), phi);
  NodeFunction r(phi.size());
  for (std::size_t v = 0; v < phi.size(); ++v) r[v] = sp.subdifferential(phi[v]).distance(f[v] - lphi[v]);
  return r;
}

double residual_norm(const WeightedGraph& g, const NodeFunction& r) {
  require_on(g, r, "residual");
  double s = 0.0;
  for (std::size_t v = 0; v < r.size(); ++v) s += g.mu()[v] * r[v] * r[v];
  return std::sqrt(s);
}

std::vector<double> hvi_residual(const WeightedGraph& g, const Superpotential& sp, const NodeFunction& phi,
                                 const NodeFunction& f, const std::vector<NodeFunction>& tests) {
  require_on(g, phi, "phi");
  require_on(g, f, "f");
  for (const auto& psi : tests) require_on(g, psi, "test function");
  const auto lphi = apply(assemble(g), phi);
  const auto mu = g.mu();
  const std::size_t n = phi.size();
  std::vector<double> out(tests.size());
  const auto count = static_cast<std::ptrdiff_t>(tests.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    const auto& psi = tests[static_cast<std::size_t>(i)];
    double s = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      const double d = psi[v] - phi[v];
      s += mu[v] * ((lphi[v] - f[v]) * d + sp.directional_derivative(phi[v], d));
    }
    out[static_cast<std::size_t>(i)] = s;
  }
  return out;
}

double energy(const WeightedGraph& g, const Superpotential& sp, const NodeFunction& f, const NodeFunction& phi) {
  require_on(g, f, "f");
  const auto op = assemble(g);
  return 0.5 * bilinear_form(op, phi, phi) + sum_functional(g, sp, phi) -
         kernels::parallel::weighted_dot(g.mu(), f.span(), phi.span());
}

double default_certify_range(const EllipticProblem& p) {
  double fmax = 0.0;
  for (double x : p.f.values) fmax = std::max(fmax, std::abs(x));
  const auto c = constants(p.graph);
  return std::max(1.0, 4.0 * (fmax + lipschitz_rank(p.sp, 1.0)) / c.m_kappa_lo);
}

std::vector<Certificate> certify(const EllipticProblem& p, double R) {
  if (!(R > 0.0)) throw std::invalid_argument("certify: R must be positive");
  const auto c = constants(p.graph);
  const double margin = c.hilbert_margin();
  const auto growth = growth_certificate(p.sp, R);
  const double alpha0 = relaxed_monotonicity_estimate(p.sp, R, kMonotonicitySamples);
  char window[64];
  std::snprintf(window, sizeof window, "on [-%g, %g]", R, R);
  const std::string range = growth.global ? "on R" : window;

  Certificate existence;
  existence.kind = Certificate::Kind::existence_smallness;
  existence.lhs = growth.alpha_j;
  existence.rhs = margin;
  existence.satisfied = existence.lhs < existence.rhs;
  existence.note = "alpha_J = alpha_j (affine term alpha_j*sqrt(mu(V))) " + range +
                   "; margin = m_coercive/2 = 1/2 min(min gamma/rho, min kappa/mu)";

  Certificate uniqueness;
  uniqueness.kind = Certificate::Kind::uniqueness;
  uniqueness.lhs = std::max(alpha0, growth.alpha_j);
  uniqueness.rhs = margin;
  uniqueness.satisfied = uniqueness.lhs < uniqueness.rhs;
  char note[160];
  std::snprintf(note, sizeof note, "max(alpha_j0 estimate %g, alpha_j %g) %s; same margin", alpha0, growth.alpha_j,
                window);
  uniqueness.note = note;
  if (!existence.satisfied) existence.note += "; smallness violated";
  if (!uniqueness.satisfied) uniqueness.note += "; uniqueness not certified";
  return {existence, uniqueness};
}

SolveReport solve_elliptic(const EllipticProblem& p, const SolverOptions& opts) {
  require_on(p.graph, p.f, "f");
  if (!(opts.tol > 0.0)) throw std::invalid_argument("solve_elliptic: tol must be positive");
  if (!(opts.linear_tol > 0.0)) throw std::invalid_argument("solve_elliptic: linear_tol must be positive");
  for (std::size_t i = 1; i < opts.h_schedule.size(); ++i) {
    if (!(opts.h_schedule[i] < opts.h_schedule[i - 1])) {
      throw std::invalid_argument("solve_elliptic: h_schedule must be strictly decreasing");
    }
  }
  const std::size_t n = p.graph.num_nodes();
  Workspace w{p.graph, assemble(p.graph), p.graph.mu(), p.f.span()};

  SolveReport report;
  std::vector<double> phi(n, 0.0);
  if (opts.initial) {
    require_on(p.graph, *opts.initial, "initial iterate");
    phi = opts.initial->values;
  }

  double last_width = 0.0;
  if (p.sp.has_jumps()) {
    const auto widths = continuation_widths(p.sp, opts.h_schedule);
    for (std::size_t i = 0; i < widths.size(); ++i) {
      const double h = widths[i];
      const auto smooth = mollify(p.sp, h);
      double merit = 0.0;
      const double target = std::max(0.1 * opts.tol, 1e-3 * h);
      const std::size_t steps = smooth_solve(w, smooth, phi, target, opts, merit);
      report.iterations.push_back({"continuation", h, steps, merit});
      last_width = h;
    }
  } else {
    double merit = 0.0;
    const std::size_t steps = smooth_solve(w, p.sp, phi, 0.1 * opts.tol, opts, merit);
    report.iterations.push_back({"continuation", 0.0, steps, merit});
  }

  std::vector<double> best = phi;
  double best_norm = exact_residual_norm(w, p.sp, phi);

  if (best_norm > opts.tol && !p.sp.density().breakpoints.empty()) {
    Polisher polish(w, p.sp, opts);
    auto state = polish.classify(phi, last_width * (1.0 + 1e-9));
    std::set<std::vector<NodeState>> seen;
    for (std::size_t round = 0; round < opts.max_outer; ++round) {
      if (!seen.insert(state).second) {
        report.warnings.push_back("active-set polish revisited a state; keeping best iterate");
        break;
      }
      const std::size_t steps = polish.solve_free(state, phi);
      const double norm = exact_residual_norm(w, p.sp, phi);
      report.iterations.push_back({"polish", 0.0, steps, norm});
      if (norm < best_norm) {
        best_norm = norm;
        best = phi;
      }
      if (!polish.update(state, phi)) break;
      if (best_norm <= opts.tol && norm <= opts.tol) break;
    }
  }

  report.phi = NodeFunction(best);
  report.xi = NodeFunction(n);
  report.inclusion_residual = NodeFunction(n);
  const auto a = stiffness_apply(w.op, best);
  for (std::size_t v = 0; v < n; ++v) {
    const auto iv = p.sp.subdifferential(best[v]);
    const double target = p.f[v] - a[v] / w.mu[v];
    report.xi[v] = iv.project(target);
    report.inclusion_residual[v] = iv.distance(target);
  }
  report.residual_norm = residual_norm(p.graph, report.inclusion_residual);
  report.converged = report.residual_norm <= opts.tol;
  if (!report.converged) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "no convergence: inclusion residual %.3g above tol %.3g", report.residual_norm,
                  opts.tol);
    report.warnings.push_back(buf);
  }

  if (opts.certify) {
    double R = opts.certify_range;
    if (!(R > 0.0)) {
      double amax = 0.0;
      for (double x : best) amax = std::max(amax, std::abs(x));
      R = std::max(default_certify_range(p), 1.5 * amax);
    }
    report.certificates = certify(p, R);
    for (const auto& c : report.certificates) {
      if (!c.satisfied) report.warnings.push_back(std::string(to_string(c.kind)) + " certificate not satisfied");
    }
    if (!report.certificates[1].satisfied) report.warnings.push_back("solution may not be unique");
  }
  return report;
}

ParabolicReport solve_parabolic(const ParabolicProblem& p, const SolverOptions& opts) {
  p.validate();
  const std::size_t n = p.graph.num_nodes();
  const double tau = p.tau();
  std::vector<double> kappa(n);
  for (std::size_t v = 0; v < n; ++v) kappa[v] = p.graph.kappa()[v] + p.graph.mu()[v] / tau;
  const WeightedGraph step_graph = p.graph.with_kappa(std::move(kappa));

  ParabolicReport out;
  out.tau = tau;
  out.trajectory.push_back(p.phi0);
  SolverOptions step_opts = opts;
  step_opts.certify = false;

  out.converged = true;
  for (std::size_t k = 1; k <= p.steps; ++k) {
    const double t = tau * static_cast<double>(k);
    const auto& prev = out.trajectory.back();
    NodeFunction f_eff(n);
    const auto& fk = p.load(k);
    for (std::size_t v = 0; v < n; ++v) f_eff[v] = fk[v] + prev[v] / tau;
    EllipticProblem step{step_graph, p.schedule.at(t), f_eff};
    step_opts.initial = prev;
    auto rep = solve_elliptic(step, step_opts);
    if (k == 1 && opts.certify) {
      double amax = 0.0;
      for (double x : rep.phi.values) amax = std::max(amax, std::abs(x));
      out.certificates = certify(step, std::max(default_certify_range(step), 1.5 * amax));
    }
    const bool ok = rep.converged;
    if (ok) out.trajectory.push_back(rep.phi);
    out.steps.push_back(std::move(rep));
    if (!ok) {
      out.converged = false;
      break;
    }
  }
  return out;
}

}  // namespace hvi
