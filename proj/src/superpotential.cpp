#include "hvi/superpotential.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "hvi/graph.hpp"

namespace hvi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kCertificationGrid = 1024;

bool differs(double a, double b) { return std::abs(a - b) > 1e-14 * (1.0 + std::abs(a) + std::abs(b)); }

Polynomial times_one_plus(const Polynomial& p, double sign) {
  // p(s) * (1 + sign * s)
  const auto& c = p.coefficients();
  std::vector<double> out(c.size() + 1, 0.0);
  for (std::size_t i = 0; i < c.size(); ++i) {
    out[i] += c[i];
    out[i + 1] += sign * c[i];
  }
  return Polynomial(std::move(out));
}

Polynomial plus(const Polynomial& a, const Polynomial& b, double scale_b) {
  std::vector<double> out(std::max(a.coefficients().size(), b.coefficients().size()), 0.0);
  for (std::size_t i = 0; i < a.coefficients().size(); ++i) out[i] += a.coefficients()[i];
  for (std::size_t i = 0; i < b.coefficients().size(); ++i) out[i] += scale_b * b.coefficients()[i];
  return Polynomial(std::move(out));
}

// Maximizes `value` over [a, c]: endpoints, a uniform grid, and every root of
// `critical` located by sign change + bisection.
double maximize_on_segment(const std::function<double(double)>& value, const Polynomial& critical, double a,
                           double c) {
  double best = std::max(value(a), value(c));
  if (!(c > a)) return best;
  const std::size_t n = kCertificationGrid;
  double prev_s = a;
  double prev_n = critical(a);
  for (std::size_t k = 1; k <= n; ++k) {
    const double s = (k == n) ? c : a + (c - a) * static_cast<double>(k) / static_cast<double>(n);
    const double cur_n = critical(s);
    best = std::max(best, value(s));
    if (prev_n == 0.0) {
      best = std::max(best, value(prev_s));
    } else if ((prev_n < 0.0) != (cur_n < 0.0)) {
      double lo = prev_s, hi = s, flo = prev_n;
      for (int it = 0; it < 80 && hi - lo > 0.0; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = critical(mid);
        if ((fm < 0.0) == (flo < 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      best = std::max({best, value(lo), value(hi)});
    }
    prev_s = s;
    prev_n = cur_n;
  }
  return best;
}

// Segments of piece i clipped to [lo, hi] and split at 0.
std::vector<std::pair<double, double>> clipped_segments(const PiecewiseDensity& d, std::size_t i, double lo,
                                                        double hi) {
  const double left = i == 0 ? -kInf : d.breakpoints[i - 1];
  const double right = i == d.breakpoints.size() ? kInf : d.breakpoints[i];
  const double a = std::max(left, lo);
  const double c = std::min(right, hi);
  std::vector<std::pair<double, double>> out;
  if (a > c) return out;
  if (a < 0.0 && c > 0.0) {
    out.emplace_back(a, 0.0);
    out.emplace_back(0.0, c);
  } else {
    out.emplace_back(a, c);
  }
  return out;
}

}  // namespace

Polynomial::Polynomial(std::vector<double> ascending) : coeffs_(std::move(ascending)) {
  if (coeffs_.empty()) throw InputError("empty coefficient list");
}

double Polynomial::operator()(double t) const {
  double s = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) s = s * t + *it;
  return s;
}

Polynomial Polynomial::derivative() const {
  if (coeffs_.size() == 1) return Polynomial({0.0});
  std::vector<double> out(coeffs_.size() - 1);
  for (std::size_t i = 1; i < coeffs_.size(); ++i) out[i - 1] = static_cast<double>(i) * coeffs_[i];
  return Polynomial(std::move(out));
}

Polynomial Polynomial::antiderivative() const {
  std::vector<double> out(coeffs_.size() + 1, 0.0);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) out[i + 1] = coeffs_[i] / static_cast<double>(i + 1);
  return Polynomial(std::move(out));
}

Polynomial Polynomial::shifted_constant(double c) const {
  auto out = coeffs_;
  out[0] += c;
  return Polynomial(std::move(out));
}

int Polynomial::degree() const {
  int d = static_cast<int>(coeffs_.size()) - 1;
  while (d > 0 && coeffs_[static_cast<std::size_t>(d)] == 0.0) --d;
  return d;
}

void PiecewiseDensity::validate() const {
  if (pieces.size() != breakpoints.size() + 1) {
    throw InputError("density needs exactly one more piece than breakpoints (got " + std::to_string(pieces.size()) +
                     " pieces, " + std::to_string(breakpoints.size()) + " breakpoints)");
  }
  for (std::size_t i = 0; i < breakpoints.size(); ++i) {
    if (!std::isfinite(breakpoints[i])) throw InputError("non-finite breakpoint");
    if (i > 0 && !(breakpoints[i] > breakpoints[i - 1])) throw InputError("breakpoints are not strictly increasing");
  }
  for (const auto& p : pieces) {
    for (double c : p.coefficients()) {
      if (!std::isfinite(c)) throw InputError("non-finite density coefficient");
    }
  }
}

std::size_t PiecewiseDensity::piece_at(double t) const {
  return static_cast<std::size_t>(std::upper_bound(breakpoints.begin(), breakpoints.end(), t) - breakpoints.begin());
}

Superpotential::Superpotential() : Superpotential(PiecewiseDensity{{}, {Polynomial({0.0})}}) {}

Superpotential::Superpotential(PiecewiseDensity density) : density_(std::move(density)) {
  density_.validate();
  const auto& b = density_.breakpoints;
  const auto& p = density_.pieces;
  const std::size_t k = p.size();

  std::vector<Polynomial> prim(k);
  for (std::size_t i = 0; i < k; ++i) prim[i] = p[i].antiderivative();
  antiderivatives_ = prim;
  const std::size_t z = density_.piece_at(0.0);
  for (std::size_t i = z; i + 1 < k; ++i) {
    const double at = b[i];
    antiderivatives_[i + 1] = prim[i + 1].shifted_constant(antiderivatives_[i](at) - prim[i + 1](at));
  }
  for (std::size_t i = z; i > 0; --i) {
    const double at = b[i - 1];
    antiderivatives_[i - 1] = prim[i - 1].shifted_constant(antiderivatives_[i](at) - prim[i - 1](at));
  }

  jumps_.resize(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) jumps_[i] = differs(p[i](b[i]), p[i + 1](b[i])) ? 1 : 0;
}

double Superpotential::value(double t) const { return antiderivatives_[density_.piece_at(t)](t); }

std::optional<std::size_t> Superpotential::breakpoint_at(double t) const {
  const auto& b = density_.breakpoints;
  auto it = std::lower_bound(b.begin(), b.end(), t);
  if (it != b.end() && *it == t) return static_cast<std::size_t>(it - b.begin());
  return std::nullopt;
}

double Superpotential::left_limit(double t) const {
  if (auto k = breakpoint_at(t)) return density_.pieces[*k](t);
  return density_.pieces[density_.piece_at(t)](t);
}

double Superpotential::right_limit(double t) const { return density_.pieces[density_.piece_at(t)](t); }

SubdifferentialInterval Superpotential::subdifferential(double t) const {
  const double l = left_limit(t);
  const double r = right_limit(t);
  return {std::min(l, r), std::max(l, r)};
}

double Superpotential::directional_derivative(double s, double d) const {
  const auto iv = subdifferential(s);
  return std::max(iv.lo * d, iv.hi * d);
}

bool Superpotential::is_jump(std::size_t breakpoint) const { return jumps_[breakpoint] != 0; }

bool Superpotential::has_jumps() const { return std::any_of(jumps_.begin(), jumps_.end(), [](char c) { return c; }); }

double Superpotential::max_jump() const {
  double m = 0.0;
  for (std::size_t i = 0; i < jumps_.size(); ++i) {
    const double b = density_.breakpoints[i];
    m = std::max(m, std::abs(density_.pieces[i + 1](b) - density_.pieces[i](b)));
  }
  return m;
}

double Superpotential::min_gap() const {
  double g = kInf;
  const auto& b = density_.breakpoints;
  for (std::size_t i = 1; i < b.size(); ++i) g = std::min(g, b[i] - b[i - 1]);
  return g;
}

double Superpotential::slope(double t) const { return density_.pieces[density_.piece_at(t)].derivative()(t); }

double Superpotential::density_lipschitz(double lo, double hi) const {
  double best = 0.0;
  for (std::size_t i = 0; i < density_.pieces.size(); ++i) {
    const auto d1 = density_.pieces[i].derivative();
    const auto d2 = d1.derivative();
    for (auto [a, c] : clipped_segments(density_, i, lo, hi)) {
      best = std::max(best, maximize_on_segment([&](double s) { return std::abs(d1(s)); }, d2, a, c));
    }
  }
  return best;
}

Superpotential build(PiecewiseDensity density) { return Superpotential(std::move(density)); }

SubdifferentialInterval subdifferential(const Superpotential& sp, double t) { return sp.subdifferential(t); }

double directional_derivative(const Superpotential& sp, double s, double d) { return sp.directional_derivative(s, d); }

GrowthCertificate growth_certificate(const Superpotential& sp, double R) {
  if (!(R > 0.0)) throw std::invalid_argument("growth_certificate: R must be positive");
  const auto& d = sp.density();
  const auto& first = d.pieces.front();
  const auto& last = d.pieces.back();
  const bool global = first.degree() <= 1 && last.degree() <= 1;

  double reach = R;
  if (global && !d.breakpoints.empty()) {
    reach = std::max({R, std::abs(d.breakpoints.front()), std::abs(d.breakpoints.back())});
  }

  double alpha = 0.0;
  for (std::size_t i = 0; i < d.pieces.size(); ++i) {
    const auto& p = d.pieces[i];
    const auto dp = p.derivative();
    for (auto [a, c] : clipped_segments(d, i, -reach, reach)) {
      const double sign = (a >= 0.0) ? 1.0 : -1.0;
      // d/ds p(s)/(1+|s|) vanishes where p'(s)(1+|s|) - sign p(s) = 0.
      const Polynomial critical = plus(times_one_plus(dp, sign), p, -sign);
      alpha = std::max(alpha, maximize_on_segment(
                                  [&](double s) { return std::abs(p(s)) / (1.0 + std::abs(s)); }, critical, a, c));
    }
  }

  if (global) {
    // |a + b s| / (1 + |s|) is monotone on each tail; its sup is the value at
    // the edge of the certified range or the limit |b|.
    auto tail = [&](const Polynomial& p, double edge) {
      const double slope_at_inf = p.coefficients().size() > 1 ? std::abs(p.coefficients()[1]) : 0.0;
      return std::max(std::abs(p(edge)) / (1.0 + std::abs(edge)), slope_at_inf);
    };
    alpha = std::max({alpha, tail(last, reach), tail(first, -reach)});
  }
  return {alpha, -R, R, global};
}

double relaxed_monotonicity_estimate(const Superpotential& sp, double R, std::size_t samples) {
  if (!(R > 0.0)) throw std::invalid_argument("relaxed_monotonicity_estimate: R must be positive");
  if (samples < 2) throw std::invalid_argument("relaxed_monotonicity_estimate: need at least 2 samples");
  std::vector<double> lattice;
  lattice.reserve(samples + 3 * sp.density().breakpoints.size());
  for (std::size_t k = 0; k < samples; ++k) {
    lattice.push_back(-R + 2.0 * R * static_cast<double>(k) / static_cast<double>(samples - 1));
  }
  const double offset = 1e-6 * std::max(1.0, R);
  for (double b : sp.density().breakpoints) {
    if (b < -R || b > R) continue;
    lattice.push_back(b);
    if (b - offset >= -R) lattice.push_back(b - offset);
    if (b + offset <= R) lattice.push_back(b + offset);
  }
  std::sort(lattice.begin(), lattice.end());
  lattice.erase(std::unique(lattice.begin(), lattice.end()), lattice.end());

  std::vector<SubdifferentialInterval> iv(lattice.size());
  for (std::size_t i = 0; i < lattice.size(); ++i) iv[i] = sp.subdifferential(lattice[i]);

  double best = 0.0;
  for (std::size_t i = 0; i < lattice.size(); ++i) {
    for (std::size_t k = i + 1; k < lattice.size(); ++k) {
      const double s = lattice[i];
      const double t = lattice[k];
      const double h = t - s;
      // j°(s; h) + j°(t; -h) with h > 0
      const double num = iv[i].hi * h - iv[k].lo * h;
      best = std::max(best, num / (h * h));
    }
  }
  return best;
}

double lipschitz_rank(const Superpotential& sp, double R) {
  const auto& d = sp.density();
  double best = 0.0;
  for (std::size_t i = 0; i < d.pieces.size(); ++i) {
    const auto& p = d.pieces[i];
    for (auto [a, c] : clipped_segments(d, i, -R, R)) {
      best = std::max(best, maximize_on_segment([&](double s) { return std::abs(p(s)); }, p.derivative(), a, c));
    }
  }
  return best;
}

Superpotential mollify(const Superpotential& sp, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("mollify: ramp width must be positive");
  if (!(h < 0.5 * sp.min_gap())) throw std::invalid_argument("mollify: ramp width too large for breakpoint spacing");
  const auto& d = sp.density();
  PiecewiseDensity out;
  out.pieces.push_back(d.pieces.front());
  for (std::size_t i = 0; i < d.breakpoints.size(); ++i) {
    const double b = d.breakpoints[i];
    const auto& next = d.pieces[i + 1];
    if (sp.is_jump(i)) {
      const double x0 = b - h;
      const double x1 = b + h;
      const double v0 = d.pieces[i](x0);
      const double v1 = next(x1);
      const double m = (v1 - v0) / (x1 - x0);
      out.breakpoints.push_back(x0);
      out.pieces.push_back(Polynomial({v0 - m * x0, m}));
      out.breakpoints.push_back(x1);
    } else {
      out.breakpoints.push_back(b);
    }
    out.pieces.push_back(next);
  }
  return Superpotential(std::move(out));
}

SuperpotentialSchedule::SuperpotentialSchedule(Superpotential constant) {
  entries_.emplace_back(kInf, std::move(constant));
}

void SuperpotentialSchedule::add(double until, Superpotential sp) {
  if (!entries_.empty() && !(until > entries_.back().first)) {
    throw InputError("schedule 'until' values must be strictly increasing");
  }
  entries_.emplace_back(until, std::move(sp));
}

const Superpotential& SuperpotentialSchedule::at(double t) const {
  if (entries_.empty()) throw std::logic_error("empty superpotential schedule");
  for (const auto& [until, sp] : entries_) {
    if (t <= until) return sp;
  }
  return entries_.back().second;
}

PiecewiseDensity parse_density(const nlohmann::json& doc) {
  if (!doc.is_object()) throw InputError("superpotential document is not an object");
  for (const auto& [key, _] : doc.items()) {
    if (key != "breakpoints" && key != "pieces") throw InputError("unknown key '" + key + "' in superpotential");
  }
  PiecewiseDensity d;
  if (auto it = doc.find("breakpoints"); it != doc.end()) {
    if (!it->is_array()) throw InputError("'breakpoints' is not an array");
    for (const auto& b : *it) {
      if (!b.is_number()) throw InputError("breakpoint is not a number");
      d.breakpoints.push_back(b.get<double>());
    }
  }
  auto it = doc.find("pieces");
  if (it == doc.end() || !it->is_array()) throw InputError("superpotential lacks a 'pieces' array");
  for (const auto& piece : *it) {
    if (!piece.is_array()) throw InputError("density piece is not an array of coefficients");
    std::vector<double> c;
    for (const auto& x : piece) {
      if (!x.is_number()) throw InputError("density coefficient is not a number");
      c.push_back(x.get<double>());
    }
    d.pieces.emplace_back(std::move(c));
  }
  d.validate();
  return d;
}

nlohmann::json density_to_json(const PiecewiseDensity& d) {
  nlohmann::json pieces = nlohmann::json::array();
  for (const auto& p : d.pieces) pieces.push_back(p.coefficients());
  return {{"breakpoints", d.breakpoints}, {"pieces", std::move(pieces)}};
}

SuperpotentialSchedule parse_schedule(const nlohmann::json& doc) {
  if (!doc.is_array() || doc.empty()) throw InputError("superpotential schedule must be a non-empty array");
  SuperpotentialSchedule s;
  for (const auto& entry : doc) {
    if (!entry.is_object()) throw InputError("schedule entry is not an object");
    for (const auto& [key, _] : entry.items()) {
      if (key != "until" && key != "density") throw InputError("unknown key '" + key + "' in schedule entry");
    }
    if (!entry.contains("until") || !entry["until"].is_number()) throw InputError("schedule entry lacks numeric 'until'");
    if (!entry.contains("density")) throw InputError("schedule entry lacks 'density'");
    s.add(entry["until"].get<double>(), Superpotential(parse_density(entry["density"])));
  }
  return s;
}

}  // namespace hvi
