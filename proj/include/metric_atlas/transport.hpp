#pragma once

// Geometry-aware metrics: discrepancy, Kolmogorov, Levy, Prokhorov and
// Wasserstein, on finite metric spaces and on the real line.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include "metric_atlas/max_flow.hpp"
#include "metric_atlas/min_cost_flow.hpp"
#include "metric_atlas/numeric.hpp"
#include "metric_atlas/spaces.hpp"

namespace metric_atlas {

// ---------------------------------------------------------------------------
// Discrepancy

/// sup over closed balls B of |mu(B) - nu(B)|, exact on finite spaces.
/// For each center the points are swept in order of distance and the
/// running difference is read off at every distinct radius.
inline double discrepancyFinite(const DiscreteDistribution& mu,
                                const DiscreteDistribution& nu) {
  requireSameSpace(mu, nu);
  const FiniteMetricSpace& space = mu.space();
  const std::size_t n = space.size();
  std::vector<std::size_t> order(n);
  double best = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return space.distance(c, a) < space.distance(c, b);
    });
    CompensatedSum diff;
    for (std::size_t k = 0; k < n; ++k) {
      diff += mu[order[k]] - nu[order[k]];
      const bool radiusEnds =
          k + 1 == n || space.distance(c, order[k + 1]) !=
                            space.distance(c, order[k]);
      if (radiusEnds) best = std::max(best, std::abs(diff.value()));
    }
  }
  return std::min(best, 1.0);
}

/// sup over closed intervals [a, b] of |mu([a, b]) - nu([a, b])| for an
/// atomic mu against a continuous nu.
///
/// mu - nu is maximised by intervals whose endpoints are atoms; nu - mu by
/// the open gaps between atoms (approached by closed intervals). Both are
/// "max A_j - min_{i<=j} B_i" problems solved with a running minimum.
inline double discrepancyRealMixed(const RealAtomicDistribution& mu,
                                   const SmoothRealCdf& nu) {
  if (nu.evalTolerance() > 1e-9) {
    throw std::domain_error(
        "discrepancyRealMixed: oracle tolerance exceeds the 1e-9 budget");
  }
  const auto atoms = mu.atoms();
  const std::size_t m = atoms.size();
  if (atoms.front().x < nu.lower() || atoms.back().x > nu.upper()) {
    throw std::invalid_argument(
        "discrepancyRealMixed: atoms lie outside the truncation interval");
  }
  std::vector<double> g(m);
  for (std::size_t i = 0; i < m; ++i) g[i] = nu(atoms[i].x);
  auto cumulative = [&](std::size_t j) {  // W_j, j in 0..m
    return j == 0 ? 0.0 : mu.cumulative(j - 1);
  };

  double best = 0.0;
  // Excess of mu on [x_i, x_j]: (W_j - G_j) - (W_{i-1} - G_i).
  double minB = kInfinity;
  for (std::size_t j = 1; j <= m; ++j) {
    minB = std::min(minB, cumulative(j - 1) - g[j - 1]);
    best = std::max(best, (cumulative(j) - g[j - 1]) - minB);
  }
  // Excess of nu on (x_i, x_j) with x_0 = -inf, x_{m+1} = +inf:
  // (G_j - W_{j-1}) - (G_i - W_i).
  double minC = 0.0;  // i = 0: G = 0, W = 0
  for (std::size_t j = 1; j <= m + 1; ++j) {
    const double gj = j == m + 1 ? 1.0 : g[j - 1];
    best = std::max(best, (gj - cumulative(j - 1)) - minC);
    if (j <= m) minC = std::min(minC, g[j - 1] - cumulative(j));
  }
  return std::clamp(best, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Kolmogorov

/// sup_x |F(x) - G(x)|; exact for two step functions, since both are
/// constant between consecutive merged atoms.
inline double kolmogorov(const RealAtomicDistribution& f,
                         const RealAtomicDistribution& g) {
  double best = 0.0;
  for (const Atom& a : f.atoms()) {
    best = std::max(best, std::abs(f.cdf(a.x) - g.cdf(a.x)));
  }
  for (const Atom& a : g.atoms()) {
    best = std::max(best, std::abs(f.cdf(a.x) - g.cdf(a.x)));
  }
  return best;
}

/// sup_x |F(x) - G(x)| for atomic F and continuous G: both one-sided limits
/// of F are compared with G at every atom.
inline double kolmogorov(const RealAtomicDistribution& f,
                         const SmoothRealCdf& g) {
  double best = 0.0;
  for (const Atom& a : f.atoms()) {
    const double gx = g(a.x);
    best = std::max(best, std::abs(f.cdf(a.x) - gx));
    best = std::max(best, std::abs(f.cdfLeft(a.x) - gx));
  }
  return std::min(best, 1.0);
}

// ---------------------------------------------------------------------------
// Levy

namespace detail {

inline constexpr double kLevyTolerance = 1e-12;

template <class Feasible>
double bisectLevy(Feasible feasible) {
  if (feasible(0.0)) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  while (hi - lo > kLevyTolerance) {
    const double mid = 0.5 * (lo + hi);
    if (feasible(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

}  // namespace detail

/// Whether G(x-eps) - eps <= F(x) <= G(x+eps) + eps for all x, for two step
/// CDFs. Both sides are piecewise constant with breakpoints at atoms and at
/// atoms shifted by eps, so checking those points is exact.
inline bool levyFeasible(const RealAtomicDistribution& f,
                         const RealAtomicDistribution& g, double eps) {
  for (const Atom& a : f.atoms()) {
    if (f.cdf(a.x) > g.cdf(a.x + eps) + eps) return false;
    if (g.cdf(a.x - eps) - eps > f.cdf(a.x)) return false;
  }
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double x = g.atoms()[j].x;
    const double gx = g.cumulative(j);
    if (f.cdf(x - eps) > gx + eps) return false;
    if (gx - eps > f.cdf(x + eps)) return false;
  }
  return true;
}

/// Levy distance between step CDFs, bisected to 1e-12 (upper end).
inline double levy(const RealAtomicDistribution& f,
                   const RealAtomicDistribution& g) {
  return detail::bisectLevy(
      [&](double eps) { return levyFeasible(f, g, eps); });
}

/// Levy feasibility for step F against continuous G.
inline bool levyFeasible(const RealAtomicDistribution& f,
                         const SmoothRealCdf& g, double eps) {
  const auto atoms = f.atoms();
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    const double fk = f.cumulative(k);
    if (fk > g(atoms[k].x + eps) + eps) return false;
    const double before = k == 0 ? 0.0 : f.cumulative(k - 1);
    if (g(atoms[k].x - eps) - eps > before) return false;
  }
  return true;
}

inline double levy(const RealAtomicDistribution& f, const SmoothRealCdf& g) {
  return detail::bisectLevy(
      [&](double eps) { return levyFeasible(f, g, eps); });
}

// ---------------------------------------------------------------------------
// Prokhorov

/// min over couplings of Pr(d(X, Y) > delta), by max-flow on the bipartite
/// graph that only joins pairs at distance <= delta.
inline double minimalMismatch(const DiscreteDistribution& mu,
                              const DiscreteDistribution& nu, double delta) {
  const FiniteMetricSpace& space = mu.space();
  const PointSet left = mu.support();
  const PointSet right = nu.support();
  const std::size_t source = left.size() + right.size();
  const std::size_t sink = source + 1;
  MaxFlow flow(sink + 1);
  std::vector<std::size_t> sourceEdges;
  sourceEdges.reserve(left.size());
  for (std::size_t a = 0; a < left.size(); ++a) {
    sourceEdges.push_back(flow.addEdge(source, a, mu[left[a]]));
  }
  for (std::size_t b = 0; b < right.size(); ++b) {
    flow.addEdge(left.size() + b, sink, nu[right[b]]);
  }
  for (std::size_t a = 0; a < left.size(); ++a) {
    for (std::size_t b = 0; b < right.size(); ++b) {
      if (space.distance(left[a], right[b]) <= delta) {
        flow.addEdge(a, left.size() + b, 2.0);
      }
    }
  }
  flow.solve(source, sink);
  // Summing the unrouted mass per atom keeps a saturated network at exactly 0.
  CompensatedSum unrouted;
  for (std::size_t a = 0; a < left.size(); ++a) {
    unrouted += mu[left[a]] - flow.flow(sourceEdges[a]);
  }
  return std::clamp(unrouted.value(), 0.0, 1.0);
}

/// inf{eps > 0 : Pr(d(X,Y) > eps) <= eps for some coupling}, which equals
/// the Prokhorov distance on finite spaces.
///
/// The minimal mismatch u(eps) only changes at distances d_(k), so on each
/// [d_(k), d_(k+1)) the smallest feasible eps is max(d_(k), u_k) when that
/// lies inside the interval. One max-flow per distinct distance.
inline double prokhorov(const DiscreteDistribution& mu,
                        const DiscreteDistribution& nu) {
  requireSameSpace(mu, nu);
  std::vector<double> thresholds{0.0};
  const auto& distinct = mu.space().distinctDistances();
  thresholds.insert(thresholds.end(), distinct.begin(), distinct.end());
  double best = 1.0;
  for (std::size_t k = 0; k < thresholds.size(); ++k) {
    if (thresholds[k] >= best) break;
    const double u = minimalMismatch(mu, nu, thresholds[k]);
    const double candidate = std::max(thresholds[k], u);
    const double next =
        k + 1 < thresholds.size() ? thresholds[k + 1] : kInfinity;
    if (candidate < next) best = std::min(best, candidate);
  }
  return best;
}

// ---------------------------------------------------------------------------
// Wasserstein

struct WassersteinResult {
  double value;
  Coupling coupling;
};

/// Optimal transport cost with costs d(i, j), solved as a min-cost flow.
/// The value is recomputed from the returned coupling so the two agree
/// exactly.
inline WassersteinResult wassersteinFinite(const DiscreteDistribution& mu,
                                           const DiscreteDistribution& nu) {
  requireSameSpace(mu, nu);
  const FiniteMetricSpace& space = mu.space();
  const std::size_t n = space.size();
  const PointSet left = mu.support();
  const PointSet right = nu.support();
  const std::size_t source = left.size() + right.size();
  const std::size_t sink = source + 1;
  MinCostFlow flow(sink + 1);
  for (std::size_t a = 0; a < left.size(); ++a) {
    flow.addEdge(source, a, mu[left[a]], 0.0);
  }
  for (std::size_t b = 0; b < right.size(); ++b) {
    flow.addEdge(left.size() + b, sink, nu[right[b]], 0.0);
  }
  std::vector<std::size_t> handles;
  handles.reserve(left.size() * right.size());
  for (std::size_t a = 0; a < left.size(); ++a) {
    for (std::size_t b = 0; b < right.size(); ++b) {
      handles.push_back(flow.addEdge(a, left.size() + b, 2.0,
                                     space.distance(left[a], right[b])));
    }
  }
  flow.solve(source, sink, 1.0);
  std::vector<double> joint(n * n, 0.0);
  for (std::size_t a = 0; a < left.size(); ++a) {
    for (std::size_t b = 0; b < right.size(); ++b) {
      const double v = flow.flow(handles[a * right.size() + b]);
      joint[left[a] * n + right[b]] = std::max(0.0, v);
    }
  }
  Coupling coupling(std::move(joint), mu, nu);
  const double value = coupling.expectedDistance();
  return {value, std::move(coupling)};
}

/// Integral of |F - G| over the merged breakpoints of two step CDFs.
inline double wassersteinReal(const RealAtomicDistribution& f,
                              const RealAtomicDistribution& g) {
  std::vector<double> xs;
  xs.reserve(f.size() + g.size());
  for (const Atom& a : f.atoms()) xs.push_back(a.x);
  for (const Atom& a : g.atoms()) xs.push_back(a.x);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  CompensatedSum s;
  for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
    s += std::abs(f.cdf(xs[k]) - g.cdf(xs[k])) * (xs[k + 1] - xs[k]);
  }
  return s.value();
}

// ---------------------------------------------------------------------------
// Modulus for the ball-to-discrepancy bound

/// Right-continuous non-decreasing step function on [0, inf).
class PhiModulus {
 public:
  PhiModulus(std::vector<double> breakpoints, std::vector<double> values)
      : breakpoints_(std::move(breakpoints)), values_(std::move(values)) {
    if (breakpoints_.empty() || breakpoints_.size() != values_.size() ||
        breakpoints_.front() != 0.0) {
      throw std::invalid_argument("PhiModulus: malformed step function");
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (!(values_[i] >= 0.0)) {
        throw std::invalid_argument("PhiModulus: negative value");
      }
      if (i > 0 && (breakpoints_[i] <= breakpoints_[i - 1] ||
                    values_[i] < values_[i - 1])) {
        throw std::invalid_argument("PhiModulus: not non-decreasing");
      }
    }
  }

  double operator()(double eps) const {
    if (!(eps >= 0.0)) throw std::invalid_argument("PhiModulus: eps < 0");
    auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), eps);
    return values_[static_cast<std::size_t>(it - breakpoints_.begin()) - 1];
  }

  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> breakpoints_;
  std::vector<double> values_;
};

/// Smallest phi with nu(B^eps) <= nu(B) + phi(eps) over all closed balls
/// and complements of closed balls.
inline PhiModulus tightestPhi(const DiscreteDistribution& nu) {
  const FiniteMetricSpace& space = nu.space();
  const std::size_t n = space.size();
  std::vector<double> eps{0.0};
  const auto& distinct = space.distinctDistances();
  eps.insert(eps.end(), distinct.begin(), distinct.end());

  std::set<std::vector<bool>> family;
  for (std::size_t c = 0; c < n; ++c) {
    for (double r : eps) {
      std::vector<bool> in(n);
      for (std::size_t y = 0; y < n; ++y) in[y] = space.distance(c, y) <= r;
      std::vector<bool> out(n);
      for (std::size_t y = 0; y < n; ++y) out[y] = !in[y];
      family.insert(std::move(in));
      family.insert(std::move(out));
    }
  }

  std::vector<double> phi(eps.size(), 0.0);
  std::vector<std::pair<double, double>> reach(n);  // (dist to B, nu mass)
  for (const auto& set : family) {
    double inside = 0.0;
    bool empty = true;
    for (std::size_t y = 0; y < n; ++y) {
      if (set[y]) {
        inside += nu[y];
        empty = false;
      }
    }
    if (empty) continue;
    for (std::size_t x = 0; x < n; ++x) {
      double d = kInfinity;
      for (std::size_t y = 0; y < n; ++y) {
        if (set[y]) d = std::min(d, space.distance(x, y));
      }
      reach[x] = {d, nu[x]};
    }
    std::sort(reach.begin(), reach.end());
    CompensatedSum fattened;
    std::size_t next = 0;
    for (std::size_t k = 0; k < eps.size(); ++k) {
      while (next < n && reach[next].first <= eps[k]) {
        fattened += reach[next].second;
        ++next;
      }
      phi[k] = std::max(phi[k], fattened.value() - inside);
    }
  }
  for (std::size_t k = 1; k < phi.size(); ++k) {
    phi[k] = std::max(phi[k], phi[k - 1]);
  }
  phi[0] = 0.0;
  return PhiModulus(std::move(eps), std::move(phi));
}

}  // namespace metric_atlas
