#pragma once

// Random-walk experiments whose convergence depends on the metric: the
// doubling walk on Z_p, the coordinate-refresh walk on G^n, and
// standardized binomials against the normal law.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "metric_atlas/bounds.hpp"
#include "metric_atlas/numeric.hpp"
#include "metric_atlas/spaces.hpp"
#include "metric_atlas/transport.hpp"

namespace metric_atlas {

// ---------------------------------------------------------------------------
// Doubling walk X_n = 2 X_{n-1} + e_n (mod p), e_n uniform on {-1, 0, 1}.

class CdgWalkState {
 public:
  /// The walk at step 0: a point mass at 0.
  explicit CdgWalkState(std::size_t p) : p_(p), dist_(p, 0.0) {
    if (p < 3 || p % 2 == 0) {
      throw std::invalid_argument("doubling walk: p must be odd and >= 3");
    }
    dist_[0] = 1.0;
    invTwo_ = (p + 1) / 2;
  }

  CdgWalkState(std::size_t p, std::vector<double> dist, std::size_t step)
      : CdgWalkState(p) {
    if (dist.size() != p) {
      throw std::invalid_argument("doubling walk: distribution has wrong size");
    }
    CompensatedSum total;
    for (double v : dist) {
      if (!(v >= 0.0)) throw std::invalid_argument("doubling walk: p < 0");
      total += v;
    }
    if (std::abs(total.value() - 1.0) > kMassTolerance) {
      throw std::invalid_argument("doubling walk: mass != 1");
    }
    dist_ = std::move(dist);
    step_ = step;
  }

  std::size_t modulus() const { return p_; }
  std::size_t step() const { return step_; }
  std::size_t invTwo() const { return invTwo_; }
  const std::vector<double>& distribution() const { return dist_; }

 private:
  friend CdgWalkState cdgStep(const CdgWalkState& state);

  std::size_t p_;
  std::vector<double> dist_;
  std::size_t step_ = 0;
  std::size_t invTwo_;
};

/// Exact pushforward: dist'(y) = (dist(y/2) + dist((y-1)/2) + dist((y+1)/2)) / 3.
inline CdgWalkState cdgStep(const CdgWalkState& state) {
  const std::size_t p = state.p_;
  const std::uint64_t inv = state.invTwo_;
  CdgWalkState next = state;
  for (std::size_t y = 0; y < p; ++y) {
    const std::size_t a = static_cast<std::size_t>(inv * y % p);
    const std::size_t b = static_cast<std::size_t>(inv * ((y + p - 1) % p) % p);
    const std::size_t c = static_cast<std::size_t>(inv * ((y + 1) % p) % p);
    next.dist_[y] = (state.dist_[a] + state.dist_[b] + state.dist_[c]) / 3.0;
  }
  ++next.step_;
  return next;
}

/// Discrepancy from uniform over the closed balls of Z_p (graph metric),
/// i.e. odd-length arcs. With S_k the prefix sums of dist - 1/p (period p),
/// an arc is a pair (i, j) with j > i and j - i odd, or j <= i with j - i
/// even (the arc wraps). Per-parity prefix and suffix extrema give O(p).
inline double cyclicBallDiscrepancy(std::span<const double> dist) {
  const std::size_t p = dist.size();
  if (p % 2 == 0) {
    throw std::invalid_argument("cyclicBallDiscrepancy: p must be odd");
  }
  const double u = 1.0 / static_cast<double>(p);
  std::vector<double> s(p);
  CompensatedSum run;
  for (std::size_t k = 0; k < p; ++k) {
    s[k] = run.value();
    run += dist[k] - u;
  }
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> sufMax[2] = {std::vector<double>(p + 1, -inf),
                                   std::vector<double>(p + 1, -inf)};
  std::vector<double> sufMin[2] = {std::vector<double>(p + 1, inf),
                                   std::vector<double>(p + 1, inf)};
  for (std::size_t k = p; k-- > 0;) {
    for (int par = 0; par < 2; ++par) {
      sufMax[par][k] = sufMax[par][k + 1];
      sufMin[par][k] = sufMin[par][k + 1];
    }
    sufMax[k % 2][k] = std::max(sufMax[k % 2][k], s[k]);
    sufMin[k % 2][k] = std::min(sufMin[k % 2][k], s[k]);
  }
  double preMax[2] = {-inf, -inf};
  double preMin[2] = {inf, inf};
  double best = 0.0;
  for (std::size_t j = 0; j < p; ++j) {
    const int par = static_cast<int>(j % 2);
    // i < j of the other parity
    if (preMax[1 - par] > -inf) {
      best = std::max({best, preMax[1 - par] - s[j], s[j] - preMin[1 - par]});
    }
    // i >= j of the same parity
    best = std::max({best, sufMax[par][j] - s[j], s[j] - sufMin[par][j]});
    preMax[par] = std::max(preMax[par], s[j]);
    preMin[par] = std::min(preMin[par], s[j]);
  }
  return std::min(best, 1.0);
}

struct CdgDistances {
  double tv;
  double disc;
};

inline CdgDistances cdgDistances(const CdgWalkState& state) {
  const auto& dist = state.distribution();
  const double u = 1.0 / static_cast<double>(dist.size());
  CompensatedSum s;
  for (double v : dist) s += std::abs(v - u);
  return {std::min(1.0, 0.5 * s.value()), cyclicBallDiscrepancy(dist)};
}

struct CdgRow {
  std::size_t step;
  double tv;
  double disc;
};

/// Distances after steps 1..steps, starting from the point mass at 0.
inline std::vector<CdgRow> cdgEvolution(std::size_t p, std::size_t steps) {
  std::vector<CdgRow> rows;
  rows.reserve(steps);
  CdgWalkState state(p);
  for (std::size_t k = 1; k <= steps; ++k) {
    state = cdgStep(state);
    const auto d = cdgDistances(state);
    rows.push_back({state.step(), d.tv, d.disc});
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Coordinate-refresh walk on G^n in continuous time.

struct ProductWalkParams {
  std::size_t n = 1;
  double g = 2.0;
  double t = 0.0;

  /// Default group size g = 2^n.
  static ProductWalkParams withDefaultGroup(std::size_t n, double t) {
    return {n, std::ldexp(1.0, static_cast<int>(n)), t};
  }
  double perCoordinateTime() const { return t / static_cast<double>(n); }
};

struct ProductWalkDistances {
  double tv;
  double entropy;
  double chi2;
  double hellinger;
  double separation;
};

/// Distances from uniform at time t, in closed form. Each coordinate has
/// been refreshed with probability 1 - e^{-s}, s = t/n, so its law puts
/// q0 = e^{-s} + (1 - e^{-s})/g at 0 and q1 = (1 - e^{-s})/g elsewhere.
/// With a = e^{-s} the per-coordinate ratios to uniform are g q0 = 1 + (g-1)a
/// and g q1 = 1 - a; everything below is written in those terms to avoid
/// cancellation, and large powers are carried in log space.
inline ProductWalkDistances productWalkDistances(const ProductWalkParams& prm) {
  if (prm.n < 1) throw std::invalid_argument("product walk: n must be >= 1");
  if (!(prm.g >= 2.0)) throw std::invalid_argument("product walk: g must be >= 2");
  if (!(prm.t >= 0.0)) throw std::invalid_argument("product walk: t must be >= 0");
  const double n = static_cast<double>(prm.n);
  const double g = prm.g;
  const double s = prm.perCoordinateTime();
  const double a = std::exp(-s);
  const double x = (g - 1.0) * a;            // g q0 - 1
  const double logRatio0 = std::log1p(x);    // log(g q0)
  const double logRatio1 = std::log1p(-a);   // log(g q1); -inf at t = 0

  ProductWalkDistances out{};
  out.entropy = n * (entropyKernel(x) + (g - 1.0) * entropyKernel(-a)) / g;
  out.chi2 = std::expm1(n * std::log1p((g - 1.0) * a * a));

  const double u = std::sqrt(1.0 - a);
  const double v = std::sqrt(1.0 + x);
  const double oneMinusAffinity = (g - 1.0) * a * a / ((1.0 + u) * (1.0 + v) * (u + v));
  out.hellinger =
      std::sqrt(std::max(0.0, -2.0 * std::expm1(n * std::log1p(-oneMinusAffinity))));

  out.separation = -std::expm1(n * logRatio1);

  // The density ratio to uniform depends only on k = #coordinates at 0.
  CompensatedSum tv;
  const double logG = std::log(g);
  const double logGm1 = std::log(g - 1.0);
  for (std::size_t k = 0; k <= prm.n; ++k) {
    const double kk = static_cast<double>(k);
    const double rest = n - kk;
    const double logWeight = std::lgamma(n + 1.0) - std::lgamma(kk + 1.0) -
                             std::lgamma(rest + 1.0) + rest * logGm1 - n * logG;
    const double logR = kk * logRatio0 + (rest > 0.0 ? rest * logRatio1 : 0.0);
    tv += std::exp(logWeight + logAbsExpm1(logR));
  }
  out.tv = std::min(1.0, 0.5 * tv.value());
  return out;
}

enum class WalkMetric { TV, Entropy, Chi2, Hellinger, Separation };

inline double select(const ProductWalkDistances& d, WalkMetric m) {
  switch (m) {
    case WalkMetric::TV: return d.tv;
    case WalkMetric::Entropy: return d.entropy;
    case WalkMetric::Chi2: return d.chi2;
    case WalkMetric::Hellinger: return d.hellinger;
    case WalkMetric::Separation: return d.separation;
  }
  return 0.0;
}

/// First time the chosen distance drops to `threshold`: a geometric sweep
/// with 1% steps brackets the crossing, then bisection refines it.
inline double crossingTime(std::size_t n, double g, WalkMetric metric,
                           double threshold) {
  auto value = [&](double t) {
    return select(productWalkDistances({n, g, t}), metric);
  };
  if (value(0.0) <= threshold) return 0.0;
  double lo = 0.0;
  double hi = 1e-3;
  while (value(hi) > threshold) {
    lo = hi;
    hi *= 1.01;
    if (hi > 1e12) throw std::runtime_error("crossingTime: no crossing found");
  }
  while (hi - lo > 1e-9 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (value(mid) > threshold) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

// ---------------------------------------------------------------------------
// Standardized binomial against the standard normal.

/// Binomial(n, 1/2) recentred and rescaled to mean 0, variance 1.
inline RealAtomicDistribution standardizedBinomial(std::size_t n) {
  if (n < 1) throw std::invalid_argument("binomial: n must be >= 1");
  const double nn = static_cast<double>(n);
  const double sd = std::sqrt(nn) / 2.0;
  std::vector<double> xs;
  std::vector<double> ws;
  for (std::size_t k = 0; k <= n; ++k) {
    const double kk = static_cast<double>(k);
    const double logW = std::lgamma(nn + 1.0) - std::lgamma(kk + 1.0) -
                        std::lgamma(nn - kk + 1.0) - nn * std::log(2.0);
    const double w = std::exp(logW);
    if (w > 0.0) {
      xs.push_back((kk - nn / 2.0) / sd);
      ws.push_back(w);
    }
  }
  CompensatedSum total;
  for (double w : ws) total += w;
  for (double& w : ws) w /= total.value();
  return RealAtomicDistribution::fromPoints(xs, ws);
}

struct BinomialNormalResult {
  double tv;
  double disc;
};

/// TV is 1 for every n (an atomic law against an atomless one); the
/// discrepancy is computed exactly over closed intervals.
inline BinomialNormalResult binomialNormalDemo(std::size_t n) {
  const auto mu = standardizedBinomial(n);
  const double reach = std::max(8.0, std::sqrt(static_cast<double>(n)) + 1.0);
  const auto nu = SmoothRealCdf::standardNormal(reach);
  return {1.0, discrepancyRealMixed(mu, nu)};
}

// ---------------------------------------------------------------------------

/// P_n = ((n-1) delta_0 + delta_n) / n against delta_0 on the two-point
/// space {0, n}.
inline FiniteInstance dudleySequence(double n) {
  if (!(n >= 1.0)) throw std::invalid_argument("dudleySequence: n must be >= 1");
  auto space = makeSpace(FiniteMetricSpace({{0.0, n}, {n, 0.0}}));
  InstanceDescriptor desc{"dudley-" + formatReal(n), "matrix", 2, 0.0, 0};
  return {desc, DiscreteDistribution(space, {(n - 1.0) / n, 1.0 / n}),
          DiscreteDistribution::pointMass(space, 0)};
}

}  // namespace metric_atlas
