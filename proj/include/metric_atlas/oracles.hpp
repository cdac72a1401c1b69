#pragma once

// Brute-force reference computations. Each one follows the defining
// formula literally and shares no code with the production algorithm it
// checks; they are slow on purpose and limited to small inputs.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "metric_atlas/spaces.hpp"

namespace metric_atlas::oracles {

/// Prokhorov distance by enumerating all 2^n subsets B and all candidate
/// fattening radii. n <= 12.
inline double prokhorovExhaustive(const DiscreteDistribution& mu,
                                  const DiscreteDistribution& nu) {
  const FiniteMetricSpace& space = mu.space();
  const std::size_t n = space.size();
  if (n > 12) throw std::invalid_argument("prokhorovExhaustive: n > 12");
  if (nu.size() != n) throw std::invalid_argument("size mismatch");

  std::vector<double> radii{0.0};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) radii.push_back(space.distance(i, j));
  }
  std::sort(radii.begin(), radii.end());
  radii.erase(std::unique(radii.begin(), radii.end()), radii.end());

  const std::uint32_t subsets = 1u << n;
  std::vector<double> muMass(subsets, 0.0);
  std::vector<double> nuMass(subsets, 0.0);
  for (std::uint32_t s = 1; s < subsets; ++s) {
    const std::uint32_t low = s & (~s + 1);
    const std::size_t bit = static_cast<std::size_t>(std::countr_zero(low));
    muMass[s] = muMass[s ^ low] + mu[bit];
    nuMass[s] = nuMass[s ^ low] + nu[bit];
  }

  double result = 1.0;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    // neighbourhood[i] = points within radii[k] of i
    std::vector<std::uint32_t> neighbourhood(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (space.distance(i, j) <= radii[k]) neighbourhood[i] |= 1u << j;
      }
    }
    double gap = 0.0;
    for (std::uint32_t s = 1; s < subsets; ++s) {
      std::uint32_t fat = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (s >> i & 1u) fat |= neighbourhood[i];
      }
      gap = std::max(gap, muMass[s] - nuMass[fat]);
    }
    const double feasibleFrom = std::max(radii[k], gap);
    const double upper = k + 1 < radii.size() ? radii[k + 1] : 2.0;
    if (feasibleFrom < upper) result = std::min(result, feasibleFrom);
  }
  return std::min(result, 1.0);
}

/// max over subsets A of |mu(A) - nu(A)|, by Gray-code enumeration. n <= 20.
inline double tvSubsetOracle(std::span<const double> mu,
                             std::span<const double> nu) {
  const std::size_t n = mu.size();
  if (n > 20) throw std::invalid_argument("tvSubsetOracle: n > 20");
  if (nu.size() != n) throw std::invalid_argument("size mismatch");
  double diff = 0.0;
  double best = 0.0;
  std::uint32_t gray = 0;
  for (std::uint32_t step = 1; step < (1u << n); ++step) {
    const std::uint32_t next = step ^ (step >> 1);
    const std::uint32_t flipped = next ^ gray;
    const std::size_t bit = static_cast<std::size_t>(std::countr_zero(flipped));
    const double delta = mu[bit] - nu[bit];
    diff += (next & flipped) ? delta : -delta;
    gray = next;
    best = std::max(best, std::abs(diff));
  }
  return best;
}

inline double tvSubsetOracle(const DiscreteDistribution& mu,
                             const DiscreteDistribution& nu) {
  return tvSubsetOracle(mu.probabilities(), nu.probabilities());
}

struct Bracket {
  double lo;
  double hi;
};

/// Brackets the Levy distance by scanning eps on a grid of the given mesh
/// and testing the defining inequalities on a dense x-grid. The x-grid
/// misses violations narrower than mesh / 4, so the bracket is
/// [first passing grid eps - mesh, first passing grid eps].
inline Bracket levyGridOracle(const RealAtomicDistribution& f,
                              const RealAtomicDistribution& g, double mesh) {
  if (!(mesh > 0.0)) throw std::invalid_argument("levyGridOracle: mesh <= 0");
  auto stepCdf = [](const RealAtomicDistribution& d, double x) {
    double s = 0.0;
    for (const Atom& a : d.atoms()) {
      if (a.x <= x) s += a.w;
    }
    return s;
  };
  double left = std::min(f.atoms().front().x, g.atoms().front().x) - 1.5;
  double right = std::max(f.atoms().back().x, g.atoms().back().x) + 1.5;
  const double h = mesh / 4.0;
  std::vector<double> xs;
  for (double x = left; x <= right; x += h) xs.push_back(x);
  for (const Atom& a : f.atoms()) xs.push_back(a.x);
  for (const Atom& a : g.atoms()) xs.push_back(a.x);

  auto passes = [&](double eps) {
    for (double x : xs) {
      const double fx = stepCdf(f, x);
      if (fx > stepCdf(g, x + eps) + eps) return false;
      if (stepCdf(g, x - eps) - eps > fx) return false;
    }
    return true;
  };
  // Smallest grid index k with k * mesh passing (monotone in eps).
  std::size_t lo = 0;
  std::size_t hi = static_cast<std::size_t>(std::ceil(1.0 / mesh));
  if (passes(0.0)) return {0.0, 0.0 + mesh};
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (passes(static_cast<double>(mid) * mesh)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  const double top = std::min(1.0, static_cast<double>(hi) * mesh);
  return {std::max(0.0, top - mesh), top};
}

/// Discrepancy of a distribution on Z_p from uniform, by summing every
/// odd-length circular window directly. O(p^2); p <= 4096.
inline double discrepancyWindowOracle(std::span<const double> dist) {
  const std::size_t p = dist.size();
  if (p > 4096) throw std::invalid_argument("discrepancyWindowOracle: p > 4096");
  if (p % 2 == 0) throw std::invalid_argument("discrepancyWindowOracle: p even");
  const double u = 1.0 / static_cast<double>(p);
  double best = 0.0;
  for (std::size_t start = 0; start < p; ++start) {
    double window = 0.0;
    for (std::size_t len = 1; len <= p; ++len) {
      window += dist[(start + len - 1) % p];
      if (len % 2 == 1) {
        best = std::max(best, std::abs(window - static_cast<double>(len) * u));
      }
    }
  }
  return best;
}

}  // namespace metric_atlas::oracles
