#pragma once

// Density-ratio distances on finite spaces: total variation, Hellinger,
// relative entropy, chi-squared, separation, and the f-divergence family
// that contains the first four. All logs are natural.

#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "metric_atlas/numeric.hpp"
#include "metric_atlas/spaces.hpp"

namespace metric_atlas {

/// Convex f with f(1) = 0, plus its recession slope lim_{x->inf} f(x)/x
/// which prices mass of mu where nu vanishes.
class ConvexGenerator {
 public:
  ConvexGenerator(std::string name, std::function<double(double)> f,
                  double slopeAtInfinity)
      : name_(std::move(name)), f_(std::move(f)), slope_(slopeAtInfinity) {
    if (!f_) throw std::invalid_argument("generator: empty function");
    if (std::abs(f_(1.0)) > 1e-12) {
      throw std::invalid_argument("generator '" + name_ + "': f(1) != 0");
    }
    // Midpoint convexity on a grid over (0, 10].
    constexpr int kGrid = 64;
    for (int i = 1; i <= kGrid; ++i) {
      for (int j = i + 1; j <= kGrid; ++j) {
        const double a = 10.0 * i / kGrid;
        const double b = 10.0 * j / kGrid;
        const double mid = f_(0.5 * (a + b));
        const double chord = 0.5 * (f_(a) + f_(b));
        if (mid > chord + 1e-12 * std::max(1.0, std::abs(chord))) {
          throw std::invalid_argument("generator '" + name_ +
                                      "' is not convex on (0, 10]");
        }
      }
    }
  }

  const std::string& name() const { return name_; }
  double operator()(double x) const { return f_(x); }
  double slopeAtInfinity() const { return slope_; }

  /// f(x) = (x - 1)^2 gives chi-squared.
  static ConvexGenerator chiSquared() {
    return {"chi2", [](double x) { return (x - 1.0) * (x - 1.0); }, kInfinity};
  }
  /// f(x) = x log x gives relative entropy.
  static ConvexGenerator relativeEntropy() {
    return {"kl", [](double x) { return x > 0.0 ? x * std::log(x) : 0.0; },
            kInfinity};
  }
  /// f(x) = |x - 1| / 2 gives total variation.
  static ConvexGenerator totalVariation() {
    return {"tv", [](double x) { return 0.5 * std::abs(x - 1.0); }, 0.5};
  }
  /// f(x) = (sqrt(x) - 1)^2 gives the squared Hellinger distance.
  static ConvexGenerator hellingerSquared() {
    return {"hellinger2",
            [](double x) {
              const double r = std::sqrt(x) - 1.0;
              return r * r;
            },
            1.0};
  }

 private:
  std::string name_;
  std::function<double(double)> f_;
  double slope_;
};

namespace detail {

inline void requireSameLength(std::span<const double> p,
                              std::span<const double> q) {
  if (p.size() != q.size()) {
    throw std::invalid_argument("probability vectors differ in length");
  }
}

}  // namespace detail

// The span overloads work on raw probability vectors; the distribution
// overloads additionally check that both sides share a space.

inline double fDivergence(const ConvexGenerator& gen, std::span<const double> mu,
                          std::span<const double> nu) {
  detail::requireSameLength(mu, nu);
  CompensatedSum s;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (nu[i] > 0.0) {
      s += nu[i] * gen(mu[i] / nu[i]);
    } else if (mu[i] > 0.0) {
      s += mu[i] * gen.slopeAtInfinity();
    }
  }
  return s.value();
}

inline double totalVariation(std::span<const double> mu,
                             std::span<const double> nu) {
  detail::requireSameLength(mu, nu);
  CompensatedSum s;
  for (std::size_t i = 0; i < mu.size(); ++i) s += std::abs(mu[i] - nu[i]);
  return std::min(1.0, 0.5 * s.value());
}

/// Sum of sqrt(mu * nu), equal to 1 - H^2 / 2.
inline double hellingerAffinity(std::span<const double> mu,
                                std::span<const double> nu) {
  detail::requireSameLength(mu, nu);
  CompensatedSum s;
  for (std::size_t i = 0; i < mu.size(); ++i) s += std::sqrt(mu[i] * nu[i]);
  return s.value();
}

inline double hellinger(std::span<const double> mu,
                        std::span<const double> nu) {
  detail::requireSameLength(mu, nu);
  CompensatedSum s;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double r = std::sqrt(mu[i]) - std::sqrt(nu[i]);
    s += r * r;
  }
  return std::sqrt(std::max(0.0, s.value()));
}

inline double relativeEntropy(std::span<const double> mu,
                              std::span<const double> nu) {
  detail::requireSameLength(mu, nu);
  CompensatedSum s;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (mu[i] == 0.0) continue;
    if (nu[i] == 0.0) return kInfinity;
    s += mu[i] * std::log(mu[i] / nu[i]);
  }
  return std::max(0.0, s.value());
}

inline double chiSquared(std::span<const double> mu,
                         std::span<const double> nu) {
  detail::requireSameLength(mu, nu);
  CompensatedSum s;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (nu[i] == 0.0) {
      if (mu[i] > 0.0) return kInfinity;
      continue;
    }
    const double diff = mu[i] - nu[i];
    s += diff * diff / nu[i];
  }
  return s.value();
}

/// max over {i : nu(i) > 0} of 1 - mu(i)/nu(i). Points outside the support
/// of nu are excluded.
inline double separation(std::span<const double> mu,
                         std::span<const double> nu) {
  detail::requireSameLength(mu, nu);
  double best = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (nu[i] > 0.0) best = std::max(best, 1.0 - mu[i] / nu[i]);
  }
  return best;
}

inline double fDivergence(const ConvexGenerator& gen,
                          const DiscreteDistribution& mu,
                          const DiscreteDistribution& nu) {
  requireSameSpace(mu, nu);
  return fDivergence(gen, mu.probabilities(), nu.probabilities());
}

#define METRIC_ATLAS_PAIR_OVERLOAD(fn)                                  \
  inline double fn(const DiscreteDistribution& mu,                       \
                   const DiscreteDistribution& nu) {                     \
    requireSameSpace(mu, nu);                                            \
    return fn(mu.probabilities(), nu.probabilities());                   \
  }

METRIC_ATLAS_PAIR_OVERLOAD(totalVariation)
METRIC_ATLAS_PAIR_OVERLOAD(hellingerAffinity)
METRIC_ATLAS_PAIR_OVERLOAD(hellinger)
METRIC_ATLAS_PAIR_OVERLOAD(relativeEntropy)
METRIC_ATLAS_PAIR_OVERLOAD(chiSquared)
METRIC_ATLAS_PAIR_OVERLOAD(separation)

#undef METRIC_ATLAS_PAIR_OVERLOAD

using DistributionPair =
    std::pair<DiscreteDistribution, DiscreteDistribution>;

/// Affinity of the product measures, as the product of marginal affinities.
inline double hellingerAffinityProduct(std::span<const DistributionPair> pairs) {
  double product = 1.0;
  for (const auto& [mu, nu] : pairs) product *= hellingerAffinity(mu, nu);
  return product;
}

/// Relative entropy of the product measures (additive over coordinates).
inline double entropyAdditivity(std::span<const DistributionPair> pairs) {
  CompensatedSum s;
  for (const auto& [mu, nu] : pairs) s += relativeEntropy(mu, nu);
  return s.value();
}

/// Chi-squared of the product measures: prod(1 + chi2_i) - 1.
inline double chiSquaredProduct(std::span<const DistributionPair> pairs) {
  double logOnePlus = 0.0;
  double product = 1.0;
  for (const auto& [mu, nu] : pairs) {
    const double c = chiSquared(mu, nu);
    if (std::isinf(c)) return kInfinity;
    logOnePlus += std::log1p(c);
    product *= 1.0 + c;
  }
  // expm1 keeps small values accurate; the plain product is tighter once
  // the result is large.
  return product < 2.0 ? std::expm1(logOnePlus) : product - 1.0;
}

}  // namespace metric_atlas
