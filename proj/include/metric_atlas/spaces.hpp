#pragma once

// Finite metric spaces, probability vectors over them, atomic and smooth
// distributions on the real line, and couplings.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "metric_atlas/numeric.hpp"

namespace metric_atlas {

/// Sorted, duplicate-free list of point indices.
using PointSet = std::vector<std::size_t>;

enum class SpaceKind { Matrix, Cycle, Euclidean, Product };

/// A finite set of points with a full distance matrix. Immutable.
///
/// Construction validates zero diagonal, symmetry, positivity off the
/// diagonal and the triangle inequality (O(n^3)). Product spaces built by
/// productSpace() keep the sum metric in factored form instead of a dense
/// matrix so that large products stay cheap.
class FiniteMetricSpace {
 public:
  static constexpr std::size_t kMaxDenseSize = 4096;

  explicit FiniteMetricSpace(const std::vector<std::vector<double>>& d,
                             std::vector<std::string> labels = {})
      : FiniteMetricSpace(SpaceKind::Matrix, flatten(d), d.size(),
                          std::move(labels)) {}

  /// Graph metric min(|i-j|, n-|i-j|) on the n-cycle.
  static FiniteMetricSpace cycle(std::size_t n) {
    if (n < 2) throw std::invalid_argument("cycle: n must be at least 2");
    std::vector<double> d(n * n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const std::size_t diff = i > j ? i - j : j - i;
        d[i * n + j] = static_cast<double>(std::min(diff, n - diff));
      }
    }
    return FiniteMetricSpace(SpaceKind::Cycle, std::move(d), n, {});
  }

  /// Euclidean distances between the given points (all of one dimension).
  static FiniteMetricSpace euclidean(
      const std::vector<std::vector<double>>& points) {
    const std::size_t n = points.size();
    if (n == 0) throw std::invalid_argument("euclidean: no points");
    const std::size_t dim = points.front().size();
    if (dim == 0) throw std::invalid_argument("euclidean: zero dimension");
    for (const auto& p : points) {
      if (p.size() != dim) {
        throw std::invalid_argument("euclidean: points differ in dimension");
      }
    }
    std::vector<double> d(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < dim; ++k) {
          const double diff = points[i][k] - points[j][k];
          s += diff * diff;
        }
        d[i * n + j] = d[j * n + i] = std::sqrt(s);
      }
    }
    FiniteMetricSpace space(SpaceKind::Euclidean, std::move(d), n, {});
    space.points_ = points;
    return space;
  }

  /// Points on the real line; the induced collinear metric |x - y|.
  static FiniteMetricSpace line(const std::vector<double>& xs) {
    std::vector<std::vector<double>> pts;
    pts.reserve(xs.size());
    for (double x : xs) pts.push_back({x});
    return euclidean(pts);
  }

  /// Sum metric on the Cartesian product; point (i, j) has index i*n2 + j.
  static FiniteMetricSpace product(
      std::shared_ptr<const FiniteMetricSpace> first,
      std::shared_ptr<const FiniteMetricSpace> second) {
    FiniteMetricSpace space;
    space.kind_ = SpaceKind::Product;
    space.n_ = first->size() * second->size();
    space.first_ = std::move(first);
    space.second_ = std::move(second);
    space.computeSummaries();
    return space;
  }

  std::size_t size() const { return n_; }
  SpaceKind kind() const { return kind_; }

  double distance(std::size_t i, std::size_t j) const {
    if (first_) {
      const std::size_t n2 = second_->size();
      return first_->distance(i / n2, j / n2) +
             second_->distance(i % n2, j % n2);
    }
    return d_[i * n_ + j];
  }

  double diameter() const { return diameter_; }

  /// Smallest distance between distinct points; +inf for a 1-point space.
  double minDistance() const { return minDistance_; }

  /// Distinct positive distances in increasing order.
  const std::vector<double>& distinctDistances() const { return distinct_; }

  const std::vector<std::string>& labels() const { return labels_; }

  /// Coordinates when the space is a set of points on the real line.
  std::optional<std::vector<double>> lineCoordinates() const {
    if (kind_ != SpaceKind::Euclidean || points_.empty() ||
        points_.front().size() != 1) {
      return std::nullopt;
    }
    std::vector<double> xs;
    xs.reserve(points_.size());
    for (const auto& p : points_) xs.push_back(p[0]);
    return xs;
  }

  const std::vector<std::vector<double>>& points() const { return points_; }

  /// Same points with every distance multiplied by c > 0.
  FiniteMetricSpace scaled(double c) const {
    if (!(c > 0.0)) throw std::invalid_argument("scaled: factor must be > 0");
    std::vector<double> d(n_ * n_);
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) d[i * n_ + j] = c * distance(i, j);
    }
    return FiniteMetricSpace(SpaceKind::Matrix, std::move(d), n_, labels_);
  }

  bool sameGeometry(const FiniteMetricSpace& other) const {
    if (this == &other) return true;
    if (n_ != other.n_) return false;
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) {
        if (distance(i, j) != other.distance(i, j)) return false;
      }
    }
    return true;
  }

 private:
  FiniteMetricSpace() = default;

  FiniteMetricSpace(SpaceKind kind, std::vector<double> d, std::size_t n,
                    std::vector<std::string> labels)
      : kind_(kind), n_(n), d_(std::move(d)), labels_(std::move(labels)) {
    validate();
    computeSummaries();
  }

  static std::vector<double> flatten(
      const std::vector<std::vector<double>>& d) {
    const std::size_t n = d.size();
    std::vector<double> flat;
    flat.reserve(n * n);
    for (const auto& row : d) {
      if (row.size() != n) {
        throw std::invalid_argument("distance matrix is not square");
      }
      flat.insert(flat.end(), row.begin(), row.end());
    }
    return flat;
  }

  void validate() const {
    if (n_ == 0) throw std::invalid_argument("metric space has no points");
    if (n_ > kMaxDenseSize) {
      throw std::length_error("metric space too large for a dense matrix");
    }
    if (!labels_.empty() && labels_.size() != n_) {
      throw std::invalid_argument("labels: expected one label per point");
    }
    double scale = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      if (d_[i * n_ + i] != 0.0) {
        throw std::invalid_argument("distance matrix: nonzero diagonal at " +
                                    std::to_string(i));
      }
      for (std::size_t j = 0; j < n_; ++j) {
        const double v = d_[i * n_ + j];
        if (!std::isfinite(v) || v < 0.0) {
          throw std::invalid_argument("distance matrix: invalid entry");
        }
        if (i != j && v <= 0.0) {
          throw std::invalid_argument(
              "distance matrix: distinct points at distance 0");
        }
        if (v != d_[j * n_ + i]) {
          throw std::invalid_argument("distance matrix: not symmetric");
        }
        scale = std::max(scale, v);
      }
    }
    const double tol = 1e-12 * std::max(1.0, scale);
    for (std::size_t j = 0; j < n_; ++j) {
      for (std::size_t i = 0; i < n_; ++i) {
        const double dij = d_[i * n_ + j];
        for (std::size_t k = 0; k < n_; ++k) {
          if (d_[i * n_ + k] > dij + d_[j * n_ + k] + tol) {
            throw std::invalid_argument(
                "distance matrix: triangle inequality violated at (" +
                std::to_string(i) + "," + std::to_string(j) + "," +
                std::to_string(k) + ")");
          }
        }
      }
    }
  }

  void computeSummaries() {
    diameter_ = 0.0;
    minDistance_ = kInfinity;
    distinct_.clear();
    if (first_) {
      // Distinct sums of component distances (including zero components).
      std::vector<double> a = first_->distinctDistances();
      std::vector<double> b = second_->distinctDistances();
      a.insert(a.begin(), 0.0);
      b.insert(b.begin(), 0.0);
      for (double x : a) {
        for (double y : b) {
          if (x + y > 0.0) distinct_.push_back(x + y);
        }
      }
      diameter_ = first_->diameter() + second_->diameter();
      minDistance_ = std::min(first_->minDistance(), second_->minDistance());
    } else {
      for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t j = i + 1; j < n_; ++j) {
          const double v = d_[i * n_ + j];
          distinct_.push_back(v);
          diameter_ = std::max(diameter_, v);
          minDistance_ = std::min(minDistance_, v);
        }
      }
    }
    std::sort(distinct_.begin(), distinct_.end());
    distinct_.erase(std::unique(distinct_.begin(), distinct_.end()),
                    distinct_.end());
  }

  SpaceKind kind_ = SpaceKind::Matrix;
  std::size_t n_ = 0;
  std::vector<double> d_;
  std::vector<std::string> labels_;
  std::vector<std::vector<double>> points_;
  std::shared_ptr<const FiniteMetricSpace> first_;
  std::shared_ptr<const FiniteMetricSpace> second_;
  double diameter_ = 0.0;
  double minDistance_ = kInfinity;
  std::vector<double> distinct_;
};

using SpacePtr = std::shared_ptr<const FiniteMetricSpace>;

inline SpacePtr makeSpace(FiniteMetricSpace space) {
  return std::make_shared<const FiniteMetricSpace>(std::move(space));
}

/// Probability vector over a finite metric space (densities with respect
/// to counting measure).
class DiscreteDistribution {
 public:
  DiscreteDistribution(SpacePtr space, std::vector<double> p)
      : space_(std::move(space)), p_(std::move(p)) {
    if (!space_) throw std::invalid_argument("distribution: null space");
    if (p_.size() != space_->size()) {
      throw std::invalid_argument(
          "distribution: p has " + std::to_string(p_.size()) +
          " entries but the space has " + std::to_string(space_->size()) +
          " points");
    }
    CompensatedSum total;
    for (double v : p_) {
      if (!std::isfinite(v) || v < 0.0) {
        throw std::invalid_argument("distribution: negative or non-finite p");
      }
      total += v;
    }
    if (std::abs(total.value() - 1.0) > kMassTolerance) {
      throw std::invalid_argument("distribution: p sums to " +
                                  formatReal(total.value()) + ", not 1");
    }
  }

  static DiscreteDistribution uniform(SpacePtr space) {
    const std::size_t n = space->size();
    return DiscreteDistribution(std::move(space),
                                std::vector<double>(n, 1.0 / n));
  }

  static DiscreteDistribution pointMass(SpacePtr space, std::size_t at) {
    std::vector<double> p(space->size(), 0.0);
    p.at(at) = 1.0;
    return DiscreteDistribution(std::move(space), std::move(p));
  }

  const FiniteMetricSpace& space() const { return *space_; }
  const SpacePtr& spacePtr() const { return space_; }
  std::size_t size() const { return p_.size(); }
  double operator[](std::size_t i) const { return p_[i]; }
  std::span<const double> probabilities() const { return p_; }

  double mass(const PointSet& set) const {
    CompensatedSum s;
    for (std::size_t i : set) s += p_[i];
    return s.value();
  }

  PointSet support() const {
    PointSet s;
    for (std::size_t i = 0; i < p_.size(); ++i) {
      if (p_[i] > 0.0) s.push_back(i);
    }
    return s;
  }

  /// True when every point charged by `other` is charged here too
  /// (exact zero test).
  bool dominates(const DiscreteDistribution& other) const {
    for (std::size_t i = 0; i < p_.size(); ++i) {
      if (other.p_[i] > 0.0 && p_[i] == 0.0) return false;
    }
    return true;
  }

  /// Same probabilities carried over to another space of equal size.
  DiscreteDistribution on(SpacePtr space) const {
    return DiscreteDistribution(std::move(space), p_);
  }

 private:
  SpacePtr space_;
  std::vector<double> p_;
};

inline void requireSameSpace(const DiscreteDistribution& mu,
                             const DiscreteDistribution& nu) {
  if (mu.spacePtr() == nu.spacePtr()) return;
  if (!mu.space().sameGeometry(nu.space())) {
    throw std::invalid_argument(
        "distributions live on different metric spaces");
  }
}

struct Atom {
  double x;
  double w;
};

/// Finitely many weighted atoms on the real line; step CDF.
class RealAtomicDistribution {
 public:
  explicit RealAtomicDistribution(std::vector<Atom> atoms)
      : atoms_(std::move(atoms)) {
    if (atoms_.empty()) throw std::invalid_argument("atoms: empty");
    CompensatedSum total;
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      if (!std::isfinite(atoms_[i].x)) {
        throw std::invalid_argument("atoms: non-finite position");
      }
      if (!(atoms_[i].w > 0.0) || !std::isfinite(atoms_[i].w)) {
        throw std::invalid_argument("atoms: weights must be positive");
      }
      if (i > 0 && !(atoms_[i - 1].x < atoms_[i].x)) {
        throw std::invalid_argument("atoms: positions must strictly increase");
      }
      total += atoms_[i].w;
    }
    if (std::abs(total.value() - 1.0) > kMassTolerance) {
      throw std::invalid_argument("atoms: weights sum to " +
                                  formatReal(total.value()) + ", not 1");
    }
    cumulative_.reserve(atoms_.size());
    CompensatedSum run;
    for (const Atom& a : atoms_) {
      run += a.w;
      cumulative_.push_back(run.value());
    }
    cumulative_.back() = 1.0;
  }

  static RealAtomicDistribution pointMass(double x) {
    return RealAtomicDistribution({{x, 1.0}});
  }

  /// Builds from unsorted positions, merging duplicates and dropping zero
  /// weights.
  static RealAtomicDistribution fromPoints(std::span<const double> xs,
                                           std::span<const double> ws) {
    if (xs.size() != ws.size()) {
      throw std::invalid_argument("atoms: position/weight length mismatch");
    }
    std::vector<Atom> atoms;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (ws[i] > 0.0) atoms.push_back({xs[i], ws[i]});
    }
    std::sort(atoms.begin(), atoms.end(),
              [](const Atom& a, const Atom& b) { return a.x < b.x; });
    std::vector<Atom> merged;
    for (const Atom& a : atoms) {
      if (!merged.empty() && merged.back().x == a.x) {
        merged.back().w += a.w;
      } else {
        merged.push_back(a);
      }
    }
    return RealAtomicDistribution(std::move(merged));
  }

  std::span<const Atom> atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }

  /// F(x) = mu((-inf, x]).
  double cdf(double x) const {
    auto it = std::upper_bound(
        atoms_.begin(), atoms_.end(), x,
        [](double v, const Atom& a) { return v < a.x; });
    if (it == atoms_.begin()) return 0.0;
    return cumulative_[static_cast<std::size_t>(it - atoms_.begin()) - 1];
  }

  /// F(x-) = mu((-inf, x)).
  double cdfLeft(double x) const {
    auto it = std::lower_bound(
        atoms_.begin(), atoms_.end(), x,
        [](const Atom& a, double v) { return a.x < v; });
    if (it == atoms_.begin()) return 0.0;
    return cumulative_[static_cast<std::size_t>(it - atoms_.begin()) - 1];
  }

  /// Cumulative weight through atom i.
  double cumulative(std::size_t i) const { return cumulative_[i]; }

 private:
  std::vector<Atom> atoms_;
  std::vector<double> cumulative_;
};

/// A continuous CDF given by an oracle, with a truncation interval outside
/// of which it carries at most 1e-12 mass on each side.
class SmoothRealCdf {
 public:
  using Oracle = std::function<double(double)>;

  SmoothRealCdf(Oracle cdf, std::optional<double> densityBound, double lower,
                double upper, double evalTolerance)
      : cdf_(std::move(cdf)),
        densityBound_(densityBound),
        lower_(lower),
        upper_(upper),
        evalTolerance_(evalTolerance) {
    if (!cdf_) throw std::invalid_argument("smooth cdf: empty oracle");
    if (!(lower_ < upper_)) {
      throw std::invalid_argument("smooth cdf: support must satisfy a < b");
    }
    if (densityBound_ && !(*densityBound_ >= 0.0)) {
      throw std::invalid_argument("smooth cdf: densityBound must be >= 0");
    }
    if (!(evalTolerance_ >= 0.0)) {
      throw std::invalid_argument("smooth cdf: evalTolerance must be >= 0");
    }
    if (cdf_(lower_) > 1e-12 || cdf_(upper_) < 1.0 - 1e-12) {
      throw std::invalid_argument(
          "smooth cdf: truncation interval leaves more than 1e-12 mass "
          "outside");
    }
    constexpr int kGrid = 1000;
    double prev = cdf_(lower_);
    for (int i = 1; i <= kGrid; ++i) {
      const double x = lower_ + (upper_ - lower_) * i / kGrid;
      const double v = cdf_(x);
      if (v < 0.0 || v > 1.0 || v + evalTolerance_ < prev) {
        throw std::invalid_argument("smooth cdf: oracle is not monotone");
      }
      prev = v;
    }
  }

  /// Standard normal CDF truncated to [-halfWidth, halfWidth].
  static SmoothRealCdf standardNormal(double halfWidth = 8.0) {
    const double kInvSqrt2Pi = 0.3989422804014327;
    return SmoothRealCdf(
        [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); },
        kInvSqrt2Pi, -halfWidth, halfWidth, 1e-15);
  }

  double operator()(double x) const { return cdf_(x); }
  std::optional<double> densityBound() const { return densityBound_; }
  double lower() const { return lower_; }
  double upper() const { return upper_; }
  double evalTolerance() const { return evalTolerance_; }

 private:
  Oracle cdf_;
  std::optional<double> densityBound_;
  double lower_;
  double upper_;
  double evalTolerance_;
};

/// Joint probability matrix whose row and column sums reproduce two
/// distributions on the same space.
class Coupling {
 public:
  static constexpr double kMarginalTolerance = 1e-10;

  Coupling(std::vector<double> joint, DiscreteDistribution rowMarginal,
           DiscreteDistribution colMarginal)
      : joint_(std::move(joint)),
        rows_(std::move(rowMarginal)),
        cols_(std::move(colMarginal)) {
    const std::size_t r = rows_.size();
    const std::size_t c = cols_.size();
    if (joint_.size() != r * c) {
      throw std::invalid_argument("coupling: matrix has wrong shape");
    }
    std::vector<CompensatedSum> colSums(c);
    for (std::size_t i = 0; i < r; ++i) {
      CompensatedSum rowSum;
      for (std::size_t j = 0; j < c; ++j) {
        const double v = joint_[i * c + j];
        if (!(v >= 0.0)) throw std::invalid_argument("coupling: negative entry");
        rowSum += v;
        colSums[j] += v;
      }
      if (std::abs(rowSum.value() - rows_[i]) > kMarginalTolerance) {
        throw std::invalid_argument("coupling: row " + std::to_string(i) +
                                    " does not match its marginal");
      }
    }
    for (std::size_t j = 0; j < c; ++j) {
      if (std::abs(colSums[j].value() - cols_[j]) > kMarginalTolerance) {
        throw std::invalid_argument("coupling: column " + std::to_string(j) +
                                    " does not match its marginal");
      }
    }
  }

  double operator()(std::size_t i, std::size_t j) const {
    return joint_[i * cols_.size() + j];
  }
  std::size_t rows() const { return rows_.size(); }
  std::size_t cols() const { return cols_.size(); }
  const DiscreteDistribution& rowMarginal() const { return rows_; }
  const DiscreteDistribution& colMarginal() const { return cols_; }

  /// E[d(X, Y)] under the joint law; rows and columns index the same space.
  double expectedDistance() const {
    const FiniteMetricSpace& space = rows_.space();
    CompensatedSum s;
    for (std::size_t i = 0; i < rows(); ++i) {
      for (std::size_t j = 0; j < cols(); ++j) {
        const double v = (*this)(i, j);
        if (v > 0.0) s += v * space.distance(i, j);
      }
    }
    return s.value();
  }

  /// Pr(d(X, Y) > eps).
  double mismatchProbability(double eps) const {
    const FiniteMetricSpace& space = rows_.space();
    CompensatedSum s;
    for (std::size_t i = 0; i < rows(); ++i) {
      for (std::size_t j = 0; j < cols(); ++j) {
        if (space.distance(i, j) > eps) s += (*this)(i, j);
      }
    }
    return s.value();
  }

 private:
  std::vector<double> joint_;
  DiscreteDistribution rows_;
  DiscreteDistribution cols_;
};

/// Closed ball {y : d(center, y) <= radius}.
inline PointSet ball(const FiniteMetricSpace& space, std::size_t center,
                     double radius) {
  if (!(radius >= 0.0)) throw std::invalid_argument("ball: radius < 0");
  if (center >= space.size()) throw std::out_of_range("ball: bad center");
  PointSet out;
  for (std::size_t y = 0; y < space.size(); ++y) {
    if (space.distance(center, y) <= radius) out.push_back(y);
  }
  return out;
}

/// B^eps = {x : min_{y in B} d(x, y) <= eps}.
inline PointSet fatten(const FiniteMetricSpace& space, const PointSet& set,
                       double eps) {
  if (!(eps >= 0.0)) throw std::invalid_argument("fatten: eps < 0");
  PointSet out;
  for (std::size_t x = 0; x < space.size(); ++x) {
    for (std::size_t y : set) {
      if (space.distance(x, y) <= eps) {
        out.push_back(x);
        break;
      }
    }
  }
  return out;
}

inline constexpr std::size_t kMaxProductSize = 1'000'000;

/// Product measures mu1 x mu2 and nu1 x nu2 on the sum-metric product.
inline std::pair<DiscreteDistribution, DiscreteDistribution> productSpace(
    const DiscreteDistribution& mu1, const DiscreteDistribution& nu1,
    const DiscreteDistribution& mu2, const DiscreteDistribution& nu2) {
  requireSameSpace(mu1, nu1);
  requireSameSpace(mu2, nu2);
  const std::size_t n1 = mu1.size();
  const std::size_t n2 = mu2.size();
  if (n2 != 0 && n1 > kMaxProductSize / n2) {
    throw std::length_error("productSpace: more than 10^6 points");
  }
  auto space = makeSpace(
      FiniteMetricSpace::product(mu1.spacePtr(), mu2.spacePtr()));
  std::vector<double> p(n1 * n2), q(n1 * n2);
  for (std::size_t i = 0; i < n1; ++i) {
    for (std::size_t j = 0; j < n2; ++j) {
      p[i * n2 + j] = mu1[i] * mu2[j];
      q[i * n2 + j] = nu1[i] * nu2[j];
    }
  }
  return {DiscreteDistribution(space, std::move(p)),
          DiscreteDistribution(space, std::move(q))};
}

}  // namespace metric_atlas
