#pragma once

// Catalog of inequalities between the ten distances, with applicability
// predicates, plus per-instance certification and randomized campaigns.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <optional>
#include <mutex>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <variant>
#include <vector>

#include "metric_atlas/divergences.hpp"
#include "metric_atlas/numeric.hpp"
#include "metric_atlas/spaces.hpp"
#include "metric_atlas/transport.hpp"

namespace metric_atlas {

enum class Metric { D, H, I, K, L, P, S, TV, W, Chi2 };

inline constexpr std::array<Metric, 10> kAllMetrics{
    Metric::D, Metric::H, Metric::I, Metric::K, Metric::L,
    Metric::P, Metric::S, Metric::TV, Metric::W, Metric::Chi2};

inline std::string_view metricTag(Metric m) {
  switch (m) {
    case Metric::D: return "D";
    case Metric::H: return "H";
    case Metric::I: return "I";
    case Metric::K: return "K";
    case Metric::L: return "L";
    case Metric::P: return "P";
    case Metric::S: return "S";
    case Metric::TV: return "TV";
    case Metric::W: return "W";
    case Metric::Chi2: return "chi2";
  }
  return "?";
}

/// Metric values known for one instance; unset entries are unavailable.
class MetricValues {
 public:
  void set(Metric m, double v) { values_[index(m)] = v; }
  std::optional<double> get(Metric m) const { return values_[index(m)]; }
  double at(Metric m) const {
    const auto v = get(m);
    if (!v) {
      throw std::logic_error("metric " + std::string(metricTag(m)) +
                             " not computed");
    }
    return *v;
  }

 private:
  static std::size_t index(Metric m) { return static_cast<std::size_t>(m); }
  std::array<std::optional<double>, 10> values_{};
};

/// Everything an edge's applicability predicate and transform may consult.
struct EdgeContext {
  bool onReal = false;
  bool finite = false;
  bool dominated = false;  // support(mu) within support(nu)
  std::optional<double> densityBound;
  double diameter = kInfinity;
  double minDistance = 0.0;
  MetricValues values;
  std::optional<PhiModulus> phi;
};

struct Applicability {
  bool real = false;
  bool finite = false;
  bool domination = false;
  bool boundedDiameter = false;
  bool densityBound = false;

  /// Reason the edge does not apply, or nullopt when it does.
  std::optional<std::string> rejects(const EdgeContext& ctx) const {
    if (real && !ctx.onReal) return "requires a distribution pair on R";
    if (finite && !ctx.finite) return "requires a finite metric space";
    if (domination && !ctx.dominated) return "requires nu to dominate mu";
    if (boundedDiameter && !std::isfinite(ctx.diameter)) {
      return "requires a bounded space";
    }
    if (densityBound && !ctx.densityBound) {
      return "requires a declared density bound for nu";
    }
    return std::nullopt;
  }
};

/// One inequality lhs <= transform(rhs).
struct BoundEdge {
  std::string id;
  Metric lhs;
  Metric rhs;
  Applicability applies;
  std::function<double(double, const EdgeContext&)> transform;
};

/// The inequality catalog. Each edge reads d_lhs <= h(d_rhs).
inline const std::vector<BoundEdge>& edgeCatalog() {
  using M = Metric;
  using Ctx = const EdgeContext&;
  static const std::vector<BoundEdge> catalog = [] {
    std::vector<BoundEdge> e;
    auto identity = [](double x, Ctx) { return x; };
    e.push_back({"L<=K", M::L, M::K, {.real = true}, identity});
    e.push_back({"K<=(1+sup|G'|)L", M::K, M::L,
                 {.real = true, .densityBound = true},
                 [](double x, Ctx c) { return (1.0 + *c.densityBound) * x; }});
    e.push_back({"K<=D", M::K, M::D, {.real = true}, identity});
    e.push_back({"D<=2K", M::D, M::K, {.real = true},
                 [](double x, Ctx) { return 2.0 * x; }});
    e.push_back({"L<=P", M::L, M::P, {.real = true, .finite = true}, identity});
    // The argument of phi is nudged up by the flow tolerance: when the true
    // distance sits exactly on a jump of phi, a computed value a hair below
    // it would read the lower step.
    e.push_back({"D<=P+phi(P)", M::D, M::P, {.finite = true},
                 [](double x, Ctx c) {
                   return x + (*c.phi)(x + 1e-9 * std::max(1.0, x));
                 }});
    e.push_back({"P^2<=W", M::P, M::W, {},
                 [](double x, Ctx) { return std::sqrt(x); }});
    e.push_back({"W<=(diam+1)P", M::W, M::P, {.boundedDiameter = true},
                 [](double x, Ctx c) { return (c.diameter + 1.0) * x; }});
    e.push_back({"dmin*D<=W", M::D, M::W, {.finite = true},
                 [](double x, Ctx c) { return x / c.minDistance; }});
    e.push_back({"D<=TV", M::D, M::TV, {}, identity});
    e.push_back({"P<=TV", M::P, M::TV, {}, identity});
    e.push_back({"W<=diam*TV", M::W, M::TV, {.boundedDiameter = true},
                 [](double x, Ctx c) { return c.diameter * x; }});
    e.push_back({"dmin*TV<=W", M::TV, M::W, {.finite = true},
                 [](double x, Ctx c) { return x / c.minDistance; }});
    e.push_back({"H^2/2<=TV", M::H, M::TV, {},
                 [](double x, Ctx) { return std::sqrt(2.0 * x); }});
    e.push_back({"TV<=H", M::TV, M::H, {}, identity});
    e.push_back({"TV<=S", M::TV, M::S, {}, identity});
    e.push_back({"2TV^2<=I", M::TV, M::I, {},
                 [](double x, Ctx) { return std::sqrt(0.5 * x); }});
    e.push_back({"H^2<=I", M::H, M::I, {},
                 [](double x, Ctx) { return std::sqrt(x); }});
    e.push_back({"H<=sqrt2*chi2^(1/4)", M::H, M::Chi2, {},
                 [](double x, Ctx) { return std::sqrt(2.0) * std::pow(x, 0.25); }});
    e.push_back({"H<=sqrt(chi2)", M::H, M::Chi2, {.domination = true},
                 [](double x, Ctx) { return std::sqrt(x); }});
    e.push_back({"TV<=sqrt(chi2)/2", M::TV, M::Chi2, {},
                 [](double x, Ctx) { return 0.5 * std::sqrt(x); }});
    e.push_back({"I<=log(1+chi2)", M::I, M::Chi2, {},
                 [](double x, Ctx) { return std::log1p(x); }});
    e.push_back({"I<=chi2", M::I, M::Chi2, {}, identity});
    e.push_back({"I<=TV+chi2/2", M::I, M::Chi2, {},
                 [](double x, Ctx c) { return c.values.at(M::TV) + 0.5 * x; }});
    return e;
  }();
  return catalog;
}

enum class EdgeStatus { Pass, Skip, Fail };

inline std::string_view statusTag(EdgeStatus s) {
  switch (s) {
    case EdgeStatus::Pass: return "PASS";
    case EdgeStatus::Skip: return "SKIP";
    case EdgeStatus::Fail: return "FAIL";
  }
  return "?";
}

inline EdgeStatus parseStatus(std::string_view s) {
  if (s == "PASS") return EdgeStatus::Pass;
  if (s == "SKIP") return EdgeStatus::Skip;
  if (s == "FAIL") return EdgeStatus::Fail;
  throw std::invalid_argument("unknown edge status '" + std::string(s) + "'");
}

struct EdgeResult {
  std::string edgeId;
  double lhs = 0.0;
  double rhs = 0.0;
  double hRhs = 0.0;
  double slack = 0.0;
  EdgeStatus status = EdgeStatus::Skip;
  std::string reason;

  bool operator==(const EdgeResult&) const = default;
};

struct InstanceDescriptor {
  std::string id;
  std::string kind;
  std::size_t size = 0;
  double sparsity = 0.0;
  std::uint64_t seed = 0;

  bool operator==(const InstanceDescriptor&) const = default;
};

struct CertificationReport {
  InstanceDescriptor instance;
  std::vector<EdgeResult> edges;

  std::size_t count(EdgeStatus s) const {
    return static_cast<std::size_t>(
        std::count_if(edges.begin(), edges.end(),
                      [s](const EdgeResult& r) { return r.status == s; }));
  }
  bool passed() const { return count(EdgeStatus::Fail) == 0; }

  bool operator==(const CertificationReport&) const = default;
};

inline constexpr double kCertificationSlack = 1e-9;

/// Evaluates one edge. +inf on the right passes vacuously; +inf on the left
/// against a finite bound fails.
inline EdgeResult evaluateEdge(const BoundEdge& edge, const EdgeContext& ctx) {
  EdgeResult r;
  r.edgeId = edge.id;
  if (auto why = edge.applies.rejects(ctx)) {
    r.status = EdgeStatus::Skip;
    r.reason = *why;
    return r;
  }
  const auto lhs = ctx.values.get(edge.lhs);
  const auto rhs = ctx.values.get(edge.rhs);
  if (!lhs || !rhs) {
    r.status = EdgeStatus::Skip;
    r.reason = "metric " +
               std::string(metricTag(lhs ? edge.rhs : edge.lhs)) +
               " is not defined for this instance";
    return r;
  }
  r.lhs = *lhs;
  r.rhs = *rhs;
  r.hRhs = edge.transform(*rhs, ctx);
  r.slack = r.hRhs - r.lhs;
  if (std::isinf(r.rhs) || std::isinf(r.hRhs)) {
    r.status = EdgeStatus::Pass;
    r.reason = "vacuous: infinite bound";
  } else if (std::isinf(r.lhs)) {
    r.status = EdgeStatus::Fail;
    r.reason = "infinite left side against a finite bound";
  } else if (std::isnan(r.lhs) || std::isnan(r.hRhs)) {
    r.status = EdgeStatus::Fail;
    r.reason = "NaN encountered";
  } else if (r.lhs > r.hRhs + kCertificationSlack * std::max(1.0, r.hRhs)) {
    r.status = EdgeStatus::Fail;
    r.reason = "inequality violated";
  } else {
    r.status = EdgeStatus::Pass;
  }
  return r;
}

/// A pair of distributions on one finite metric space.
struct FiniteInstance {
  InstanceDescriptor descriptor;
  DiscreteDistribution mu;
  DiscreteDistribution nu;
};

/// Atomic mu against a continuous nu on the real line.
struct MixedRealInstance {
  InstanceDescriptor descriptor;
  RealAtomicDistribution mu;
  SmoothRealCdf nu;
};

/// Computes every metric that is defined for a finite instance.
inline EdgeContext profile(const FiniteInstance& inst) {
  const auto& mu = inst.mu;
  const auto& nu = inst.nu;
  requireSameSpace(mu, nu);
  const FiniteMetricSpace& space = mu.space();
  EdgeContext ctx;
  ctx.finite = true;
  ctx.dominated = nu.dominates(mu);
  ctx.diameter = space.diameter();
  ctx.minDistance = space.minDistance();
  ctx.values.set(Metric::D, discrepancyFinite(mu, nu));
  ctx.values.set(Metric::H, hellinger(mu, nu));
  ctx.values.set(Metric::I, relativeEntropy(mu, nu));
  ctx.values.set(Metric::P, prokhorov(mu, nu));
  ctx.values.set(Metric::S, separation(mu, nu));
  ctx.values.set(Metric::TV, totalVariation(mu, nu));
  ctx.values.set(Metric::W, wassersteinFinite(mu, nu).value);
  ctx.values.set(Metric::Chi2, chiSquared(mu, nu));
  ctx.phi = tightestPhi(nu);
  if (auto xs = space.lineCoordinates()) {
    ctx.onReal = true;
    const auto f = RealAtomicDistribution::fromPoints(*xs, mu.probabilities());
    const auto g = RealAtomicDistribution::fromPoints(*xs, nu.probabilities());
    ctx.values.set(Metric::K, kolmogorov(f, g));
    ctx.values.set(Metric::L, levy(f, g));
  }
  return ctx;
}

/// Metrics for an atomic-versus-continuous pair on R. Every atom is a null
/// set for nu, so TV = 1, H = sqrt(2) and I = chi2 = +inf.
inline EdgeContext profile(const MixedRealInstance& inst) {
  EdgeContext ctx;
  ctx.onReal = true;
  ctx.densityBound = inst.nu.densityBound();
  ctx.values.set(Metric::K, kolmogorov(inst.mu, inst.nu));
  ctx.values.set(Metric::L, levy(inst.mu, inst.nu));
  ctx.values.set(Metric::D, discrepancyRealMixed(inst.mu, inst.nu));
  ctx.values.set(Metric::TV, 1.0);
  ctx.values.set(Metric::H, std::sqrt(2.0));
  ctx.values.set(Metric::I, kInfinity);
  ctx.values.set(Metric::Chi2, kInfinity);
  return ctx;
}

inline CertificationReport certify(const InstanceDescriptor& descriptor,
                                   const EdgeContext& ctx) {
  CertificationReport report{descriptor, {}};
  for (const BoundEdge& edge : edgeCatalog()) {
    report.edges.push_back(evaluateEdge(edge, ctx));
  }
  return report;
}

inline CertificationReport certify(const FiniteInstance& inst) {
  return certify(inst.descriptor, profile(inst));
}

inline CertificationReport certify(const MixedRealInstance& inst) {
  return certify(inst.descriptor, profile(inst));
}

// ---------------------------------------------------------------------------
// Random instances

enum class InstanceKind { Euclidean, Cycle, RandomMetric };

inline std::string_view kindTag(InstanceKind k) {
  switch (k) {
    case InstanceKind::Euclidean: return "euclidean";
    case InstanceKind::Cycle: return "cycle";
    case InstanceKind::RandomMetric: return "random-metric";
  }
  return "?";
}

inline InstanceKind parseInstanceKind(std::string_view s) {
  if (s == "euclidean") return InstanceKind::Euclidean;
  if (s == "cycle") return InstanceKind::Cycle;
  if (s == "random-metric") return InstanceKind::RandomMetric;
  throw std::invalid_argument("unknown instance kind '" + std::string(s) + "'");
}

/// splitmix64 finaliser; derives independent per-trial seeds.
inline std::uint64_t mixSeed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace detail {

inline double unitUniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Dirichlet(1,...,1) with each coordinate independently zeroed with
// probability `sparsity`; at least one coordinate survives.
inline std::vector<double> sparseDirichlet(std::mt19937_64& rng, std::size_t n,
                                           double sparsity) {
  std::vector<double> w(n);
  bool any = false;
  for (auto& v : w) {
    const bool zero = unitUniform(rng) < sparsity;
    const double e = -std::log1p(-unitUniform(rng));
    v = zero ? 0.0 : std::max(e, 1e-300);
    any = any || v > 0.0;
  }
  if (!any) w[rng() % n] = 1.0;
  CompensatedSum total;
  for (double v : w) total += v;
  for (auto& v : w) v /= total.value();
  return w;
}

}  // namespace detail

/// Deterministic random instance. Random metrics are the shortest-path
/// closure of a complete graph with weights in [0.1, 1].
inline FiniteInstance randomInstance(std::uint64_t seed, std::size_t sizeMin,
                                     std::size_t sizeMax, InstanceKind kind,
                                     double sparsity) {
  if (sizeMin < 2 || sizeMin > sizeMax || sizeMax > 64) {
    throw std::invalid_argument("randomInstance: sizes must satisfy 2 <= min "
                                "<= max <= 64");
  }
  if (!(sparsity >= 0.0 && sparsity < 1.0)) {
    throw std::invalid_argument("randomInstance: sparsity must be in [0, 1)");
  }
  std::mt19937_64 rng(seed);
  const std::size_t n = sizeMin + rng() % (sizeMax - sizeMin + 1);
  SpacePtr space;
  switch (kind) {
    case InstanceKind::Cycle:
      space = makeSpace(FiniteMetricSpace::cycle(n));
      break;
    case InstanceKind::Euclidean: {
      const std::size_t dim = 1 + rng() % 2;
      std::vector<std::vector<double>> pts(n, std::vector<double>(dim));
      for (auto& p : pts) {
        for (auto& c : p) c = detail::unitUniform(rng);
      }
      space = makeSpace(FiniteMetricSpace::euclidean(pts));
      break;
    }
    case InstanceKind::RandomMetric: {
      std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          d[i][j] = d[j][i] = 0.1 + 0.9 * detail::unitUniform(rng);
        }
      }
      for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < n; ++j) {
            d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
          }
        }
      }
      space = makeSpace(FiniteMetricSpace(d));
      break;
    }
  }
  auto mu = detail::sparseDirichlet(rng, n, sparsity);
  auto nu = detail::sparseDirichlet(rng, n, sparsity);
  InstanceDescriptor desc{"seed-" + std::to_string(seed),
                          std::string(kindTag(kind)), n, sparsity, seed};
  return {desc, DiscreteDistribution(space, std::move(mu)),
          DiscreteDistribution(space, std::move(nu))};
}

struct CampaignConfig {
  std::uint64_t seed = 0;
  std::size_t trials = 1000;
  std::size_t sizeMin = 4;
  std::size_t sizeMax = 10;
  std::vector<InstanceKind> kinds{InstanceKind::Euclidean, InstanceKind::Cycle,
                                  InstanceKind::RandomMetric};
  std::vector<double> sparsities{0.0, 0.3};
  std::size_t threads = 0;  // 0: hardware concurrency
};

/// Trial i uses kinds[i % K], sparsities[(i / K) % S] and a seed derived
/// from (seed, i). Reports come back in trial order whatever the thread
/// count.
inline std::vector<CertificationReport> runCampaign(const CampaignConfig& cfg) {
  if (cfg.trials == 0) throw std::invalid_argument("campaign: trials must be >= 1");
  if (cfg.kinds.empty() || cfg.sparsities.empty()) {
    throw std::invalid_argument("campaign: kinds and sparsities must be non-empty");
  }
  std::vector<CertificationReport> reports(cfg.trials);
  std::atomic<std::size_t> next{0};
  std::mutex errorMutex;
  std::exception_ptr error;
  auto worker = [&] {
    try {
      for (std::size_t i = next++; i < cfg.trials; i = next++) {
        const InstanceKind kind = cfg.kinds[i % cfg.kinds.size()];
        const double sparsity =
            cfg.sparsities[(i / cfg.kinds.size()) % cfg.sparsities.size()];
        auto inst = randomInstance(mixSeed(cfg.seed, i), cfg.sizeMin,
                                   cfg.sizeMax, kind, sparsity);
        inst.descriptor.id = "trial-" + std::to_string(i);
        reports[i] = certify(inst);
      }
    } catch (...) {
      std::lock_guard lock(errorMutex);
      if (!error) error = std::current_exception();
      next = cfg.trials;
    }
  };
  std::size_t threads = cfg.threads;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, cfg.trials);
  std::vector<std::jthread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  pool.clear();  // joins
  if (error) std::rethrow_exception(error);
  return reports;
}

}  // namespace metric_atlas
