#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "metric_atlas/bounds.hpp"
#include "metric_atlas/io.hpp"
#include "metric_atlas/walks.hpp"

using namespace metric_atlas;

namespace {

const BoundEdge& edge(const std::string& id) {
  for (const auto& e : edgeCatalog()) {
    if (e.id == id) return e;
  }
  throw std::out_of_range(id);
}

const EdgeResult& result(const CertificationReport& r, const std::string& id) {
  for (const auto& e : r.edges) {
    if (e.edgeId == id) return e;
  }
  throw std::out_of_range(id);
}

FiniteInstance z10Instance() {
  auto c10 = makeSpace(FiniteMetricSpace::cycle(10));
  return {{"z10", "cycle", 10, 0.0, 0},
          DiscreteDistribution(c10, {.6, .1, .1, .1, .1, 0, 0, 0, 0, 0}),
          DiscreteDistribution::uniform(c10)};
}

}  // namespace

TEST(EdgeCatalog, Shape) {
  const auto& cat = edgeCatalog();
  EXPECT_EQ(cat.size(), 24u);
  std::set<std::string> ids;
  for (const auto& e : cat) ids.insert(e.id);
  EXPECT_EQ(ids.size(), cat.size());
}

TEST(EdgeCatalog, TransformsAreMonotone) {
  EdgeContext ctx;
  ctx.finite = ctx.onReal = ctx.dominated = true;
  ctx.densityBound = 0.4;
  ctx.diameter = 3.0;
  ctx.minDistance = 0.5;
  ctx.values.set(Metric::TV, 0.3);
  ctx.phi = PhiModulus({0.0, 1.0, 2.0}, {0.0, 0.2, 0.5});
  for (const auto& e : edgeCatalog()) {
    double prev = -1.0;
    for (double x = 0.0; x <= 4.0; x += 0.01) {
      const double h = e.transform(x, ctx);
      EXPECT_GE(h, prev) << e.id << " at " << x;
      prev = h;
    }
  }
}

TEST(EdgeCatalog, Applicability) {
  auto inst = z10Instance();
  const auto ctx = profile(inst);
  ASSERT_TRUE(ctx.dominated);
  EXPECT_FALSE(edge("TV<=S").applies.rejects(ctx).has_value());
  EXPECT_FALSE(edge("H<=sqrt(chi2)").applies.rejects(ctx).has_value());
  EXPECT_TRUE(edge("K<=(1+sup|G'|)L").applies.rejects(ctx).has_value());
  EXPECT_TRUE(edge("L<=K").applies.rejects(ctx).has_value());
}

TEST(EvaluateEdge, InfinityRules) {
  const auto& e = edge("I<=chi2");
  EdgeContext ctx;
  ctx.values.set(Metric::TV, 0.5);
  ctx.values.set(Metric::I, kInfinity);
  ctx.values.set(Metric::Chi2, kInfinity);
  EXPECT_EQ(evaluateEdge(e, ctx).status, EdgeStatus::Pass);
  ctx.values.set(Metric::Chi2, 2.0);
  EXPECT_EQ(evaluateEdge(e, ctx).status, EdgeStatus::Fail);
  ctx.values.set(Metric::I, 2.0 + 1.5e-9);
  EXPECT_EQ(evaluateEdge(e, ctx).status, EdgeStatus::Pass);
  ctx.values.set(Metric::I, 2.0 + 3e-9);
  EXPECT_EQ(evaluateEdge(e, ctx).status, EdgeStatus::Fail);
  ctx.values.set(Metric::I, 1.0);
  const auto r = evaluateEdge(e, ctx);
  EXPECT_EQ(r.status, EdgeStatus::Pass);
  EXPECT_EQ(r.slack, 1.0);
}

TEST(Certify, Z10AllApplicableEdgesPass) {
  const auto report = certify(z10Instance());
  EXPECT_EQ(report.count(EdgeStatus::Fail), 0u);
  const auto& pinsker = result(report, "2TV^2<=I");
  EXPECT_EQ(pinsker.status, EdgeStatus::Pass);
  EXPECT_NEAR(pinsker.lhs, 0.5, 1e-15);
  EXPECT_NEAR(pinsker.rhs, 1.075, 1e-3);
  EXPECT_EQ(result(report, "L<=K").status, EdgeStatus::Skip);
}

TEST(Certify, IdenticalPairHasZeroLeftSides) {
  auto c = makeSpace(FiniteMetricSpace::cycle(7));
  const DiscreteDistribution mu(c, {.3, .1, .1, .2, .1, .1, .1});
  const auto report = certify(FiniteInstance{{"same", "cycle", 7, 0, 0}, mu, mu});
  for (const auto& e : report.edges) {
    if (e.status == EdgeStatus::Skip) continue;
    EXPECT_EQ(e.status, EdgeStatus::Pass) << e.edgeId;
    EXPECT_NEAR(e.lhs, 0.0, 1e-15) << e.edgeId;
  }
}

TEST(Certify, UniformOneToTenAgainstOneToNine) {
  auto line = makeSpace(FiniteMetricSpace::line({1, 2, 3, 4, 5, 6, 7, 8, 9, 10}));
  std::vector<double> p9(10, 1.0 / 9.0);
  p9[9] = 0.0;
  const FiniteInstance inst{{"aldous", "euclidean", 10, 0, 0},
                            DiscreteDistribution::uniform(line),
                            DiscreteDistribution(line, p9)};
  const auto report = certify(inst);
  EXPECT_EQ(report.count(EdgeStatus::Fail), 0u);
  const auto& tvs = result(report, "TV<=S");
  EXPECT_NEAR(tvs.lhs, 0.1, 1e-15);
  EXPECT_NEAR(tvs.rhs, 0.1, 1e-15);
  EXPECT_EQ(result(report, "2TV^2<=I").rhs, kInfinity);
  EXPECT_EQ(result(report, "2TV^2<=I").status, EdgeStatus::Pass);
  EXPECT_EQ(result(report, "H<=sqrt(chi2)").status, EdgeStatus::Skip);
  EXPECT_EQ(result(report, "L<=K").status, EdgeStatus::Pass);
}

TEST(Certify, DudleyInstances) {
  for (double n : {2.0, 10.0, 1000.0}) {
    const auto report = certify(dudleySequence(n));
    EXPECT_EQ(report.count(EdgeStatus::Fail), 0u) << n;
  }
}

TEST(Certify, MixedRealInstance) {
  const MixedRealInstance inst{{"binomial-16", "real", 17, 0, 0},
                               standardizedBinomial(16),
                               SmoothRealCdf::standardNormal()};
  const auto report = certify(inst);
  EXPECT_EQ(report.count(EdgeStatus::Fail), 0u);
  EXPECT_EQ(result(report, "K<=(1+sup|G'|)L").status, EdgeStatus::Pass);
  EXPECT_EQ(result(report, "K<=D").status, EdgeStatus::Pass);
  EXPECT_EQ(result(report, "D<=2K").status, EdgeStatus::Pass);
  EXPECT_EQ(result(report, "P<=TV").status, EdgeStatus::Skip);
}

TEST(TightnessWitnesses, EqualityCases) {
  // TV = S for uniform against a point mass.
  auto c = makeSpace(FiniteMetricSpace::cycle(5));
  const auto r1 = certify(FiniteInstance{{"pm", "cycle", 5, 0, 0},
                                         DiscreteDistribution::uniform(c),
                                         DiscreteDistribution::pointMass(c, 0)});
  EXPECT_NEAR(result(r1, "TV<=S").slack, 0.0, 1e-9);
  // Disjoint supports: H^2/2 = TV = 1.
  const auto r2 = certify(FiniteInstance{{"disjoint", "cycle", 5, 0, 0},
                                         DiscreteDistribution::pointMass(c, 0),
                                         DiscreteDistribution::pointMass(c, 2)});
  EXPECT_NEAR(result(r2, "H^2/2<=TV").slack, 0.0, 1e-9);
  // Identical laws make TV <= H tight.
  const auto r3 = certify(FiniteInstance{{"equal", "cycle", 5, 0, 0},
                                         DiscreteDistribution::uniform(c),
                                         DiscreteDistribution::uniform(c)});
  EXPECT_NEAR(result(r3, "TV<=H").slack, 0.0, 1e-9);
  // delta vs delta on R: K = D = 1 and L <= K becomes L = K when the gap is >= 1.
  auto line = makeSpace(FiniteMetricSpace::line({0.0, 2.0}));
  const auto r4 = certify(FiniteInstance{{"dd", "euclidean", 2, 0, 0},
                                         DiscreteDistribution::pointMass(line, 0),
                                         DiscreteDistribution::pointMass(line, 1)});
  EXPECT_NEAR(result(r4, "K<=D").slack, 0.0, 1e-9);
  EXPECT_NEAR(result(r4, "L<=K").slack, 0.0, 1e-9);
  // D = 2K: atoms at 0 and 2 against one atom at 1.
  auto three = makeSpace(FiniteMetricSpace::line({0.0, 1.0, 2.0}));
  const auto r5 = certify(FiniteInstance{{"dk", "euclidean", 3, 0, 0},
                                         DiscreteDistribution(three, {0.5, 0.0, 0.5}),
                                         DiscreteDistribution::pointMass(three, 1)});
  EXPECT_NEAR(result(r5, "D<=2K").slack, 0.0, 1e-9);
}

TEST(ConvergentSequence, HellingerAndTvVanishTogether) {
  auto c = makeSpace(FiniteMetricSpace::cycle(8));
  const auto nu = DiscreteDistribution::uniform(c);
  const auto mu0 = DiscreteDistribution::pointMass(c, 3);
  double prevH = kInfinity, prevTv = kInfinity;
  for (int k = 1; k <= 4096; k *= 2) {
    std::vector<double> p(8);
    const double t = 1.0 / k;
    for (std::size_t i = 0; i < 8; ++i) p[i] = (1 - t) * nu[i] + t * mu0[i];
    const DiscreteDistribution mu(c, p);
    const double h = hellinger(mu, nu);
    const double tv = totalVariation(mu, nu);
    EXPECT_LE(h, prevH);
    EXPECT_LE(tv, prevTv);
    EXPECT_LE(tv, h + 1e-15);
    EXPECT_LE(h * h / 2, tv + 1e-15);
    prevH = h;
    prevTv = tv;
  }
  EXPECT_LT(prevH, 1e-3);
  EXPECT_LT(prevTv, 1e-3);
}

TEST(RandomInstance, Deterministic) {
  for (auto kind : {InstanceKind::Euclidean, InstanceKind::Cycle, InstanceKind::RandomMetric}) {
    const auto a = randomInstance(77, 4, 10, kind, 0.3);
    const auto b = randomInstance(77, 4, 10, kind, 0.3);
    ASSERT_EQ(a.mu.size(), b.mu.size());
    EXPECT_TRUE(a.mu.space().sameGeometry(b.mu.space()));
    for (std::size_t i = 0; i < a.mu.size(); ++i) {
      EXPECT_EQ(a.mu[i], b.mu[i]);
      EXPECT_EQ(a.nu[i], b.nu[i]);
    }
    EXPECT_GE(a.mu.size(), 4u);
    EXPECT_LE(a.mu.size(), 10u);
  }
}

TEST(RandomInstance, CycleKind) {
  const auto inst = randomInstance(5, 10, 10, InstanceKind::Cycle, 0.0);
  EXPECT_TRUE(inst.mu.space().sameGeometry(FiniteMetricSpace::cycle(10)));
}

TEST(RandomInstance, SparsityStatistics) {
  std::size_t zeros = 0, total = 0;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const auto inst = randomInstance(mixSeed(9, s), 10, 10, InstanceKind::Cycle, 0.5);
    for (std::size_t i = 0; i < inst.mu.size(); ++i) zeros += inst.mu[i] == 0.0;
    total += inst.mu.size();
  }
  EXPECT_NEAR(static_cast<double>(zeros) / total, 0.5, 0.05);
}

TEST(RandomInstance, RejectsBadSizes) {
  EXPECT_THROW(randomInstance(0, 1, 4, InstanceKind::Cycle, 0), std::invalid_argument);
  EXPECT_THROW(randomInstance(0, 5, 4, InstanceKind::Cycle, 0), std::invalid_argument);
  EXPECT_THROW(randomInstance(0, 4, 65, InstanceKind::Cycle, 0), std::invalid_argument);
}

TEST(Campaign, NoFailuresAndThreadIndependent) {
  CampaignConfig cfg;
  cfg.trials = 150;
  cfg.seed = 3;
  cfg.threads = 1;
  const auto serial = runCampaign(cfg);
  cfg.threads = 4;
  const auto parallel = runCampaign(cfg);
  // skipped rows carry NaN, so compare the serialised form
  EXPECT_EQ(io::reportToCsv(serial), io::reportToCsv(parallel));
  for (std::size_t i = 0; i < serial.size(); ++i) {
    EXPECT_EQ(serial[i].count(EdgeStatus::Fail), 0u) << serial[i].instance.id;
  }
}
