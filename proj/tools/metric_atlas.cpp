// metric_atlas: compute probability metrics, certify the bound catalog on
// random instances, and emit walk experiment data as CSV.

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "metric_atlas/metric_atlas.hpp"

namespace ma = metric_atlas;
using ma::io::InputError;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitCertification = 2;

struct RunConfig {
  std::string command;
  std::vector<std::string> inputs;
  std::uint64_t seed = 0;
  std::size_t trials = 1000;
  std::string outputPath;
  std::string outputFormat = "csv";

  std::string metric;
  std::string sizeRange = "4..10";
  std::size_t cdgBits = 10;
  std::size_t steps = 60;
  std::size_t coordinates = 10;
  std::optional<double> groupSize;
  double timeMax = 0.0;
  std::size_t timePoints = 101;
};

// METRIC_ATLAS_THREADS caps parallelism; unset or invalid means no cap.
std::size_t threadBudget() {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("METRIC_ATLAS_THREADS")) {
    std::size_t cap = 0;
    const char* end = env + std::char_traits<char>::length(env);
    if (std::from_chars(env, end, cap).ec == std::errc() && cap > 0) {
      n = std::min(n, cap);
    }
  }
  return n;
}

void writeOutput(const RunConfig& cfg, const std::string& bytes) {
  if (cfg.outputPath.empty()) {
    std::cout << bytes;
    return;
  }
  std::ofstream out(cfg.outputPath, std::ios::binary);
  if (!out) throw InputError("--out", "cannot open '" + cfg.outputPath + "'");
  out << bytes;
}

std::pair<std::size_t, std::size_t> parseSizeRange(const std::string& s) {
  const auto dots = s.find("..");
  std::size_t lo = 0;
  std::size_t hi = 0;
  auto parse = [&](std::string_view part, std::size_t& v) {
    return std::from_chars(part.data(), part.data() + part.size(), v).ec ==
               std::errc() &&
           !part.empty();
  };
  const std::string_view sv(s);
  bool ok;
  if (dots == std::string::npos) {
    ok = parse(sv, lo);
    hi = lo;
  } else {
    ok = parse(sv.substr(0, dots), lo) && parse(sv.substr(dots + 2), hi);
  }
  if (!ok || lo < 2 || lo > hi || hi > 64) {
    throw InputError("--size", "expected MIN..MAX with 2 <= MIN <= MAX <= 64");
  }
  return {lo, hi};
}

// ---------------------------------------------------------------------------
// compute

// Both inputs as distributions on one finite space. Two atomic laws are
// placed on the line spanned by their merged atoms.
std::pair<ma::DiscreteDistribution, ma::DiscreteDistribution> commonSpace(
    const ma::io::AnyDistribution& a, const ma::io::AnyDistribution& b) {
  using Atomic = ma::RealAtomicDistribution;
  using Discrete = ma::DiscreteDistribution;
  if (std::holds_alternative<Discrete>(a) && std::holds_alternative<Discrete>(b)) {
    const auto& mu = std::get<Discrete>(a);
    const auto& nu = std::get<Discrete>(b);
    if (!mu.space().sameGeometry(nu.space())) {
      throw InputError("nu.space", "mu and nu must live on the same space");
    }
    return {mu, nu.on(mu.spacePtr())};
  }
  if (std::holds_alternative<Atomic>(a) && std::holds_alternative<Atomic>(b)) {
    const auto& f = std::get<Atomic>(a);
    const auto& g = std::get<Atomic>(b);
    std::vector<double> xs;
    for (const auto& at : f.atoms()) xs.push_back(at.x);
    for (const auto& at : g.atoms()) xs.push_back(at.x);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    auto space = ma::makeSpace(ma::FiniteMetricSpace::line(xs));
    auto spread = [&](const Atomic& d) {
      std::vector<double> p(xs.size(), 0.0);
      for (const auto& at : d.atoms()) {
        p[std::lower_bound(xs.begin(), xs.end(), at.x) - xs.begin()] = at.w;
      }
      return Discrete(space, std::move(p));
    };
    return {spread(f), spread(g)};
  }
  throw InputError("nu", "mu and nu must both be atomic or both be finite-space "
                         "distributions");
}

double computeMetric(const std::string& metric, const ma::DiscreteDistribution& mu,
                     const ma::DiscreteDistribution& nu) {
  auto onLine = [&](const char* name) {
    auto xs = mu.space().lineCoordinates();
    if (!xs) {
      throw InputError("--metric", std::string(name) +
                                       " requires distributions on the real "
                                       "line (a 1-D euclidean space or atoms)");
    }
    return std::pair{ma::RealAtomicDistribution::fromPoints(*xs, mu.probabilities()),
                     ma::RealAtomicDistribution::fromPoints(*xs, nu.probabilities())};
  };
  if (metric == "tv") return ma::totalVariation(mu, nu);
  if (metric == "hellinger") return ma::hellinger(mu, nu);
  if (metric == "entropy") return ma::relativeEntropy(mu, nu);
  if (metric == "chi2") return ma::chiSquared(mu, nu);
  if (metric == "separation") return ma::separation(mu, nu);
  if (metric == "discrepancy") return ma::discrepancyFinite(mu, nu);
  if (metric == "prokhorov") return ma::prokhorov(mu, nu);
  if (metric == "wasserstein") return ma::wassersteinFinite(mu, nu).value;
  if (metric == "kolmogorov") {
    auto [f, g] = onLine("kolmogorov");
    return ma::kolmogorov(f, g);
  }
  if (metric == "levy") {
    auto [f, g] = onLine("levy");
    return ma::levy(f, g);
  }
  throw InputError("--metric", "unknown metric '" + metric + "'");
}

int runCompute(const RunConfig& cfg) {
  const auto mu = ma::io::loadDistribution(cfg.inputs.at(0));
  const auto nu = ma::io::loadDistribution(cfg.inputs.at(1));
  const auto [m, n] = commonSpace(mu, nu);
  std::cout << ma::formatReal(computeMetric(cfg.metric, m, n)) << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------
// certify

int runCertify(const RunConfig& cfg) {
  if (cfg.trials < 1) throw InputError("--trials", "must be >= 1");
  const auto [lo, hi] = parseSizeRange(cfg.sizeRange);
  ma::CampaignConfig campaign;
  campaign.seed = cfg.seed;
  campaign.trials = cfg.trials;
  campaign.sizeMin = lo;
  campaign.sizeMax = hi;
  campaign.threads = threadBudget();
  const auto reports = ma::runCampaign(campaign);
  const auto format = cfg.outputFormat == "json" ? ma::io::ReportFormat::Json
                                                 : ma::io::ReportFormat::Csv;
  writeOutput(cfg, ma::io::emitReport(reports, format));

  std::size_t failures = 0;
  for (const auto& r : reports) {
    for (const auto& e : r.edges) {
      if (e.status == ma::EdgeStatus::Fail) {
        ++failures;
        std::cerr << "FAIL " << r.instance.id << ' ' << e.edgeId << ": "
                  << ma::formatReal(e.lhs) << " > " << ma::formatReal(e.hRhs)
                  << '\n';
      }
    }
  }
  return failures == 0 ? kExitOk : kExitCertification;
}

// ---------------------------------------------------------------------------
// walks

int runWalkCdg(const RunConfig& cfg) {
  if (cfg.cdgBits < 2 || cfg.cdgBits > 26) {
    throw InputError("--t", "expected 2 <= t <= 26 (p = 2^t - 1)");
  }
  const std::size_t p = (std::size_t{1} << cfg.cdgBits) - 1;
  std::ostringstream out;
  out << "step,tv,disc\n";
  for (const auto& row : ma::cdgEvolution(p, cfg.steps)) {
    out << row.step << ',' << ma::formatReal(row.tv) << ','
        << ma::formatReal(row.disc) << '\n';
  }
  writeOutput(cfg, out.str());
  return kExitOk;
}

int runWalkProduct(const RunConfig& cfg) {
  const std::size_t n = cfg.coordinates;
  if (n < 1 || n > 1000) throw InputError("--n", "expected 1 <= n <= 1000");
  const double g = cfg.groupSize.value_or(std::ldexp(1.0, static_cast<int>(n)));
  if (!(g >= 2.0) || !std::isfinite(g)) throw InputError("--g", "expected g >= 2");
  if (cfg.timePoints < 2) throw InputError("--points", "expected at least 2");
  double tMax = cfg.timeMax;
  if (tMax == 0.0) tMax = 2.0 * static_cast<double>(n * n) * std::log(2.0);
  if (!(tMax > 0.0) || !std::isfinite(tMax)) {
    throw InputError("--t-max", "expected a positive time");
  }

  std::vector<ma::ProductWalkDistances> rows(cfg.timePoints);
  auto timeAt = [&](std::size_t i) {
    return tMax * static_cast<double>(i) / static_cast<double>(cfg.timePoints - 1);
  };
  const std::size_t threads = std::min(threadBudget(), cfg.timePoints);
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < rows.size(); i += threads) {
          rows[i] = ma::productWalkDistances({n, g, timeAt(i)});
        }
      });
    }
  }
  std::ostringstream out;
  out << "time,tv,entropy,chi2,hellinger,separation\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& d = rows[i];
    out << ma::formatReal(timeAt(i)) << ',' << ma::formatReal(d.tv) << ','
        << ma::formatReal(d.entropy) << ',' << ma::formatReal(d.chi2) << ','
        << ma::formatReal(d.hellinger) << ',' << ma::formatReal(d.separation)
        << '\n';
  }
  writeOutput(cfg, out.str());
  return kExitOk;
}

// ---------------------------------------------------------------------------
// demo

int runDemo(const RunConfig& cfg) {
  std::ostringstream out;
  out << "example,quantity,value\n";
  auto row = [&](const std::string& ex, const std::string& q, double v) {
    out << ex << ',' << q << ',' << ma::formatReal(v) << '\n';
  };

  auto z10 = ma::makeSpace(ma::FiniteMetricSpace::cycle(10));
  const ma::DiscreteDistribution mu(z10, {.6, .1, .1, .1, .1, 0, 0, 0, 0, 0});
  const ma::DiscreteDistribution nu(z10, {.2, .2, .2, .2, .2, 0, 0, 0, 0, 0});
  const auto u = ma::DiscreteDistribution::uniform(z10);
  row("z10", "entropy(mu,U)", ma::relativeEntropy(mu, u));
  row("z10", "entropy(nu,U)", ma::relativeEntropy(nu, u));
  row("z10", "tv(mu,U)", ma::totalVariation(mu, u));
  row("z10", "tv(nu,U)", ma::totalVariation(nu, u));

  for (double n : {2.0, 5.0, 10.0, 1000.0}) {
    const auto d = ma::dudleySequence(n);
    const std::string ex = "dudley-" + ma::formatReal(n);
    row(ex, "wasserstein", ma::wassersteinFinite(d.mu, d.nu).value);
    row(ex, "prokhorov", ma::prokhorov(d.mu, d.nu));
  }

  auto line = ma::makeSpace(ma::FiniteMetricSpace::line(
      {1, 2, 3, 4, 5, 6, 7, 8, 9, 10}));
  const auto ten = ma::DiscreteDistribution::uniform(line);
  std::vector<double> p9(10, 1.0 / 9.0);
  p9[9] = 0.0;
  const ma::DiscreteDistribution nine(line, p9);
  row("uniform-1..10-vs-1..9", "tv", ma::totalVariation(ten, nine));
  row("uniform-1..10-vs-1..9", "separation(1..10,1..9)", ma::separation(ten, nine));
  row("uniform-1..10-vs-1..9", "separation(1..9,1..10)", ma::separation(nine, ten));

  for (std::size_t n : {16, 1000}) {
    const auto r = ma::binomialNormalDemo(n);
    row("binomial-" + std::to_string(n), "tv", r.tv);
    row("binomial-" + std::to_string(n), "disc", r.disc);
  }
  writeOutput(cfg, out.str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  CLI::App app{"Probability metrics, bound certification and walk experiments"};
  app.require_subcommand(1);

  auto* compute = app.add_subcommand("compute", "Distance between two distributions");
  std::string muPath, nuPath;
  compute->add_option("--metric", cfg.metric,
                      "tv|hellinger|entropy|chi2|separation|discrepancy|"
                      "prokhorov|wasserstein|kolmogorov|levy")
      ->required();
  compute->add_option("--mu", muPath, "JSON distribution file")->required();
  compute->add_option("--nu", nuPath, "JSON distribution file")->required();

  auto* certify = app.add_subcommand(
      "certify",
      "Check every bound edge on seeded random instances.\n"
      "CSV columns: instance_id,edge_id,lhs,rhs,h_rhs,slack,status");
  certify->add_option("--trials", cfg.trials, "Number of instances")
      ->check(CLI::PositiveNumber);
  certify->add_option("--seed", cfg.seed, "Campaign seed");
  certify->add_option("--size", cfg.sizeRange, "Space size range MIN..MAX");
  certify->add_option("--out", cfg.outputPath, "Output file (default stdout)");
  certify->add_option("--format", cfg.outputFormat, "csv|json")
      ->check(CLI::IsMember({"csv", "json"}));

  auto* cdg = app.add_subcommand(
      "walk-cdg",
      "Doubling walk on Z_p, p = 2^t - 1.\nCSV columns: step,tv,disc");
  cdg->add_option("--t", cfg.cdgBits, "Exponent t");
  cdg->add_option("--steps", cfg.steps, "Number of steps");
  cdg->add_option("--out", cfg.outputPath, "Output file (default stdout)");

  auto* product = app.add_subcommand(
      "walk-product",
      "Coordinate-refresh walk on G^n in continuous time.\n"
      "CSV columns: time,tv,entropy,chi2,hellinger,separation");
  product->add_option("--n", cfg.coordinates, "Number of coordinates");
  product->add_option("--g", cfg.groupSize, "Group size (default 2^n)");
  product->add_option("--t-max", cfg.timeMax,
                      "Last time point (default 2 n^2 ln 2)");
  product->add_option("--points", cfg.timePoints, "Number of time points");
  product->add_option("--out", cfg.outputPath, "Output file (default stdout)");

  auto* demo = app.add_subcommand(
      "demo", "Worked examples.\nCSV columns: example,quantity,value");
  demo->add_option("--out", cfg.outputPath, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  cfg.command = app.get_subcommands().front()->get_name();
  try {
    if (compute->parsed()) {
      cfg.inputs = {muPath, nuPath};
      return runCompute(cfg);
    }
    if (certify->parsed()) return runCertify(cfg);
    if (cdg->parsed()) return runWalkCdg(cfg);
    if (product->parsed()) return runWalkProduct(cfg);
    if (demo->parsed()) return runDemo(cfg);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitOk;
}
