#pragma once

// JSON input formats for spaces and distributions, and CSV/JSON emission
// of certification reports.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "metric_atlas/bounds.hpp"
#include "metric_atlas/numeric.hpp"
#include "metric_atlas/spaces.hpp"

namespace metric_atlas::io {

using Json = nlohmann::json;

/// Input problem naming the offending field.
class InputError : public std::runtime_error {
 public:
  InputError(const std::string& field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

inline Json readJsonFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path.string(), "cannot open file");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw InputError(path.string(), std::string("malformed JSON: ") + e.what());
  }
}

namespace detail {

inline std::vector<double> realArray(const Json& j, const std::string& field) {
  if (!j.is_array()) throw InputError(field, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number()) throw InputError(field, "expected numbers only");
    out.push_back(v.get<double>());
  }
  return out;
}

inline std::vector<std::vector<double>> realMatrix(const Json& j,
                                                   const std::string& field) {
  if (!j.is_array()) throw InputError(field, "expected an array of rows");
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(realArray(j[i], field + "[" + std::to_string(i) + "]"));
  }
  return out;
}

}  // namespace detail

/// {"kind":"matrix","d":[[...]]} | {"kind":"cycle","n":10}
/// | {"kind":"euclidean","points":[[...],...]}; optional "labels".
inline FiniteMetricSpace parseSpace(const Json& j) {
  if (!j.is_object()) throw InputError("space", "expected an object");
  if (!j.contains("kind") || !j["kind"].is_string()) {
    throw InputError("space.kind", "missing or not a string");
  }
  const std::string kind = j["kind"];
  try {
    if (kind == "matrix") {
      if (!j.contains("d")) throw InputError("space.d", "missing");
      std::vector<std::string> labels;
      if (j.contains("labels")) labels = j["labels"].get<std::vector<std::string>>();
      return FiniteMetricSpace(detail::realMatrix(j["d"], "space.d"),
                               std::move(labels));
    }
    if (kind == "cycle") {
      if (!j.contains("n") || !j["n"].is_number_integer() || j["n"].get<long long>() < 2) {
        throw InputError("space.n", "expected an integer >= 2");
      }
      return FiniteMetricSpace::cycle(j["n"].get<std::size_t>());
    }
    if (kind == "euclidean") {
      if (!j.contains("points")) throw InputError("space.points", "missing");
      return FiniteMetricSpace::euclidean(
          detail::realMatrix(j["points"], "space.points"));
    }
  } catch (const InputError&) {
    throw;
  } catch (const std::exception& e) {
    throw InputError("space", e.what());
  }
  throw InputError("space.kind", "unknown kind '" + kind + "'");
}

using AnyDistribution = std::variant<DiscreteDistribution, RealAtomicDistribution>;

/// {"space":<space object or path>,"p":[...]} or {"atoms":[{"x":..,"w":..}]}.
/// A string "space" is a path resolved against `baseDir`.
inline AnyDistribution parseDistribution(const Json& j,
                                         const std::filesystem::path& baseDir = {}) {
  if (!j.is_object()) throw InputError("distribution", "expected an object");
  if (j.contains("atoms")) {
    const Json& atoms = j["atoms"];
    if (!atoms.is_array() || atoms.empty()) {
      throw InputError("atoms", "expected a non-empty array");
    }
    std::vector<double> xs, ws;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      const std::string field = "atoms[" + std::to_string(i) + "]";
      const Json& a = atoms[i];
      if (!a.is_object() || !a.contains("x") || !a["x"].is_number() ||
          !a.contains("w") || !a["w"].is_number()) {
        throw InputError(field, "expected {\"x\": number, \"w\": number}");
      }
      xs.push_back(a["x"].get<double>());
      ws.push_back(a["w"].get<double>());
      if (ws.back() < 0.0) throw InputError(field + ".w", "negative weight");
    }
    try {
      return RealAtomicDistribution::fromPoints(xs, ws);
    } catch (const std::exception& e) {
      throw InputError("atoms", e.what());
    }
  }
  if (!j.contains("space")) {
    throw InputError("space", "distribution needs \"space\" or \"atoms\"");
  }
  if (!j.contains("p")) throw InputError("p", "missing");
  SpacePtr space;
  if (j["space"].is_string()) {
    const auto path = baseDir / j["space"].get<std::string>();
    space = makeSpace(parseSpace(readJsonFile(path)));
  } else {
    space = makeSpace(parseSpace(j["space"]));
  }
  auto p = detail::realArray(j["p"], "p");
  try {
    return DiscreteDistribution(space, std::move(p));
  } catch (const std::exception& e) {
    throw InputError("p", e.what());
  }
}

inline AnyDistribution loadDistribution(const std::filesystem::path& path) {
  return parseDistribution(readJsonFile(path), path.parent_path());
}

// ---------------------------------------------------------------------------
// Reports

inline constexpr const char* kReportCsvHeader =
    "instance_id,edge_id,lhs,rhs,h_rhs,slack,status";

/// One row per edge per instance.
inline std::string reportToCsv(std::span<const CertificationReport> reports) {
  std::ostringstream out;
  out << kReportCsvHeader << '\n';
  for (const auto& r : reports) {
    for (const auto& e : r.edges) {
      out << r.instance.id << ',' << e.edgeId << ',' << formatReal(e.lhs) << ','
          << formatReal(e.rhs) << ',' << formatReal(e.hRhs) << ','
          << formatReal(e.slack) << ',' << statusTag(e.status) << '\n';
    }
  }
  return out.str();
}

namespace detail {

// Non-finite reals travel as strings so they survive a JSON round trip.
inline Json realToJson(double x) {
  if (std::isfinite(x)) return x;
  return formatReal(x);
}

inline double realFromJson(const Json& j) {
  if (j.is_string()) return parseReal(j.get<std::string>());
  return j.get<double>();
}

}  // namespace detail

inline Json reportToJson(std::span<const CertificationReport> reports) {
  Json root;
  root["version"] = "1";
  root["instances"] = Json::array();
  for (const auto& r : reports) {
    Json inst;
    inst["id"] = r.instance.id;
    inst["kind"] = r.instance.kind;
    inst["size"] = r.instance.size;
    inst["sparsity"] = r.instance.sparsity;
    inst["seed"] = r.instance.seed;
    inst["edges"] = Json::array();
    for (const auto& e : r.edges) {
      inst["edges"].push_back({{"edge_id", e.edgeId},
                               {"lhs", detail::realToJson(e.lhs)},
                               {"rhs", detail::realToJson(e.rhs)},
                               {"h_rhs", detail::realToJson(e.hRhs)},
                               {"slack", detail::realToJson(e.slack)},
                               {"status", statusTag(e.status)},
                               {"reason", e.reason}});
    }
    root["instances"].push_back(std::move(inst));
  }
  return root;
}

inline std::vector<CertificationReport> reportFromJson(const Json& root) {
  if (!root.is_object() || root.value("version", "") != "1") {
    throw InputError("version", "expected report schema version \"1\"");
  }
  std::vector<CertificationReport> reports;
  for (const auto& inst : root.at("instances")) {
    CertificationReport r;
    r.instance.id = inst.at("id").get<std::string>();
    r.instance.kind = inst.at("kind").get<std::string>();
    r.instance.size = inst.at("size").get<std::size_t>();
    r.instance.sparsity = inst.at("sparsity").get<double>();
    r.instance.seed = inst.at("seed").get<std::uint64_t>();
    for (const auto& e : inst.at("edges")) {
      EdgeResult er;
      er.edgeId = e.at("edge_id").get<std::string>();
      er.lhs = detail::realFromJson(e.at("lhs"));
      er.rhs = detail::realFromJson(e.at("rhs"));
      er.hRhs = detail::realFromJson(e.at("h_rhs"));
      er.slack = detail::realFromJson(e.at("slack"));
      er.status = parseStatus(e.at("status").get<std::string>());
      er.reason = e.at("reason").get<std::string>();
      r.edges.push_back(std::move(er));
    }
    reports.push_back(std::move(r));
  }
  return reports;
}

enum class ReportFormat { Csv, Json };

inline std::string emitReport(std::span<const CertificationReport> reports,
                              ReportFormat format) {
  if (format == ReportFormat::Csv) return reportToCsv(reports);
  return reportToJson(reports).dump(2) + "\n";
}

}  // namespace metric_atlas::io
