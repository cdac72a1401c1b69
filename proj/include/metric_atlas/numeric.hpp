#pragma once

// Small numeric helpers shared by every module: extended reals,
// compensated summation and round-trip number formatting.

#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace metric_atlas {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Probability-vector mass tolerance (absolute).
inline constexpr double kMassTolerance = 1e-12;

/// Neumaier-compensated accumulator. Non-finite terms are tracked on the
/// side so a single +inf does not poison the compensation term with NaN.
class CompensatedSum {
 public:
  void add(double x) {
    if (!std::isfinite(x)) {
      nonFinite_ += x;
      hasNonFinite_ = true;
      return;
    }
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      compensation_ += (sum_ - t) + x;
    } else {
      compensation_ += (x - t) + sum_;
    }
    sum_ = t;
  }

  CompensatedSum& operator+=(double x) {
    add(x);
    return *this;
  }

  double value() const {
    if (hasNonFinite_) return nonFinite_;
    return sum_ + compensation_;
  }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
  double nonFinite_ = 0.0;
  bool hasNonFinite_ = false;
};

/// log|e^x - 1| without overflow for large x.
inline double logAbsExpm1(double x) {
  if (x == 0.0) return -kInfinity;
  if (x > 0.0) return x + std::log(-std::expm1(-x));
  return std::log(-std::expm1(x));
}

/// (1 + y) log(1 + y) - y, the non-negative entropy kernel; y >= -1.
inline double entropyKernel(double y) {
  if (y == -1.0) return 1.0;
  return (1.0 + y) * std::log1p(y) - y;
}

/// Shortest representation that parses back to the same double.
inline std::string formatReal(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), end);
}

/// Inverse of formatReal; accepts "inf", "-inf", "nan".
inline double parseReal(const std::string& s) {
  if (s == "inf" || s == "Infinity") return kInfinity;
  if (s == "-inf" || s == "-Infinity") return -kInfinity;
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::invalid_argument("not a real number: '" + s + "'");
  }
  return value;
}

}  // namespace metric_atlas
