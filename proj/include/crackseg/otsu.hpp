#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

#include "crackseg/error.hpp"
#include "crackseg/histogram.hpp"

namespace crackseg {

// How the class "expectations" entering the between-class variance are formed.
enum class ExpectationMode {
  // Within-class mean intensity. Classical Otsu.
  class_mean,
  // Unnormalized Σ x·y(x) over the class, as the printed formula reads.
  cumulative,
};

// Relative slack under which two criterion values count as tied.
// Ties resolve to the smallest threshold.
inline constexpr double kOtsuTieTolerance = 1e-12;

// Threshold T splits a range [lo, hi) into foreground [lo, T) and background [T, hi).
struct OtsuResult {
  int threshold = 0;
  double sigma2 = 0.0;
  double omega0 = 0.0;
  double omega1 = 0.0;
  double mu0 = 0.0;
  double mu1 = 0.0;
};

namespace detail {

inline double between_class_variance(std::uint64_t n0, std::uint64_t s0, std::uint64_t n1,
                                     std::uint64_t s1, ExpectationMode mode) {
  const double n = static_cast<double>(n0 + n1);
  const double w0 = static_cast<double>(n0) / n;
  const double w1 = static_cast<double>(n1) / n;
  double e0 = static_cast<double>(s0);
  double e1 = static_cast<double>(s1);
  if (mode == ExpectationMode::class_mean) {
    e0 /= static_cast<double>(n0);
    e1 /= static_cast<double>(n1);
  }
  const double d = e0 - e1;
  return w0 * w1 * d * d;
}

inline OtsuResult make_result(int t, std::uint64_t n0, std::uint64_t s0, std::uint64_t n1,
                              std::uint64_t s1, double sigma2) {
  const double n = static_cast<double>(n0 + n1);
  return {t,
          sigma2,
          static_cast<double>(n0) / n,
          static_cast<double>(n1) / n,
          static_cast<double>(s0) / static_cast<double>(n0),
          static_cast<double>(s1) / static_cast<double>(n1)};
}

[[noreturn]] inline void throw_degenerate(BinRange r) {
  throw DegenerateRange("fewer than two populated bins in [" + std::to_string(r.lo) + "," +
                        std::to_string(r.hi) + ")");
}

}  // namespace detail

// Between-class-variance maximizing threshold over r, or nullopt when r holds
// fewer than two populated bins. One pass of prefix sums, then argmax.
inline std::optional<OtsuResult> try_otsu_threshold(
    const Histogram& h, BinRange r, ExpectationMode mode = ExpectationMode::class_mean) {
  r.check();
  std::uint64_t n_total = 0, s_total = 0;
  for (int x = r.lo; x < r.hi; ++x) {
    n_total += h.counts[x];
    s_total += static_cast<std::uint64_t>(x) * h.counts[x];
  }

  std::array<double, kBins + 1> crit{};
  std::array<bool, kBins + 1> feasible{};
  double best = -1.0;
  std::uint64_t n0 = 0, s0 = 0;
  for (int t = r.lo + 1; t < r.hi; ++t) {
    n0 += h.counts[t - 1];
    s0 += static_cast<std::uint64_t>(t - 1) * h.counts[t - 1];
    const std::uint64_t n1 = n_total - n0;
    if (n0 == 0 || n1 == 0) continue;
    feasible[t] = true;
    crit[t] = detail::between_class_variance(n0, s0, n1, s_total - s0, mode);
    if (crit[t] > best) best = crit[t];
  }
  if (best < 0.0) return std::nullopt;

  const double floor = best - kOtsuTieTolerance * best;
  n0 = 0;
  s0 = 0;
  for (int t = r.lo + 1; t < r.hi; ++t) {
    n0 += h.counts[t - 1];
    s0 += static_cast<std::uint64_t>(t - 1) * h.counts[t - 1];
    if (feasible[t] && crit[t] >= floor)
      return detail::make_result(t, n0, s0, n_total - n0, s_total - s0, crit[t]);
  }
  return std::nullopt;  // unreachable
}

// Throwing form. Raises DegenerateRange when r cannot be split.
inline OtsuResult otsu_threshold(const Histogram& h, BinRange r = BinRange::full(),
                                 ExpectationMode mode = ExpectationMode::class_mean) {
  if (auto res = try_otsu_threshold(h, r, mode)) return *res;
  detail::throw_degenerate(r);
}

// Reference oracle: evaluates the criterion from scratch for every candidate T
// using the textbook weight/expectation form. O(range²).
inline OtsuResult otsu_bruteforce(const Histogram& h, BinRange r = BinRange::full(),
                                  ExpectationMode mode = ExpectationMode::class_mean) {
  r.check();
  std::array<std::optional<double>, kBins + 1> crit{};
  for (int t = r.lo + 1; t < r.hi; ++t) {
    double n0 = 0, n1 = 0, m0 = 0, m1 = 0;
    for (int x = r.lo; x < t; ++x) {
      n0 += static_cast<double>(h.counts[x]);
      m0 += x * static_cast<double>(h.counts[x]);
    }
    for (int x = t; x < r.hi; ++x) {
      n1 += static_cast<double>(h.counts[x]);
      m1 += x * static_cast<double>(h.counts[x]);
    }
    if (n0 == 0 || n1 == 0) continue;
    const double omega0 = n0 / (n0 + n1);
    const double omega1 = n1 / (n0 + n1);
    if (mode == ExpectationMode::class_mean) {
      m0 /= n0;
      m1 /= n1;
    }
    crit[t] = omega0 * omega1 * (m0 - m1) * (m0 - m1);
  }

  std::optional<double> best;
  for (const auto& c : crit)
    if (c && (!best || *c > *best)) best = c;
  if (!best) detail::throw_degenerate(r);

  for (int t = r.lo + 1; t < r.hi; ++t) {
    if (!crit[t] || *crit[t] < *best - kOtsuTieTolerance * *best) continue;
    OtsuResult res;
    res.threshold = t;
    res.sigma2 = *crit[t];
    double n0 = 0, n1 = 0, s0 = 0, s1 = 0;
    for (int x = r.lo; x < r.hi; ++x) {
      const double c = static_cast<double>(h.counts[x]);
      (x < t ? n0 : n1) += c;
      (x < t ? s0 : s1) += x * c;
    }
    res.omega0 = n0 / (n0 + n1);
    res.omega1 = n1 / (n0 + n1);
    res.mu0 = s0 / n0;
    res.mu1 = s1 / n1;
    return res;
  }
  detail::throw_degenerate(r);
}

}  // namespace crackseg
