#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "crackseg/error.hpp"
#include "crackseg/gray_image.hpp"

namespace crackseg {

inline constexpr int kBins = 256;

// Half-open intensity range [lo, hi) with 0 <= lo < hi <= 256.
struct BinRange {
  int lo = 0;
  int hi = kBins;

  static BinRange full() { return {0, kBins}; }

  bool valid() const { return 0 <= lo && lo < hi && hi <= kBins; }
  void check() const {
    if (!valid())
      throw ConfigError("invalid bin range [" + std::to_string(lo) + "," + std::to_string(hi) + ")");
  }
};

// 256-bin intensity histogram y(x).
struct Histogram {
  std::array<std::uint64_t, kBins> counts{};
  std::uint64_t total = 0;

  static Histogram from_counts(const std::array<std::uint64_t, kBins>& c) {
    Histogram h;
    h.counts = c;
    for (auto v : c) h.total += v;
    return h;
  }

  void add(int intensity, std::uint64_t n = 1) {
    counts[static_cast<std::size_t>(intensity)] += n;
    total += n;
  }

  // Number of bins in r with a nonzero count.
  int populated_bins(BinRange r) const {
    int n = 0;
    for (int x = r.lo; x < r.hi; ++x) n += counts[x] != 0;
    return n;
  }
};

inline Histogram build_histogram(const GrayImage& img) {
  Histogram h;
  for (std::uint8_t v : img.pixels()) ++h.counts[v];
  h.total = img.size();
  return h;
}

struct RangeStats {
  std::uint64_t pixel_count = 0;
  // Σ x·y(x), kept exact so callers can recombine partitions.
  std::uint64_t intensity_sum = 0;
  // Absent when pixel_count == 0.
  std::optional<double> mean;
};

inline RangeStats range_stats(const Histogram& h, BinRange r) {
  r.check();
  RangeStats s;
  for (int x = r.lo; x < r.hi; ++x) {
    s.pixel_count += h.counts[x];
    s.intensity_sum += static_cast<std::uint64_t>(x) * h.counts[x];
  }
  if (s.pixel_count > 0)
    s.mean = static_cast<double>(s.intensity_sum) / static_cast<double>(s.pixel_count);
  return s;
}

}  // namespace crackseg
