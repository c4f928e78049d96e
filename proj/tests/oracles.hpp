#pragma once

// Test-only reference implementations. Each one takes a deliberately naive
// route so it stays independent of the library code it checks.

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "crackseg/crackseg.hpp"

namespace oracle {

using crackseg::GrayImage;
using crackseg::Histogram;
using crackseg::Label;
using crackseg::SegMask;

// Eq. 10 straight from pixels: class areas, squared label distances and
// equal-area counts all recomputed with maps and doubles.
inline double q_scalar(const std::vector<int>& intensities, const std::vector<int>& labels,
                       std::size_t width, std::size_t height, bool log10_base = true) {
  std::map<int, double> area, err;
  for (std::size_t i = 0; i < intensities.size(); ++i) {
    area[labels[i]] += 1.0;
    const double d = static_cast<double>(intensities[i]) - static_cast<double>(labels[i]);
    err[labels[i]] += d * d;
  }
  double total = 0.0;
  for (const auto& [label, a] : area) {
    int same = 0;
    for (const auto& [other, b] : area) same += (a == b);
    const double lg = log10_base ? std::log10(a) : std::log(a);
    total += err[label] / (1.0 + lg) + (same / a) * (same / a);
  }
  return std::sqrt(static_cast<double>(area.size())) * total /
         (10000.0 * static_cast<double>(width * height));
}

inline double q_scalar(const GrayImage& img, const SegMask& mask, bool log10_base = true) {
  std::vector<int> v, l;
  for (std::size_t i = 0; i < img.size(); ++i) {
    v.push_back(img.pixels()[i]);
    l.push_back(static_cast<int>(mask.labels[i]));
  }
  return q_scalar(v, l, img.width(), img.height(), log10_base);
}

// Sauvola with every window summed pixel by pixel.
inline SegMask sauvola_naive(const GrayImage& img, const crackseg::SauvolaConfig& cfg) {
  const long half = cfg.window / 2;
  const long w = static_cast<long>(img.width()), h = static_cast<long>(img.height());
  SegMask m{img.width(), img.height(), {}, crackseg::Method::sauvola, std::nullopt, false};
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      std::uint64_t sum = 0, sq = 0, n = 0;
      for (long yy = y - half; yy <= y + half; ++yy) {
        if (yy < 0 || yy >= h) continue;
        for (long xx = x - half; xx <= x + half; ++xx) {
          if (xx < 0 || xx >= w) continue;
          const std::uint64_t v = img(static_cast<std::size_t>(xx), static_cast<std::size_t>(yy));
          sum += v;
          sq += v * v;
          ++n;
        }
      }
      const double t = crackseg::sauvola_local_threshold(sum, sq, n, cfg);
      m.labels.push_back(img(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) < t
                             ? Label::crack
                             : Label::background);
    }
  }
  return m;
}

// ITTT run on pixel sets instead of histogram bands: every pixel carries its
// own state (undetermined / foreground / background).
struct IttOracleResult {
  SegMask mask;
  std::vector<int> thresholds;
};

inline IttOracleResult ittt_pixelwise(const GrayImage& img, double epsilon, int max_iters = 64) {
  enum State { tbd, fg, bg };
  const auto px = img.pixels();
  std::vector<State> state(px.size(), tbd);
  std::vector<int> ts;
  int prev = 0;
  int last_t = -1;
  std::size_t tbd_count = px.size();
  for (int it = 0; it < max_iters; ++it) {
    Histogram h;
    for (std::size_t i = 0; i < px.size(); ++i)
      if (state[i] == tbd) h.add(px[i]);
    if (h.populated_bins(crackseg::BinRange::full()) < 2) break;
    const int t = crackseg::otsu_bruteforce(h).threshold;
    ts.push_back(t);
    last_t = t;
    if (std::abs(t - prev) < epsilon) break;
    prev = t;
    double s0 = 0, n0 = 0, s1 = 0, n1 = 0;
    for (std::size_t i = 0; i < px.size(); ++i) {
      if (state[i] != tbd) continue;
      (px[i] < t ? s0 : s1) += px[i];
      (px[i] < t ? n0 : n1) += 1;
    }
    const double mu0 = s0 / n0, mu1 = s1 / n1;
    std::size_t remaining = 0;
    for (std::size_t i = 0; i < px.size(); ++i) {
      if (state[i] != tbd) continue;
      if (px[i] < mu0) state[i] = fg;
      else if (px[i] > mu1) state[i] = bg;
      else ++remaining;
    }
    if (remaining == tbd_count) break;
    tbd_count = remaining;
  }
  SegMask m{img.width(), img.height(), {}, crackseg::Method::ittt, std::nullopt, false};
  if (last_t >= 0) m.final_threshold = last_t;
  for (std::size_t i = 0; i < px.size(); ++i) {
    bool crack = state[i] == fg;
    if (state[i] == tbd) crack = last_t >= 0 && px[i] < last_t;
    m.labels.push_back(crack ? Label::crack : Label::background);
  }
  return {m, ts};
}

// ---------------------------------------------------------------------------
// Generators

inline Histogram histogram_of(std::initializer_list<std::pair<int, std::uint64_t>> bins) {
  Histogram h;
  for (auto [x, n] : bins) h.add(x, n);
  return h;
}

// Sum of triangular bumps: count(x) += height·max(0, width − |x − centre|).
inline Histogram triangular_modes(std::initializer_list<std::array<int, 3>> modes) {
  Histogram h;
  for (const auto& m : modes)
    for (int x = 0; x < crackseg::kBins; ++x) {
      const int v = m[1] - std::abs(x - m[0]);
      if (v > 0) h.add(x, static_cast<std::uint64_t>(v * m[2]));
    }
  return h;
}

// Random histograms of several flavours: dense, sparse, constant-plus-one,
// heavy-tailed and narrow-band. Always at least two populated bins.
inline Histogram random_histogram(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> kind(0, 4);
  std::uniform_int_distribution<int> bin(0, 255);
  Histogram h;
  switch (kind(rng)) {
    case 0: {
      std::uniform_int_distribution<int> c(0, 1000);
      for (int x = 0; x < 256; ++x) h.add(x, static_cast<std::uint64_t>(c(rng)));
      break;
    }
    case 1: {
      std::uniform_int_distribution<int> n(2, 8), c(1, 5000);
      const int k = n(rng);
      for (int i = 0; i < k; ++i) h.add(bin(rng), static_cast<std::uint64_t>(c(rng)));
      break;
    }
    case 2: {
      std::uniform_int_distribution<int> c(1000, 100000);
      h.add(bin(rng), static_cast<std::uint64_t>(c(rng)));
      h.add(bin(rng), 1);
      break;
    }
    case 3: {
      std::exponential_distribution<double> e(1.0 / 20.0);
      std::uniform_int_distribution<int> n(100, 20000);
      const int k = n(rng);
      for (int i = 0; i < k; ++i) h.add(std::min(255, static_cast<int>(e(rng))));
      break;
    }
    default: {
      std::uniform_int_distribution<int> lo(0, 240), width(2, 15), c(0, 300);
      const int l = lo(rng), wd = width(rng);
      for (int x = l; x < l + wd; ++x) h.add(x, static_cast<std::uint64_t>(c(rng)));
      break;
    }
  }
  if (h.populated_bins(crackseg::BinRange::full()) < 2) {
    h.add(0, 1);
    h.add(255, 1);
  }
  return h;
}

inline GrayImage random_image(std::mt19937_64& rng, std::size_t w, std::size_t h) {
  std::uniform_int_distribution<int> d(0, 255);
  std::vector<std::uint8_t> v(w * h);
  for (auto& p : v) p = static_cast<std::uint8_t>(d(rng));
  return GrayImage(w, h, std::move(v));
}

// Image realising histogram h exactly, pixels laid out in ascending order.
inline GrayImage image_from_histogram(const Histogram& h, std::size_t width) {
  std::vector<std::uint8_t> v;
  for (int x = 0; x < 256; ++x)
    v.insert(v.end(), h.counts[x], static_cast<std::uint8_t>(x));
  while (v.size() % width != 0) v.push_back(v.back());
  const std::size_t height = v.size() / width;
  return GrayImage(width, height, std::move(v));
}

}  // namespace oracle
