#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "crackseg/error.hpp"
#include "crackseg/gray_image.hpp"
#include "crackseg/histogram.hpp"
#include "crackseg/otsu.hpp"

namespace crackseg {

// ---------------------------------------------------------------------------
// Global Otsu
// ---------------------------------------------------------------------------

// Single global Otsu split. A constant image yields an all-background mask
// flagged degenerate.
inline SegMask otsu_segment(const GrayImage& img,
                            ExpectationMode mode = ExpectationMode::class_mean) {
  const auto split = try_otsu_threshold(build_histogram(img), BinRange::full(), mode);
  if (!split) {
    SegMask m = threshold_mask(img, 0, Method::otsu);
    m.final_threshold.reset();
    m.degenerate = true;
    return m;
  }
  return threshold_mask(img, split->threshold, Method::otsu);
}

// ---------------------------------------------------------------------------
// Iterative tri-class thresholding
// ---------------------------------------------------------------------------

struct IttConfig {
  double epsilon = 1.0;
  int max_iters = 64;
  ExpectationMode expectation = ExpectationMode::class_mean;

  void check() const {
    if (!(epsilon >= 0.0)) throw ConfigError("ITTT epsilon must be >= 0");
    if (max_iters < 1) throw ConfigError("ITTT max_iters must be >= 1");
  }
};

enum class IttStop { converged, band_fixed, degenerate_band, max_iters, degenerate_image };

inline std::string_view to_string(IttStop s) {
  switch (s) {
    case IttStop::converged: return "converged";
    case IttStop::band_fixed: return "band_fixed";
    case IttStop::degenerate_band: return "degenerate_band";
    case IttStop::max_iters: return "max_iters";
    case IttStop::degenerate_image: return "degenerate_image";
  }
  return "unknown";
}

struct IttResult {
  SegMask mask;
  std::vector<int> thresholds;
  std::vector<BinRange> bands;
  IttStop stop = IttStop::converged;
};

// Each pass runs Otsu on the undetermined band and commits everything below the
// lower class mean to foreground and everything above the upper class mean to
// background. The band [ceil(mu0), floor(mu1)] is re-thresholded until the
// threshold moves by less than epsilon. The threshold before the first pass is
// taken as 0, so an epsilon above every reachable threshold disables refinement.
//
// The final pass splits the remaining band at its threshold T. Every committed
// pixel lies outside that band on the same side of T, so the whole labeling is
// the global rule "intensity < T is foreground"; the mask is built that way.
inline IttResult ittt_segment(const GrayImage& img, const IttConfig& cfg = {}) {
  cfg.check();
  const Histogram h = build_histogram(img);
  IttResult res;
  BinRange band = BinRange::full();
  int prev = 0;
  res.stop = IttStop::max_iters;
  for (int it = 1; it <= cfg.max_iters; ++it) {
    const auto split = try_otsu_threshold(h, band, cfg.expectation);
    if (!split) {
      res.stop = it == 1 ? IttStop::degenerate_image : IttStop::degenerate_band;
      break;
    }
    res.bands.push_back(band);
    res.thresholds.push_back(split->threshold);
    if (std::abs(split->threshold - prev) < cfg.epsilon) {
      res.stop = IttStop::converged;
      break;
    }
    prev = split->threshold;
    const BinRange next{static_cast<int>(std::ceil(split->mu0)),
                        static_cast<int>(std::floor(split->mu1)) + 1};
    if (next.lo == band.lo && next.hi == band.hi) {
      res.stop = IttStop::band_fixed;
      break;
    }
    band = next;
  }

  if (res.thresholds.empty()) {
    res.mask = threshold_mask(img, 0, Method::ittt);
    res.mask.final_threshold.reset();
    res.mask.degenerate = true;
  } else {
    res.mask = threshold_mask(img, res.thresholds.back(), Method::ittt);
  }
  return res;
}

// ---------------------------------------------------------------------------
// Sauvola local thresholding
// ---------------------------------------------------------------------------

struct SauvolaConfig {
  int window = 31;
  double k = 0.5;
  double r_dyn = 128.0;

  void check() const {
    if (window < 3 || window % 2 == 0) throw ConfigError("Sauvola window must be odd and >= 3");
    if (!(k > 0.0 && k <= 1.0)) throw ConfigError("Sauvola k must lie in (0,1]");
    if (!(r_dyn > 0.0)) throw ConfigError("Sauvola dynamic range must be > 0");
  }
};

// t = m·(1 + k·(s/R − 1)) from exact window sums. The variance numerator
// n·Σv² − (Σv)² is formed in 128-bit integers, so it is exact and nonnegative.
inline double sauvola_local_threshold(std::uint64_t sum, std::uint64_t sum_sq, std::uint64_t n,
                                      const SauvolaConfig& cfg) {
  const double dn = static_cast<double>(n);
  const double mean = static_cast<double>(sum) / dn;
  const unsigned __int128 a = static_cast<unsigned __int128>(n) * sum_sq;
  const unsigned __int128 b = static_cast<unsigned __int128>(sum) * sum;
  const double var = static_cast<double>(a - b) / (dn * dn);
  const double sd = std::sqrt(var);
  return mean * (1.0 + cfg.k * (sd / cfg.r_dyn - 1.0));
}

// Summed-area tables with a zero guard row/column: entry (x, y) holds the sum
// over [0, x) × [0, y).
class IntegralImage {
 public:
  explicit IntegralImage(const GrayImage& img)
      : stride_(img.width() + 1),
        sum_(stride_ * (img.height() + 1), 0),
        sq_(stride_ * (img.height() + 1), 0) {
    for (std::size_t y = 0; y < img.height(); ++y) {
      std::uint64_t row = 0, row_sq = 0;
      for (std::size_t x = 0; x < img.width(); ++x) {
        const std::uint64_t v = img(x, y);
        row += v;
        row_sq += v * v;
        sum_[(y + 1) * stride_ + x + 1] = sum_[y * stride_ + x + 1] + row;
        sq_[(y + 1) * stride_ + x + 1] = sq_[y * stride_ + x + 1] + row_sq;
      }
    }
  }

  // Sums over the half-open rectangle [x0, x1) × [y0, y1).
  std::uint64_t sum(std::size_t x0, std::size_t y0, std::size_t x1, std::size_t y1) const {
    return box(sum_, x0, y0, x1, y1);
  }
  std::uint64_t sum_sq(std::size_t x0, std::size_t y0, std::size_t x1, std::size_t y1) const {
    return box(sq_, x0, y0, x1, y1);
  }

 private:
  std::uint64_t box(const std::vector<std::uint64_t>& t, std::size_t x0, std::size_t y0,
                    std::size_t x1, std::size_t y1) const {
    return t[y1 * stride_ + x1] - t[y0 * stride_ + x1] - t[y1 * stride_ + x0] +
           t[y0 * stride_ + x0];
  }

  std::size_t stride_;
  std::vector<std::uint64_t> sum_;
  std::vector<std::uint64_t> sq_;
};

// Windows are clamped at the image border (they shrink, no padding).
inline SegMask sauvola_segment(const GrayImage& img, const SauvolaConfig& cfg = {}) {
  cfg.check();
  const IntegralImage ii(img);
  const std::size_t half = static_cast<std::size_t>(cfg.window / 2);
  SegMask m{img.width(), img.height(), {}, Method::sauvola, std::nullopt, false};
  m.labels.resize(img.size());
  for (std::size_t y = 0; y < img.height(); ++y) {
    const std::size_t y0 = y > half ? y - half : 0;
    const std::size_t y1 = std::min(img.height(), y + half + 1);
    for (std::size_t x = 0; x < img.width(); ++x) {
      const std::size_t x0 = x > half ? x - half : 0;
      const std::size_t x1 = std::min(img.width(), x + half + 1);
      const std::uint64_t n = (x1 - x0) * (y1 - y0);
      const double t =
          sauvola_local_threshold(ii.sum(x0, y0, x1, y1), ii.sum_sq(x0, y0, x1, y1), n, cfg);
      m.labels[y * img.width() + x] = img(x, y) < t ? Label::crack : Label::background;
    }
  }
  return m;
}

}  // namespace crackseg
