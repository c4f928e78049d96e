#pragma once

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

// One pass of the dark-tail recursion. The previous ROI [0, t_prev) is split
// at t_k into the new ROI [0, t_k) and its background band [t_k, t_prev).
struct RoiState {
  int k = 0;
  int t_prev = kBins;
  int t_k = 0;
  double mu_roi = 0.0;
  double mu_b = 0.0;
  double contrast = 0.0;
  std::uint64_t roi_pixels = 0;
  std::uint64_t bg_pixels = 0;
};

struct RecursiveOtsuConfig {
  double c_s = 0.25;
  int max_iters = 64;
  ExpectationMode expectation = ExpectationMode::class_mean;

  void check() const {
    if (!(c_s > 0.0 && c_s < 1.0)) throw ConfigError("stop contrast must lie in (0,1)");
    if (max_iters < 1) throw ConfigError("max_iters must be >= 1");
  }
};

enum class StopReason { contrast_exceeded, degenerate_roi, max_iters };

inline std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::contrast_exceeded: return "contrast_exceeded";
    case StopReason::degenerate_roi: return "degenerate_roi";
    case StopReason::max_iters: return "max_iters";
  }
  return "unknown";
}

struct ThresholdTrace {
  std::vector<RoiState> states;
  int t_u = 0;
  StopReason stop_reason = StopReason::contrast_exceeded;
};

// Interclass contrast |a - b| / (a + b). Both means zero cannot occur for
// disjoint nonempty classes, so the denominator is positive.
inline double interclass_contrast(double mu_roi, double mu_b) {
  return std::abs(mu_roi - mu_b) / (mu_roi + mu_b);
}

// Repeatedly thresholds the dark tail [0, T^{k-1}) until the contrast between
// the new tail and the band it leaves behind exceeds c_s.
//
// When the tail can no longer be split the last valid threshold is kept. If the
// very first split fails (single populated bin) the lone bin becomes foreground.
inline ThresholdTrace recursive_otsu(const Histogram& h, const RecursiveOtsuConfig& cfg = {}) {
  cfg.check();
  ThresholdTrace trace;
  int t_prev = kBins;
  for (int k = 1; k <= cfg.max_iters; ++k) {
    const auto split = try_otsu_threshold(h, {0, t_prev}, cfg.expectation);
    if (!split) {
      trace.stop_reason = StopReason::degenerate_roi;
      if (k > 1) {
        trace.t_u = t_prev;
      } else {
        int lone = 0;
        for (int x = 0; x < kBins; ++x)
          if (h.counts[x] != 0) lone = x;
        trace.t_u = lone + 1;
      }
      return trace;
    }

    const int t_k = split->threshold;
    const RangeStats roi = range_stats(h, {0, t_k});
    const RangeStats band = range_stats(h, {t_k, t_prev});

    RoiState s;
    s.k = k;
    s.t_prev = t_prev;
    s.t_k = t_k;
    s.mu_roi = *roi.mean;
    s.mu_b = *band.mean;
    s.contrast = interclass_contrast(s.mu_roi, s.mu_b);
    s.roi_pixels = roi.pixel_count;
    s.bg_pixels = band.pixel_count;
    trace.states.push_back(s);
    trace.t_u = t_k;

    if (s.contrast > cfg.c_s) {
      trace.stop_reason = StopReason::contrast_exceeded;
      return trace;
    }
    t_prev = t_k;
  }
  trace.stop_reason = StopReason::max_iters;
  return trace;
}

// Crack (label 2) below t_u, background elsewhere. t_u in [0, 256].
inline SegMask apply_threshold(const GrayImage& img, int t_u,
                               Method method = Method::recursive_otsu) {
  if (t_u < 0 || t_u > kBins) throw ConfigError("threshold out of [0,256]: " + std::to_string(t_u));
  return threshold_mask(img, t_u, method);
}

// Number of k at which the contrast fell compared with the previous pass.
inline int contrast_monotonicity_violations(const ThresholdTrace& trace) {
  int n = 0;
  for (std::size_t i = 1; i < trace.states.size(); ++i)
    n += trace.states[i].contrast < trace.states[i - 1].contrast;
  return n;
}

struct RecursiveSegmentation {
  SegMask mask;
  ThresholdTrace trace;
};

inline RecursiveSegmentation recursive_otsu_segment(const GrayImage& img,
                                                    const RecursiveOtsuConfig& cfg = {}) {
  const Histogram h = build_histogram(img);
  ThresholdTrace trace = recursive_otsu(h, cfg);
  SegMask mask = apply_threshold(img, trace.t_u, Method::recursive_otsu);
  mask.degenerate = trace.states.empty();
  return {std::move(mask), std::move(trace)};
}

}  // namespace crackseg
