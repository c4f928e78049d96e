#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "crackseg/error.hpp"
#include "crackseg/gray_image.hpp"

namespace crackseg {

enum class LogBase { ten, natural };

// What the per-class colour error measures the original intensities against.
enum class ColourError {
  // The literal label value (1 or 2) standing in for the segmented intensity.
  label_value,
  // The class's own mean intensity (Borsotti's original definition).
  class_mean,
};

struct QConfig {
  LogBase log_base = LogBase::ten;
  ColourError colour_error = ColourError::label_value;
};

struct QClass {
  Label label = Label::background;
  std::uint64_t a_n = 0;
  double e2_n = 0.0;
  std::uint64_t same_area_count = 0;
};

struct QReport {
  double q = 0.0;
  int n_c = 0;
  std::uint64_t image_pixels = 0;
  std::vector<QClass> per_class;  // ascending label order
};

// Q from per-class aggregates only:
//   Q = sqrt(N_c) / (10000·jk) · Σ_n [ e_n² / (1 + log A_n) + (N(A_n)/A_n)² ]
inline double q_from_classes(const std::vector<QClass>& classes, std::uint64_t image_pixels,
                             LogBase base = LogBase::ten) {
  double acc = 0.0;
  for (const QClass& c : classes) {
    const double a = static_cast<double>(c.a_n);
    const double lg = base == LogBase::ten ? std::log10(a) : std::log(a);
    const double r = static_cast<double>(c.same_area_count) / a;
    acc += c.e2_n / (1.0 + lg) + r * r;
  }
  return std::sqrt(static_cast<double>(classes.size())) * acc /
         (10000.0 * static_cast<double>(image_pixels));
}

// Reference-free segmentation quality. Lower is better.
inline QReport q_evaluate(const GrayImage& original, const SegMask& mask, const QConfig& cfg = {}) {
  if (mask.width != original.width() || mask.height != original.height() ||
      mask.labels.size() != original.size())
    throw DimensionError("q_evaluate: mask and image dimensions differ");

  struct Acc {
    std::uint64_t n = 0, sum = 0, sum_sq = 0, label_err = 0;
  };
  Acc acc[2];
  const auto px = original.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) {
    const auto l = static_cast<std::uint64_t>(mask.labels[i]);
    if (l != 1 && l != 2) throw ConfigError("q_evaluate: label outside {1,2}");
    Acc& a = acc[l - 1];
    const std::int64_t v = px[i];
    const std::int64_t d = v - static_cast<std::int64_t>(l);
    ++a.n;
    a.sum += static_cast<std::uint64_t>(v);
    a.sum_sq += static_cast<std::uint64_t>(v * v);
    a.label_err += static_cast<std::uint64_t>(d * d);
  }

  QReport rep;
  rep.image_pixels = original.size();
  for (int i = 0; i < 2; ++i) {
    const Acc& a = acc[i];
    if (a.n == 0) continue;
    QClass c;
    c.label = static_cast<Label>(i + 1);
    c.a_n = a.n;
    if (cfg.colour_error == ColourError::label_value) {
      c.e2_n = static_cast<double>(a.label_err);
    } else {
      // Σ(v − mean)² = (n·Σv² − (Σv)²) / n, numerator exact in 128 bits.
      const unsigned __int128 num = static_cast<unsigned __int128>(a.n) * a.sum_sq -
                                    static_cast<unsigned __int128>(a.sum) * a.sum;
      c.e2_n = static_cast<double>(num) / static_cast<double>(a.n);
    }
    rep.per_class.push_back(c);
  }
  for (QClass& c : rep.per_class)
    for (const QClass& o : rep.per_class) c.same_area_count += o.a_n == c.a_n;
  rep.n_c = static_cast<int>(rep.per_class.size());
  rep.q = q_from_classes(rep.per_class, rep.image_pixels, cfg.log_base);
  return rep;
}

// Ground-truth comparison with crack (label 2) as the positive class.
struct GtMetrics {
  std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
  std::optional<double> precision, recall, f1, iou;
  // Explains each absent value; empty when all are present.
  std::vector<std::string> notes;
};

inline GtMetrics gt_metrics(const SegMask& mask, const SegMask& truth) {
  if (mask.width != truth.width || mask.height != truth.height ||
      mask.labels.size() != truth.labels.size())
    throw DimensionError("gt_metrics: mask and truth dimensions differ");
  GtMetrics g;
  for (std::size_t i = 0; i < mask.labels.size(); ++i) {
    const bool p = mask.labels[i] == Label::crack;
    const bool t = truth.labels[i] == Label::crack;
    g.tp += p && t;
    g.fp += p && !t;
    g.fn += !p && t;
    g.tn += !p && !t;
  }
  const auto ratio = [](std::uint64_t num, std::uint64_t den) -> std::optional<double> {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
  };
  g.precision = ratio(g.tp, g.tp + g.fp);
  g.recall = ratio(g.tp, g.tp + g.fn);
  g.f1 = ratio(2 * g.tp, 2 * g.tp + g.fp + g.fn);
  g.iou = ratio(g.tp, g.tp + g.fp + g.fn);
  if (!g.precision) g.notes.emplace_back("precision undefined: no predicted crack pixels");
  if (!g.recall) g.notes.emplace_back("recall undefined: no crack pixels in truth");
  if (!g.f1) g.notes.emplace_back("f1/iou undefined: no crack pixels in mask or truth");
  return g;
}

}  // namespace crackseg
