#pragma once

// JSON views of the library's result types (nlohmann/json).

#include <nlohmann/json.hpp>

#include "crackseg/evaluation.hpp"
#include "crackseg/histogram.hpp"
#include "crackseg/otsu.hpp"
#include "crackseg/recursive_otsu.hpp"

namespace crackseg {

inline void to_json(nlohmann::json& j, const Histogram& h) { j = h.counts; }

inline void to_json(nlohmann::json& j, const OtsuResult& r) {
  j = {{"threshold", r.threshold}, {"sigma2", r.sigma2}, {"omega0", r.omega0},
       {"omega1", r.omega1},       {"mu0", r.mu0},       {"mu1", r.mu1}};
}

inline void to_json(nlohmann::json& j, const RoiState& s) {
  j = {{"k", s.k},
       {"t_prev", s.t_prev},
       {"t_k", s.t_k},
       {"mu_roi", s.mu_roi},
       {"mu_b", s.mu_b},
       {"contrast", s.contrast},
       {"roi_pixels", s.roi_pixels},
       {"bg_pixels", s.bg_pixels}};
}

inline void to_json(nlohmann::json& j, const ThresholdTrace& t) {
  j = {{"states", t.states}, {"t_u", t.t_u}, {"stop_reason", to_string(t.stop_reason)}};
}

inline void to_json(nlohmann::json& j, const QClass& c) {
  j = {{"label", static_cast<int>(c.label)},
       {"a_n", c.a_n},
       {"e2_n", c.e2_n},
       {"same_area_count", c.same_area_count}};
}

inline void to_json(nlohmann::json& j, const QReport& r) {
  j = {{"q", r.q}, {"n_c", r.n_c}, {"image_pixels", r.image_pixels}, {"per_class", r.per_class}};
}

inline void to_json(nlohmann::json& j, const GtMetrics& g) {
  const auto opt = [](const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  j = {{"tp", g.tp},           {"fp", g.fp},
       {"fn", g.fn},           {"tn", g.tn},
       {"precision", opt(g.precision)}, {"recall", opt(g.recall)},
       {"f1", opt(g.f1)},      {"iou", opt(g.iou)},
       {"notes", g.notes}};
}

// Trace file layout: the recursion record plus the histogram it ran on.
inline nlohmann::json trace_document(const Histogram& h, const ThresholdTrace& t) {
  nlohmann::json j = t;
  j["histogram"] = h;
  return j;
}

}  // namespace crackseg
