#pragma once

// Batch runner: every method over every image of a directory, with Q scores,
// optional ground-truth metrics and per-method aggregates.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "crackseg/baselines.hpp"
#include "crackseg/error.hpp"
#include "crackseg/evaluation.hpp"
#include "crackseg/imaging.hpp"
#include "crackseg/recursive_otsu.hpp"
#include "crackseg/serialize.hpp"
#include "crackseg/version.hpp"

namespace crackseg {

struct BenchConfig {
  std::filesystem::path input_dir;
  std::vector<Method> methods{std::begin(kAllMethods), std::end(kAllMethods)};
  RecursiveOtsuConfig recursive;
  IttConfig ittt;
  SauvolaConfig sauvola;
  ExpectationMode otsu_expectation = ExpectationMode::class_mean;
  QConfig q;
  // Empty: nothing written by run_bench itself.
  std::filesystem::path output_dir;
  bool emit_masks = false;
  bool emit_traces = false;
  int jobs = 1;
  // Defaults to <input_dir>/truth when that directory exists.
  std::optional<std::filesystem::path> truth_dir;
};

struct BenchRow {
  std::string image;
  Method method = Method::otsu;
  bool ok = true;
  std::string error;
  std::optional<double> q;
  int n_c = 0;
  std::optional<int> final_threshold;
  int iterations = 0;
  std::string stop_reason;
  double wall_time_ms = 0.0;
  std::optional<GtMetrics> gt;
  // recursive_otsu only: contrast sequence and how often it decreased.
  std::vector<double> contrasts;
  int contrast_violations = 0;
};

struct MethodAggregate {
  Method method = Method::otsu;
  std::size_t images = 0;
  std::size_t failures = 0;
  std::optional<double> mean_q;
  std::optional<double> mean_f1;
  int rank = 0;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  std::vector<MethodAggregate> aggregate;
  nlohmann::json environment;
};

// Shortest round-trip decimal form, identical across runs.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec))
    throw IoError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::string ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext == ".png" || ext == ".jpg" || ext == ".jpeg") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.filename() < b.filename(); });
  return out;
}

namespace detail {

inline std::vector<Method> sorted_methods(std::vector<Method> ms) {
  std::sort(ms.begin(), ms.end(),
            [](Method a, Method b) { return to_string(a) < to_string(b); });
  ms.erase(std::unique(ms.begin(), ms.end()), ms.end());
  return ms;
}

struct ImageJob {
  std::filesystem::path path;
  std::vector<BenchRow> rows;
};

inline BenchRow run_method(const GrayImage& img, const std::optional<SegMask>& truth,
                           Method method, const BenchConfig& cfg, const std::string& name,
                           const std::filesystem::path& stem) {
  BenchRow row;
  row.image = name;
  row.method = method;
  const auto t0 = std::chrono::steady_clock::now();
  SegMask mask;
  switch (method) {
    case Method::otsu: {
      mask = otsu_segment(img, cfg.otsu_expectation);
      row.iterations = mask.degenerate ? 0 : 1;
      row.stop_reason = mask.degenerate ? "degenerate" : "single_pass";
      break;
    }
    case Method::ittt: {
      IttResult r = ittt_segment(img, cfg.ittt);
      row.iterations = static_cast<int>(r.thresholds.size());
      row.stop_reason = to_string(r.stop);
      mask = std::move(r.mask);
      break;
    }
    case Method::sauvola: {
      mask = sauvola_segment(img, cfg.sauvola);
      row.stop_reason = "local";
      break;
    }
    case Method::recursive_otsu: {
      const Histogram h = build_histogram(img);
      const ThresholdTrace trace = recursive_otsu(h, cfg.recursive);
      mask = apply_threshold(img, trace.t_u, Method::recursive_otsu);
      mask.degenerate = trace.states.empty();
      row.iterations = static_cast<int>(trace.states.size());
      row.stop_reason = to_string(trace.stop_reason);
      for (const auto& s : trace.states) row.contrasts.push_back(s.contrast);
      row.contrast_violations = contrast_monotonicity_violations(trace);
      if (cfg.emit_traces && !cfg.output_dir.empty()) {
        const auto p = cfg.output_dir / "traces" / (stem.string() + ".recursive_otsu.json");
        const std::string text = trace_document(h, trace).dump(2) + "\n";
        write_file(p, std::vector<std::uint8_t>(text.begin(), text.end()));
      }
      break;
    }
  }
  row.final_threshold = mask.final_threshold;
  const QReport q = q_evaluate(img, mask, cfg.q);
  row.q = q.q;
  row.n_c = q.n_c;
  if (truth) row.gt = gt_metrics(mask, *truth);
  if (cfg.emit_masks && !cfg.output_dir.empty()) {
    const auto p =
        cfg.output_dir / "masks" / (stem.string() + "." + std::string(to_string(method)) + ".png");
    save_png(p, mask_to_image(mask, Palette::bw));
  }
  row.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

inline void process_image(ImageJob& job, const std::vector<Method>& methods,
                          const BenchConfig& cfg,
                          const std::optional<std::filesystem::path>& truth_dir) {
  const std::string name = job.path.filename().string();
  const auto stem = job.path.stem();
  std::optional<GrayImage> img;
  std::string load_error;
  try {
    img = load_gray(job.path);
  } catch (const Error& e) {
    load_error = e.what();
  }
  std::optional<SegMask> truth;
  if (img && truth_dir) {
    const auto tp = *truth_dir / name;
    std::error_code ec;
    if (std::filesystem::is_regular_file(tp, ec)) {
      try {
        truth = load_mask(tp);
        if (truth->width != img->width() || truth->height != img->height()) truth.reset();
      } catch (const Error&) {
        truth.reset();
      }
    }
  }
  for (Method m : methods) {
    if (!img) {
      BenchRow row;
      row.image = name;
      row.method = m;
      row.ok = false;
      row.error = load_error;
      row.stop_reason = "failed";
      job.rows.push_back(std::move(row));
      continue;
    }
    try {
      job.rows.push_back(run_method(*img, truth, m, cfg, name, stem));
    } catch (const Error& e) {
      BenchRow row;
      row.image = name;
      row.method = m;
      row.ok = false;
      row.error = e.what();
      row.stop_reason = "failed";
      job.rows.push_back(std::move(row));
    }
  }
}

inline nlohmann::json config_echo(const BenchConfig& cfg) {
  std::vector<std::string> methods;
  for (Method m : sorted_methods(cfg.methods)) methods.emplace_back(to_string(m));
  return {{"input_dir", cfg.input_dir.string()},
          {"methods", methods},
          {"c_s", cfg.recursive.c_s},
          {"recursive_max_iters", cfg.recursive.max_iters},
          {"ittt_epsilon", cfg.ittt.epsilon},
          {"ittt_max_iters", cfg.ittt.max_iters},
          {"sauvola_window", cfg.sauvola.window},
          {"sauvola_k", cfg.sauvola.k},
          {"sauvola_r", cfg.sauvola.r_dyn},
          {"otsu_expectation",
           cfg.otsu_expectation == ExpectationMode::class_mean ? "class_mean" : "cumulative"},
          {"q_log_base", cfg.q.log_base == LogBase::ten ? "10" : "e"},
          {"q_colour_error",
           cfg.q.colour_error == ColourError::label_value ? "label_value" : "class_mean"}};
}

}  // namespace detail

inline std::vector<MethodAggregate> aggregate_rows(const std::vector<BenchRow>& rows,
                                                   const std::vector<Method>& methods) {
  std::vector<MethodAggregate> agg;
  for (Method m : detail::sorted_methods(methods)) {
    MethodAggregate a;
    a.method = m;
    double q_sum = 0.0, f1_sum = 0.0;
    std::size_t q_n = 0, f1_n = 0;
    for (const BenchRow& r : rows) {
      if (r.method != m) continue;
      ++a.images;
      if (!r.ok) {
        ++a.failures;
        continue;
      }
      if (r.q) {
        q_sum += *r.q;
        ++q_n;
      }
      if (r.gt && r.gt->f1) {
        f1_sum += *r.gt->f1;
        ++f1_n;
      }
    }
    if (q_n) a.mean_q = q_sum / static_cast<double>(q_n);
    if (f1_n) a.mean_f1 = f1_sum / static_cast<double>(f1_n);
    agg.push_back(a);
  }
  // Rank 1 = smallest mean Q; methods without any score rank last.
  std::vector<MethodAggregate*> order;
  for (auto& a : agg) order.push_back(&a);
  std::stable_sort(order.begin(), order.end(), [](const auto* x, const auto* y) {
    if (x->mean_q.has_value() != y->mean_q.has_value()) return x->mean_q.has_value();
    return x->mean_q && *x->mean_q < *y->mean_q;
  });
  for (std::size_t i = 0; i < order.size(); ++i) order[i]->rank = static_cast<int>(i + 1);
  return agg;
}

inline BenchReport run_bench(const BenchConfig& cfg) {
  if (cfg.methods.empty()) throw ConfigError("no methods selected");
  cfg.recursive.check();
  cfg.ittt.check();
  cfg.sauvola.check();
  const auto images = list_images(cfg.input_dir);
  if (images.empty()) throw IoError("no PNG/JPEG images in " + cfg.input_dir.string());

  if (!cfg.output_dir.empty()) {
    const auto make = [](const std::filesystem::path& d) {
      std::error_code ec;
      std::filesystem::create_directories(d, ec);
      if (ec || !std::filesystem::is_directory(d))
        throw IoError("cannot create output directory " + d.string());
    };
    make(cfg.output_dir);
    if (cfg.emit_masks) make(cfg.output_dir / "masks");
    if (cfg.emit_traces) make(cfg.output_dir / "traces");
  }

  std::optional<std::filesystem::path> truth_dir = cfg.truth_dir;
  if (!truth_dir) {
    std::error_code ec;
    if (std::filesystem::is_directory(cfg.input_dir / "truth", ec)) truth_dir = cfg.input_dir / "truth";
  }

  const auto methods = detail::sorted_methods(cfg.methods);
  std::vector<detail::ImageJob> jobs;
  for (const auto& p : images) jobs.push_back({p, {}});

  // Workers claim whole images; results land in per-image slots, so assembly
  // order does not depend on scheduling.
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++)
      detail::process_image(jobs[i], methods, cfg, truth_dir);
  };
  const int n_workers =
      std::max(1, std::min(cfg.jobs, static_cast<int>(jobs.size())));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
  }

  BenchReport rep;
  for (auto& j : jobs)
    for (auto& r : j.rows) rep.rows.push_back(std::move(r));
  rep.aggregate = aggregate_rows(rep.rows, methods);
  rep.environment = {{"tool", "crackseg"},
                     {"version", CRACKSEG_VERSION},
                     {"images", images.size()},
                     {"truth_dir", truth_dir ? truth_dir->string() : ""},
                     {"config", detail::config_echo(cfg)}};
  return rep;
}

inline constexpr const char* kReportCsvHeader =
    "image,method,q,final_threshold,iterations,stop_reason,wall_time_ms";

// One line per row in report order. Without timing the last column is dropped,
// leaving only deterministic fields.
inline std::string report_csv(const BenchReport& rep, bool with_timing = true) {
  std::ostringstream out;
  if (with_timing) {
    out << kReportCsvHeader << '\n';
  } else {
    const std::string h = kReportCsvHeader;
    out << h.substr(0, h.rfind(',')) << '\n';
  }
  for (const BenchRow& r : rep.rows) {
    out << r.image << ',' << to_string(r.method) << ',' << (r.q ? format_double(*r.q) : "") << ','
        << (r.final_threshold ? std::to_string(*r.final_threshold) : "") << ',' << r.iterations
        << ',' << r.stop_reason;
    if (with_timing) out << ',' << format_double(r.wall_time_ms);
    out << '\n';
  }
  return out.str();
}

inline nlohmann::json report_json(const BenchReport& rep) {
  nlohmann::json rows = nlohmann::json::array();
  for (const BenchRow& r : rep.rows) {
    nlohmann::json j = {{"image", r.image},
                        {"method", to_string(r.method)},
                        {"ok", r.ok},
                        {"q", r.q ? nlohmann::json(*r.q) : nlohmann::json(nullptr)},
                        {"n_c", r.n_c},
                        {"final_threshold", r.final_threshold ? nlohmann::json(*r.final_threshold)
                                                              : nlohmann::json(nullptr)},
                        {"iterations", r.iterations},
                        {"stop_reason", r.stop_reason},
                        {"wall_time_ms", r.wall_time_ms}};
    if (!r.ok) j["error"] = r.error;
    if (r.gt) j["gt"] = *r.gt;
    if (r.method == Method::recursive_otsu && r.ok) {
      j["contrasts"] = r.contrasts;
      j["contrast_violations"] = r.contrast_violations;
    }
    rows.push_back(std::move(j));
  }
  nlohmann::json agg = nlohmann::json::array();
  for (const auto& a : rep.aggregate)
    agg.push_back({{"method", to_string(a.method)},
                   {"images", a.images},
                   {"failures", a.failures},
                   {"mean_q", a.mean_q ? nlohmann::json(*a.mean_q) : nlohmann::json(nullptr)},
                   {"mean_f1", a.mean_f1 ? nlohmann::json(*a.mean_f1) : nlohmann::json(nullptr)},
                   {"rank", a.rank}});
  return {{"per_image", rows}, {"aggregate", agg}, {"environment", rep.environment}};
}

// Writes report.csv and report.json into dir.
inline void write_report(const BenchReport& rep, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  const std::string csv = report_csv(rep);
  write_file(dir / "report.csv", std::vector<std::uint8_t>(csv.begin(), csv.end()));
  const std::string js = report_json(rep).dump(2) + "\n";
  write_file(dir / "report.json", std::vector<std::uint8_t>(js.begin(), js.end()));
}

}  // namespace crackseg
