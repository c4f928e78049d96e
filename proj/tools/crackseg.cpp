// crackseg: segment / bench / synth / inspect front end.
//
// stdout carries exactly one JSON object per line; human-readable output goes
// to stderr. Exit codes: 0 ok, 2 bad arguments, 3 I/O failure, 4 degenerate image.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "crackseg/crackseg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kBadArgs = 2, kIo = 3, kDegenerate = 4 };

enum class Verbosity { quiet, info, debug };

Verbosity verbosity() {
  const char* v = std::getenv("CRACKSEG_LOG");
  if (v == nullptr) return Verbosity::info;
  const std::string s = v;
  if (s == "quiet" || s == "0" || s == "off") return Verbosity::quiet;
  if (s == "debug" || s == "2") return Verbosity::debug;
  return Verbosity::info;
}

std::ostream& log_info() {
  static std::ostream null_stream(nullptr);
  return verbosity() == Verbosity::quiet ? null_stream : std::cerr;
}

std::ostream& log_debug() {
  static std::ostream null_stream(nullptr);
  return verbosity() == Verbosity::debug ? std::cerr : null_stream;
}

struct AlgoOptions {
  double c_s = 0.25;
  int max_iters = 64;
  double ittt_eps = 1.0;
  int window = 31;
  double k = 0.5;
  double r_dyn = 128.0;
  bool otsu_literal = false;
  std::string q_log = "10";
  std::string q_error = "label";

  void add_to(CLI::App& app) {
    app.add_option("--cs", c_s, "Stop contrast for recursive-otsu, in (0,1)")->capture_default_str();
    app.add_option("--max-iters", max_iters, "Iteration cap for recursive-otsu and ittt")
        ->capture_default_str();
    app.add_option("--ittt-eps", ittt_eps, "ITTT threshold-change stop value")
        ->capture_default_str();
    app.add_option("--window", window, "Sauvola window (odd)")->capture_default_str();
    app.add_option("--k", k, "Sauvola sensitivity")->capture_default_str();
    app.add_option("--r", r_dyn, "Sauvola standard-deviation dynamic range")->capture_default_str();
    app.add_flag("--otsu-literal", otsu_literal,
                 "Use unnormalized cumulative class sums in the Otsu criterion");
    app.add_option("--q-log", q_log, "Logarithm in Q: 10 or e")
        ->check(CLI::IsMember({"10", "e"}))
        ->capture_default_str();
    app.add_option("--q-error", q_error, "Q colour error: label or class-mean")
        ->check(CLI::IsMember({"label", "class-mean"}))
        ->capture_default_str();
  }

  crackseg::ExpectationMode expectation() const {
    return otsu_literal ? crackseg::ExpectationMode::cumulative
                        : crackseg::ExpectationMode::class_mean;
  }
  crackseg::RecursiveOtsuConfig recursive() const { return {c_s, max_iters, expectation()}; }
  crackseg::IttConfig ittt() const { return {ittt_eps, max_iters, expectation()}; }
  crackseg::SauvolaConfig sauvola() const { return {window, k, r_dyn}; }
  crackseg::QConfig q() const {
    return {q_log == "e" ? crackseg::LogBase::natural : crackseg::LogBase::ten,
            q_error == "class-mean" ? crackseg::ColourError::class_mean
                                    : crackseg::ColourError::label_value};
  }
};

crackseg::Method method_from_flag(const std::string& s) {
  auto m = crackseg::parse_method(s);
  if (!m) throw crackseg::ConfigError("unknown method '" + s + "'");
  return *m;
}

void emit(const json& j) { std::cout << j.dump() << std::endl; }

// ---------------------------------------------------------------------------

struct SegmentArgs {
  std::string method = "recursive-otsu";
  std::string input;
  std::string output;
  std::string trace;
  bool overlay = false;
  AlgoOptions algo;
};

int cmd_segment(const SegmentArgs& a) {
  using namespace crackseg;
  const Method method = method_from_flag(a.method);
  const GrayImage img = load_gray(a.input);
  const Histogram h = build_histogram(img);

  json out = {{"input", a.input}, {"method", to_string(method)}};
  SegMask mask;
  std::optional<ThresholdTrace> trace;
  switch (method) {
    case Method::otsu:
      mask = otsu_segment(img, a.algo.expectation());
      out["iterations"] = mask.degenerate ? 0 : 1;
      break;
    case Method::ittt: {
      IttResult r = ittt_segment(img, a.algo.ittt());
      out["iterations"] = r.thresholds.size();
      out["thresholds"] = r.thresholds;
      out["stop_reason"] = to_string(r.stop);
      mask = std::move(r.mask);
      break;
    }
    case Method::sauvola:
      mask = sauvola_segment(img, a.algo.sauvola());
      break;
    case Method::recursive_otsu: {
      trace = recursive_otsu(h, a.algo.recursive());
      mask = apply_threshold(img, trace->t_u, Method::recursive_otsu);
      mask.degenerate = trace->states.empty();
      std::vector<double> cs;
      for (const auto& s : trace->states) cs.push_back(s.contrast);
      out["t_u"] = trace->t_u;
      out["iterations"] = trace->states.size();
      out["stop_reason"] = to_string(trace->stop_reason);
      out["contrasts"] = cs;
      out["contrast_violations"] = contrast_monotonicity_violations(*trace);
      break;
    }
  }

  if (mask.degenerate) {
    std::cerr << "crackseg: degenerate image " << a.input
              << ": fewer than two distinct intensities, so no between-class split exists\n";
    return kDegenerate;
  }

  if (!a.trace.empty()) {
    json doc = trace ? trace_document(h, *trace) : json{{"histogram", h}};
    if (!trace && mask.final_threshold) doc["final_threshold"] = *mask.final_threshold;
    const std::string text = doc.dump(2) + "\n";
    write_file(a.trace, std::vector<std::uint8_t>(text.begin(), text.end()));
  }
  if (!a.output.empty())
    save_png(a.output, a.overlay ? mask_to_image(mask, Palette::overlay, &img)
                                 : mask_to_image(mask, Palette::bw));

  const QReport q = q_evaluate(img, mask, a.algo.q());
  out["final_threshold"] = mask.final_threshold ? json(*mask.final_threshold) : json(nullptr);
  out["crack_pixels"] = mask.crack_count();
  out["q"] = q.q;
  out["n_c"] = q.n_c;
  if (!a.output.empty()) out["output"] = a.output;
  emit(out);
  return kOk;
}

// ---------------------------------------------------------------------------

struct BenchArgs {
  std::string dir;
  std::string methods = "otsu,ittt,sauvola,recursive-otsu";
  std::string out = "crackseg-bench";
  std::string truth;
  int jobs = 1;
  bool masks = false;
  bool traces = false;
  AlgoOptions algo;
};

int cmd_bench(const BenchArgs& a) {
  using namespace crackseg;
  BenchConfig cfg;
  cfg.input_dir = a.dir;
  cfg.methods.clear();
  std::stringstream ss(a.methods);
  for (std::string tok; std::getline(ss, tok, ',');)
    if (!tok.empty()) cfg.methods.push_back(method_from_flag(tok));
  if (cfg.methods.empty()) throw ConfigError("--methods is empty");
  cfg.recursive = a.algo.recursive();
  cfg.ittt = a.algo.ittt();
  cfg.sauvola = a.algo.sauvola();
  cfg.otsu_expectation = a.algo.expectation();
  cfg.q = a.algo.q();
  cfg.output_dir = a.out;
  cfg.emit_masks = a.masks;
  cfg.emit_traces = a.traces;
  cfg.jobs = a.jobs;
  if (!a.truth.empty()) cfg.truth_dir = fs::path(a.truth);

  const BenchReport rep = run_bench(cfg);
  write_report(rep, cfg.output_dir);

  auto& err = log_info();
  err << std::left << std::setw(16) << "method" << std::setw(14) << "mean Q" << std::setw(6)
      << "rank" << "failures\n";
  json agg = json::array();
  for (const auto& m : rep.aggregate) {
    err << std::setw(16) << to_string(m.method) << std::setw(14)
        << (m.mean_q ? format_double(*m.mean_q).substr(0, 12) : "-") << std::setw(6) << m.rank
        << m.failures << '\n';
    agg.push_back({{"method", to_string(m.method)},
                   {"mean_q", m.mean_q ? json(*m.mean_q) : json(nullptr)},
                   {"rank", m.rank},
                   {"failures", m.failures}});
  }
  for (const auto& r : rep.rows)
    if (!r.ok) log_debug() << "failed: " << r.image << " " << to_string(r.method) << ": " << r.error << '\n';
  emit({{"rows", rep.rows.size()},
        {"aggregate", agg},
        {"report_csv", (cfg.output_dir / "report.csv").string()},
        {"report_json", (cfg.output_dir / "report.json").string()}});
  return kOk;
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string out;
  int n = 10;
  std::uint64_t seed = 0;
  bool shadow = false;
  double noise = 8.0;
  std::size_t size = 256;
  std::string prefix = "crack";
};

int cmd_synth(const SynthArgs& a) {
  using namespace crackseg;
  if (a.n < 1) throw ConfigError("--n must be >= 1");
  if (a.noise < 0) throw ConfigError("--noise must be >= 0");
  if (a.size < 16) throw ConfigError("--size must be >= 16");
  SynthConfig cfg;
  cfg.width = cfg.height = a.size;
  cfg.noise_sigma = a.noise;
  cfg.shadow = a.shadow;
  const auto written = write_synth_set(a.out, a.n, a.seed, cfg, a.prefix);
  std::vector<std::string> names;
  for (const auto& p : written) names.push_back(p.filename().string());
  emit({{"out", a.out},
        {"n", a.n},
        {"seed", a.seed},
        {"shadow", a.shadow},
        {"noise", a.noise},
        {"images", names},
        {"truth_dir", (fs::path(a.out) / "truth").string()}});
  return kOk;
}

// ---------------------------------------------------------------------------

struct InspectArgs {
  std::string input;
  bool histogram = false;
  AlgoOptions algo;
};

int cmd_inspect(const InspectArgs& a) {
  using namespace crackseg;
  const GrayImage img = load_gray(a.input);
  const Histogram h = build_histogram(img);
  const ThresholdTrace trace = recursive_otsu(h, a.algo.recursive());
  json out = trace;
  out["input"] = a.input;
  out["width"] = img.width();
  out["height"] = img.height();
  if (auto g = try_otsu_threshold(h, BinRange::full(), a.algo.expectation()))
    out["global_otsu"] = *g;
  else
    out["global_otsu"] = nullptr;
  out["contrast_violations"] = contrast_monotonicity_violations(trace);
  if (a.histogram) out["histogram"] = h;

  auto& err = log_info();
  err << " k  t_prev  t_k   mu_roi    mu_b      contrast\n";
  for (const auto& s : trace.states)
    err << std::setw(2) << s.k << "  " << std::setw(6) << s.t_prev << "  " << std::setw(3)
        << s.t_k << "  " << std::fixed << std::setprecision(3) << std::setw(8) << s.mu_roi << "  "
        << std::setw(8) << s.mu_b << "  " << std::setw(8) << std::setprecision(5) << s.contrast
        << '\n';
  err << "t_u=" << trace.t_u << " (" << to_string(trace.stop_reason) << ")\n";
  emit(out);
  return trace.states.empty() ? kDegenerate : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Crack segmentation by recursive dark-tail Otsu thresholding", "crackseg"};
  app.set_version_flag("--version", CRACKSEG_VERSION);
  app.require_subcommand(1);

  SegmentArgs seg;
  auto* s = app.add_subcommand("segment", "Segment one image");
  s->add_option("--method", seg.method, "otsu | ittt | sauvola | recursive-otsu")
      ->capture_default_str();
  s->add_option("input", seg.input, "Input PNG/JPEG")->required();
  s->add_option("-o,--output", seg.output, "Mask PNG to write");
  s->add_option("--trace", seg.trace, "Write the threshold trace (JSON) here");
  s->add_flag("--overlay", seg.overlay, "Write an RGB overlay instead of a bw mask");
  seg.algo.add_to(*s);

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "Run methods over an image directory");
  b->add_option("--dir", bench.dir, "Input image directory")->required();
  b->add_option("--methods", bench.methods, "Comma-separated methods")->capture_default_str();
  b->add_option("--out", bench.out, "Output directory")->capture_default_str();
  b->add_option("--truth", bench.truth, "Ground-truth mask directory (default DIR/truth)");
  b->add_option("--jobs", bench.jobs, "Worker threads")->check(CLI::PositiveNumber)
      ->capture_default_str();
  b->add_flag("--masks", bench.masks, "Write masks/<image>.<method>.png");
  b->add_flag("--traces", bench.traces, "Write traces/<image>.recursive_otsu.json");
  bench.algo.add_to(*b);

  SynthArgs synth;
  auto* y = app.add_subcommand("synth", "Generate seeded synthetic crack images with truth masks");
  y->add_option("--out", synth.out, "Output directory")->required();
  y->add_option("--n", synth.n, "Number of images")->capture_default_str();
  y->add_option("--seed", synth.seed, "RNG seed")->capture_default_str();
  y->add_flag("--shadow", synth.shadow, "Add a linear shadow gradient (-60 across the width)");
  y->add_option("--noise", synth.noise, "Gaussian noise sigma")->capture_default_str();
  y->add_option("--size", synth.size, "Image width and height")->capture_default_str();
  y->add_option("--prefix", synth.prefix, "File name prefix")->capture_default_str();

  InspectArgs insp;
  auto* i = app.add_subcommand("inspect", "Print the recursive threshold trace of an image");
  i->add_option("input", insp.input, "Input PNG/JPEG")->required();
  i->add_flag("--histogram", insp.histogram, "Include the 256-bin histogram");
  insp.algo.add_to(*i);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kBadArgs;
  }

  try {
    if (s->parsed()) return cmd_segment(seg);
    if (b->parsed()) return cmd_bench(bench);
    if (y->parsed()) return cmd_synth(synth);
    if (i->parsed()) return cmd_inspect(insp);
  } catch (const crackseg::ConfigError& e) {
    std::cerr << "crackseg: " << e.what() << '\n';
    return kBadArgs;
  } catch (const crackseg::DegenerateRange& e) {
    std::cerr << "crackseg: degenerate image: " << e.what() << '\n';
    return kDegenerate;
  } catch (const crackseg::Error& e) {
    std::cerr << "crackseg: " << e.what() << '\n';
    return kIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "crackseg: " << e.what() << '\n';
    return kIo;
  }
  return kBadArgs;
}
