#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "crackseg/imaging.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliResult {
  int code = -1;
  std::string out;
};

CliResult run(const std::string& args) {
  const std::string cmd = std::string(CRACKSEG_CLI_PATH) + " " + args + " 2>/dev/null";
  CliResult r;
  FILE* p = popen(cmd.c_str(), "r");
  if (p == nullptr) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

json single_json_line(const std::string& out) {
  EXPECT_FALSE(out.empty());
  EXPECT_EQ(out.back(), '\n');
  EXPECT_EQ(out.find('\n'), out.size() - 1) << "expected exactly one stdout line";
  return json::parse(out);
}

std::string strip_last_column(const std::string& csv) {
  std::istringstream in(csv);
  std::string out;
  for (std::string line; std::getline(in, line);) out += line.substr(0, line.rfind(',')) + "\n";
  return out;
}

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    root_ = fs::temp_directory_path() / ("crackseg_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(root_);
    ASSERT_EQ(run("synth --out " + (root_ / "fx").string() + " --n 2 --seed 2 --shadow --size 128").code, 0);
    crackseg::save_png(root_ / "flat.png", crackseg::to_raster(crackseg::GrayImage(6, 6, 50)));
  }
  static void TearDownTestSuite() { fs::remove_all(root_); }

  static std::string path(const std::string& rel) { return (root_ / rel).string(); }

  static inline fs::path root_;
};

}  // namespace

TEST_F(Cli, SegmentRecursiveOtsu) {
  const CliResult r = run("segment --method recursive-otsu --cs 0.25 " + path("fx/crack_000.png") + " -o " +
                    path("m.png"));
  ASSERT_EQ(r.code, 0);
  const json j = single_json_line(r.out);
  EXPECT_TRUE(j.contains("t_u"));
  EXPECT_EQ(j["stop_reason"], "contrast_exceeded");
  EXPECT_EQ(j["t_u"], j["final_threshold"]);
  EXPECT_GT(j["q"].get<double>(), 0.0);
  const auto mask = crackseg::load_gray(path("m.png"));
  EXPECT_EQ(mask.width(), 128u);
}

TEST_F(Cli, ConstantImageExitsFour) {
  EXPECT_EQ(run("segment --method otsu " + path("flat.png") + " -o " + path("flat_mask.png")).code, 4);
  EXPECT_FALSE(fs::exists(path("flat_mask.png")));
  EXPECT_EQ(run("segment --method ittt " + path("flat.png")).code, 4);
  EXPECT_EQ(run("segment --method recursive-otsu " + path("flat.png")).code, 4);
  EXPECT_EQ(run("segment --method sauvola " + path("flat.png")).code, 0);
}

TEST_F(Cli, TinyStopContrastMatchesOtsu) {
  for (const char* img : {"fx/crack_000.png", "fx/crack_001.png"}) {
    const json rec = single_json_line(run("segment --method recursive-otsu --cs 1e-9 " + path(img)).out);
    const json otsu = single_json_line(run("segment --method otsu " + path(img)).out);
    EXPECT_EQ(rec["t_u"], otsu["final_threshold"]);
    EXPECT_EQ(rec["iterations"], 1);
  }
}

TEST_F(Cli, OverlayAndTrace) {
  const CliResult r = run("segment --method recursive-otsu --overlay --trace " + path("t.json") + " " +
                    path("fx/crack_001.png") + " -o " + path("ov.png"));
  ASSERT_EQ(r.code, 0);
  const json t = json::parse(std::ifstream(path("t.json")));
  EXPECT_EQ(t["histogram"].size(), 256u);
  EXPECT_FALSE(t["states"].empty());
  EXPECT_EQ(t["t_u"], single_json_line(r.out)["t_u"]);
  for (const auto& s : t["states"])
    for (const char* key : {"k", "t_prev", "t_k", "mu_roi", "mu_b", "contrast", "roi_pixels", "bg_pixels"})
      EXPECT_TRUE(s.contains(key)) << key;
  const auto bytes = crackseg::read_file(path("ov.png"));
  EXPECT_EQ(bytes[25], 2) << "PNG colour type should be RGB";
}

TEST_F(Cli, ArgumentErrors) {
  const std::string img = path("fx/crack_000.png");
  EXPECT_EQ(run("segment --bogus " + img).code, 2);
  EXPECT_EQ(run("segment --method nope " + img).code, 2);
  EXPECT_EQ(run("segment --cs 1.5 " + img).code, 2);
  EXPECT_EQ(run("segment --method sauvola --window 4 " + img).code, 2);
  EXPECT_EQ(run("segment").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("bench --dir " + path("fx") + " --methods otsu,unknown").code, 2);
  EXPECT_EQ(run("--help").code, 0);
}

TEST_F(Cli, IoErrors) {
  EXPECT_EQ(run("segment " + path("nope.png")).code, 3);
  EXPECT_EQ(run("bench --dir " + path("nope")).code, 3);
  EXPECT_EQ(run("segment " + path("fx/crack_000.png") + " -o " + path("no/such/dir/m.png")).code, 3);
}

TEST_F(Cli, BenchAndRerunDeterminism) {
  const CliResult a = run("bench --dir " + path("fx") + " --out " + path("b1") + " --jobs 1 --masks --traces");
  ASSERT_EQ(a.code, 0);
  const json j = single_json_line(a.out);
  EXPECT_EQ(j["rows"], 8);
  EXPECT_EQ(j["aggregate"].size(), 4u);
  ASSERT_EQ(run("bench --dir " + path("fx") + " --out " + path("b2") + " --jobs 8").code, 0);
  const auto csv1 = crackseg::read_file(path("b1/report.csv"));
  const auto csv2 = crackseg::read_file(path("b2/report.csv"));
  EXPECT_EQ(strip_last_column({csv1.begin(), csv1.end()}), strip_last_column({csv2.begin(), csv2.end()}));
  EXPECT_TRUE(fs::exists(path("b1/masks/crack_000.otsu.png")));
  EXPECT_TRUE(fs::exists(path("b1/traces/crack_001.recursive_otsu.json")));
}

TEST_F(Cli, SynthIsSeeded) {
  ASSERT_EQ(run("synth --out " + path("s1") + " --n 1 --seed 7").code, 0);
  ASSERT_EQ(run("synth --out " + path("s2") + " --n 1 --seed 7").code, 0);
  EXPECT_EQ(crackseg::read_file(path("s1/crack_000.png")), crackseg::read_file(path("s2/crack_000.png")));
  EXPECT_EQ(crackseg::read_file(path("s1/truth/crack_000.png")),
            crackseg::read_file(path("s2/truth/crack_000.png")));
  EXPECT_EQ(run("synth --out /proc/crackseg_nope --n 1").code, 3);
}

TEST_F(Cli, Inspect) {
  const CliResult r = run("inspect --histogram " + path("fx/crack_000.png"));
  ASSERT_EQ(r.code, 0);
  const json j = single_json_line(r.out);
  EXPECT_EQ(j["histogram"].size(), 256u);
  EXPECT_LE(j["t_u"].get<int>(), j["global_otsu"]["threshold"].get<int>());
  EXPECT_EQ(run("inspect " + path("flat.png")).code, 4);
}
