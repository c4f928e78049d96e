#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "crackseg/synth.hpp"

using namespace crackseg;
namespace fs = std::filesystem;

TEST(Synth, SameSeedSameImage) {
  std::mt19937_64 a(7), b(7);
  const auto s1 = synth_crack_image(a, {});
  const auto s2 = synth_crack_image(b, {});
  EXPECT_EQ(s1.image, s2.image);
  EXPECT_EQ(s1.truth.labels, s2.truth.labels);
}

TEST(Synth, CrackPixelsDarkBeforeNoise) {
  std::mt19937_64 rng(9);
  for (bool shadow : {false, true}) {
    SynthConfig cfg;
    cfg.shadow = shadow;
    for (int i = 0; i < 5; ++i) {
      const auto s = synth_crack_image(rng, cfg);
      ASSERT_GT(s.truth.crack_count(), 0u);
      for (std::size_t p = 0; p < s.clean.size(); ++p)
        if (s.truth.labels[p] == Label::crack) {
          ASSERT_LT(s.clean.pixels()[p], 100);
        }
    }
  }
}

TEST(Synth, ShadowDarkensRightEdge) {
  std::mt19937_64 rng(3);
  SynthConfig cfg;
  cfg.shadow = true;
  const auto s = synth_crack_image(rng, cfg);
  for (std::size_t y = 0; y < s.clean.height(); ++y) {
    const std::size_t idx = y * s.clean.width();
    if (s.truth.labels[idx] == Label::background) {
      EXPECT_EQ(s.clean.pixels()[idx], 160);
    }
    const std::size_t last = idx + s.clean.width() - 1;
    if (s.truth.labels[last] == Label::background) {
      EXPECT_EQ(s.clean.pixels()[last], 100);
    }
  }
}

TEST(Synth, WrittenSetIsByteIdentical) {
  const fs::path base = fs::temp_directory_path() / ("crackseg_synth_" + std::to_string(std::random_device{}()));
  write_synth_set(base / "a", 2, 7);
  write_synth_set(base / "b", 2, 7);
  for (const char* name : {"crack_000.png", "crack_001.png", "truth/crack_000.png"})
    EXPECT_EQ(read_file(base / "a" / name), read_file(base / "b" / name)) << name;
  const auto truth = load_mask(base / "a" / "truth" / "crack_000.png");
  EXPECT_GT(truth.crack_count(), 0u);
  fs::remove_all(base);
}
