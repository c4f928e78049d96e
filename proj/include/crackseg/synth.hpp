#pragma once

// Seeded synthetic crack images with pixel-exact ground truth.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "crackseg/error.hpp"
#include "crackseg/gray_image.hpp"
#include "crackseg/imaging.hpp"

namespace crackseg {

struct SynthConfig {
  std::size_t width = 256;
  std::size_t height = 256;
  int background = 160;
  int crack_lo = 30;  // crack intensity drawn per crack from [crack_lo, crack_hi]
  int crack_hi = 50;
  int min_cracks = 1;
  int max_cracks = 3;
  int min_crack_width = 1;
  int max_crack_width = 4;
  double noise_sigma = 8.0;
  bool shadow = false;
  // Linear darkening reaching this depth at the right edge.
  double shadow_depth = 60.0;
};

struct SynthSample {
  GrayImage image;
  GrayImage clean;  // before noise (shadow included)
  SegMask truth;
};

inline SynthSample synth_crack_image(std::mt19937_64& rng, const SynthConfig& cfg) {
  const std::size_t w = cfg.width, h = cfg.height;
  std::vector<int> level(w * h, cfg.background);
  std::vector<Label> truth(w * h, Label::background);

  std::uniform_int_distribution<int> n_cracks(cfg.min_cracks, cfg.max_cracks);
  std::uniform_int_distribution<int> crack_width(cfg.min_crack_width, cfg.max_crack_width);
  std::uniform_int_distribution<int> crack_level(cfg.crack_lo, cfg.crack_hi);
  std::uniform_int_distribution<int> step(-1, 1);
  std::bernoulli_distribution vertical(0.5);

  const int cracks = n_cracks(rng);
  for (int c = 0; c < cracks; ++c) {
    const bool vert = vertical(rng);
    const int cw = crack_width(rng);
    const int value = crack_level(rng);
    // Walk along the major axis; the minor coordinate drifts by at most one per step.
    const std::size_t major = vert ? h : w;
    const std::size_t minor = vert ? w : h;
    std::uniform_int_distribution<int> start(static_cast<int>(minor / 4),
                                             static_cast<int>(3 * minor / 4));
    int pos = start(rng);
    for (std::size_t a = 0; a < major; ++a) {
      pos = std::clamp(pos + step(rng), 0, static_cast<int>(minor) - cw);
      for (int d = 0; d < cw; ++d) {
        const std::size_t b = static_cast<std::size_t>(pos + d);
        const std::size_t idx = vert ? a * w + b : b * w + a;
        level[idx] = value;
        truth[idx] = Label::crack;
      }
    }
  }

  if (cfg.shadow) {
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) {
        const double f = w > 1 ? static_cast<double>(x) / static_cast<double>(w - 1) : 0.0;
        level[y * w + x] -= static_cast<int>(std::lround(cfg.shadow_depth * f));
      }
  }

  std::vector<std::uint8_t> clean(w * h), noisy(w * h);
  std::normal_distribution<double> noise(0.0, cfg.noise_sigma > 0 ? cfg.noise_sigma : 1.0);
  for (std::size_t i = 0; i < w * h; ++i) {
    clean[i] = static_cast<std::uint8_t>(std::clamp(level[i], 0, 255));
    const double n = cfg.noise_sigma > 0 ? noise(rng) : 0.0;
    noisy[i] = static_cast<std::uint8_t>(
        std::clamp(static_cast<long>(std::lround(level[i] + n)), 0L, 255L));
  }

  SegMask t{w, h, std::move(truth), Method::otsu, std::nullopt, false};
  return {GrayImage(w, h, std::move(noisy)), GrayImage(w, h, std::move(clean)), std::move(t)};
}

inline std::string synth_name(const std::string& prefix, int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "_%03d.png", index);
  return prefix + buf;
}

// Writes <dir>/<prefix>_NNN.png and the bw truth mask <dir>/truth/<prefix>_NNN.png.
inline std::vector<std::filesystem::path> write_synth_set(const std::filesystem::path& dir, int n,
                                                          std::uint64_t seed,
                                                          const SynthConfig& cfg = {},
                                                          const std::string& prefix = "crack") {
  std::error_code ec;
  std::filesystem::create_directories(dir / "truth", ec);
  if (ec) throw IoError("cannot create " + (dir / "truth").string() + ": " + ec.message());
  std::mt19937_64 rng(seed);
  std::vector<std::filesystem::path> written;
  for (int i = 0; i < n; ++i) {
    const SynthSample s = synth_crack_image(rng, cfg);
    const std::string name = synth_name(prefix, i);
    save_png(dir / name, to_raster(s.image));
    save_png(dir / "truth" / name, mask_to_image(s.truth, Palette::bw));
    written.push_back(dir / name);
  }
  return written;
}

}  // namespace crackseg
