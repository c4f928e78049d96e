#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "crackseg/error.hpp"

namespace crackseg {

// Row-major 8-bit grayscale image. Width and height are always >= 1.
class GrayImage {
 public:
  GrayImage(std::size_t width, std::size_t height, std::vector<std::uint8_t> data)
      : width_(width), height_(height), data_(std::move(data)) {
    if (width_ == 0 || height_ == 0)
      throw DimensionError("GrayImage: zero dimension");
    if (data_.size() != width_ * height_)
      throw DimensionError("GrayImage: data length " + std::to_string(data_.size()) +
                           " != " + std::to_string(width_) + "x" + std::to_string(height_));
  }

  // Constant image.
  GrayImage(std::size_t width, std::size_t height, std::uint8_t fill = 0)
      : GrayImage(width, height, std::vector<std::uint8_t>(width * height, fill)) {}

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }

  std::uint8_t operator()(std::size_t x, std::size_t y) const { return data_[y * width_ + x]; }
  std::uint8_t& operator()(std::size_t x, std::size_t y) { return data_[y * width_ + x]; }

  std::span<const std::uint8_t> pixels() const noexcept { return data_; }
  std::span<std::uint8_t> pixels() noexcept { return data_; }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  std::size_t width_;
  std::size_t height_;
  std::vector<std::uint8_t> data_;
};

enum class Method { otsu, ittt, sauvola, recursive_otsu };

inline constexpr Method kAllMethods[] = {Method::otsu, Method::ittt, Method::sauvola,
                                         Method::recursive_otsu};

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::otsu: return "otsu";
    case Method::ittt: return "ittt";
    case Method::sauvola: return "sauvola";
    case Method::recursive_otsu: return "recursive_otsu";
  }
  return "unknown";
}

// Accepts the canonical names plus "recursive-otsu".
inline std::optional<Method> parse_method(std::string_view s) {
  if (s == "otsu") return Method::otsu;
  if (s == "ittt") return Method::ittt;
  if (s == "sauvola") return Method::sauvola;
  if (s == "recursive_otsu" || s == "recursive-otsu") return Method::recursive_otsu;
  return std::nullopt;
}

// Class labels fixed by the evaluation convention: 1 = background, 2 = crack.
enum class Label : std::uint8_t { background = 1, crack = 2 };

// Per-pixel segmentation result.
struct SegMask {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<Label> labels;
  Method method = Method::otsu;
  // Absent for per-pixel methods (Sauvola).
  std::optional<int> final_threshold;
  // Set when the input could not be split (constant image etc.).
  bool degenerate = false;

  Label operator()(std::size_t x, std::size_t y) const { return labels[y * width + x]; }

  std::size_t crack_count() const {
    std::size_t n = 0;
    for (Label l : labels) n += (l == Label::crack);
    return n;
  }
};

// Label every pixel with intensity < threshold as crack. threshold is in [0, 256].
inline SegMask threshold_mask(const GrayImage& img, int threshold, Method method) {
  SegMask m{img.width(), img.height(), {}, method, threshold, false};
  m.labels.reserve(img.size());
  for (std::uint8_t v : img.pixels())
    m.labels.push_back(static_cast<int>(v) < threshold ? Label::crack : Label::background);
  return m;
}

}  // namespace crackseg
