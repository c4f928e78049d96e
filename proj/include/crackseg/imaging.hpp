#pragma once

// Image decoding/encoding. Link against libpng and libjpeg.

#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <memory>
#include <string>
#include <vector>

#include <jpeglib.h>
#include <png.h>

#include "crackseg/error.hpp"
#include "crackseg/gray_image.hpp"

namespace crackseg {

// Interleaved 8-bit raster ready for encoding: 1 channel (gray) or 3 (RGB).
struct Raster {
  std::size_t width = 0;
  std::size_t height = 0;
  int channels = 1;
  std::vector<std::uint8_t> data;

  friend bool operator==(const Raster&, const Raster&) = default;
};

// BT.601 luma rounded to nearest.
inline std::uint8_t luma601(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  // 299/587/114 per mille; +500 rounds half up. Exact integer arithmetic.
  return static_cast<std::uint8_t>((299u * r + 587u * g + 114u * b + 500u) / 1000u);
}

namespace detail {

inline GrayImage gray_from_interleaved(std::size_t w, std::size_t h, int channels,
                                       const std::uint8_t* src, bool has_alpha) {
  std::vector<std::uint8_t> out(w * h);
  const int colour = has_alpha ? channels - 1 : channels;
  for (std::size_t i = 0; i < w * h; ++i) {
    const std::uint8_t* p = src + i * static_cast<std::size_t>(channels);
    out[i] = colour == 1 ? p[0] : luma601(p[0], p[1], p[2]);
  }
  return GrayImage(w, h, std::move(out));
}

inline GrayImage decode_png(const std::vector<std::uint8_t>& bytes) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size()))
    throw FormatError(std::string("PNG decode failed: ") + img.message);
  if (img.format & PNG_FORMAT_FLAG_LINEAR) {
    png_image_free(&img);
    throw FormatError("16-bit PNG is not supported (8-bit only)");
  }
  const bool colour = img.format & PNG_FORMAT_FLAG_COLOR;
  const bool alpha = img.format & PNG_FORMAT_FLAG_ALPHA;
  img.format = colour ? (alpha ? PNG_FORMAT_RGBA : PNG_FORMAT_RGB)
                      : (alpha ? PNG_FORMAT_GA : PNG_FORMAT_GRAY);
  if (img.width == 0 || img.height == 0) {
    png_image_free(&img);
    throw FormatError("PNG has zero dimension");
  }
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, buf.data(), 0, nullptr))
    throw FormatError(std::string("PNG decode failed: ") + img.message);
  return gray_from_interleaved(img.width, img.height, PNG_IMAGE_PIXEL_CHANNELS(img.format),
                               buf.data(), alpha);
}

struct JpegErrorMgr {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

inline void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

inline void jpeg_silent(j_common_ptr, int) {}

// No C++ objects with destructors may live between setjmp and the decode end.
inline bool decode_jpeg_raw(const std::vector<std::uint8_t>& bytes, std::vector<std::uint8_t>& out,
                            std::size_t& w, std::size_t& h, int& channels, std::string& msg) {
  jpeg_decompress_struct cinfo;
  JpegErrorMgr err;
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  err.base.emit_message = jpeg_silent;
  if (setjmp(err.jump)) {
    msg = err.message;
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  if (cinfo.jpeg_color_space == JCS_CMYK || cinfo.jpeg_color_space == JCS_YCCK) {
    msg = "CMYK JPEG is not supported";
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  cinfo.out_color_space = cinfo.num_components == 1 ? JCS_GRAYSCALE : JCS_RGB;
  jpeg_start_decompress(&cinfo);
  w = cinfo.output_width;
  h = cinfo.output_height;
  channels = cinfo.output_components;
  out.resize(w * h * static_cast<std::size_t>(channels));
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = out.data() + static_cast<std::size_t>(cinfo.output_scanline) * w *
                                    static_cast<std::size_t>(channels);
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return true;
}

inline GrayImage decode_jpeg(const std::vector<std::uint8_t>& bytes) {
  std::vector<std::uint8_t> buf;
  std::size_t w = 0, h = 0;
  int channels = 0;
  std::string msg;
  if (!decode_jpeg_raw(bytes, buf, w, h, channels, msg))
    throw FormatError("JPEG decode failed: " + msg);
  if (w == 0 || h == 0) throw FormatError("JPEG has zero dimension");
  return gray_from_interleaved(w, h, channels, buf.data(), false);
}

}  // namespace detail

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("cannot read " + path.string());
  return bytes;
}

// Decode PNG or JPEG bytes (detected by signature) to 8-bit gray.
inline GrayImage decode_gray(const std::vector<std::uint8_t>& bytes) {
  static constexpr std::uint8_t kPng[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPng, 8) == 0)
    return detail::decode_png(bytes);
  if (bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF)
    return detail::decode_jpeg(bytes);
  throw FormatError("unsupported image format (PNG or JPEG expected)");
}

inline GrayImage load_gray(const std::filesystem::path& path) {
  try {
    return decode_gray(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

inline std::vector<std::uint8_t> encode_png(const Raster& r) {
  if (r.channels != 1 && r.channels != 3) throw FormatError("PNG encode: 1 or 3 channels");
  if (r.data.size() != r.width * r.height * static_cast<std::size_t>(r.channels))
    throw DimensionError("PNG encode: raster size mismatch");
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(r.width);
  img.height = static_cast<png_uint_32>(r.height);
  img.format = r.channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&img, nullptr, &size, 0, r.data.data(), 0, nullptr))
    throw FormatError(std::string("PNG encode failed: ") + img.message);
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&img, out.data(), &size, 0, r.data.data(), 0, nullptr))
    throw FormatError(std::string("PNG encode failed: ") + img.message);
  out.resize(size);
  return out;
}

inline void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed " + path.string());
}

inline void save_png(const std::filesystem::path& path, const Raster& r) {
  write_file(path, encode_png(r));
}

inline Raster to_raster(const GrayImage& img) {
  return {img.width(), img.height(), 1, {img.pixels().begin(), img.pixels().end()}};
}

enum class Palette { bw, overlay };

// bw: crack -> 0, background -> 255 (gray). overlay: crack pixels painted red
// over the base image, others keep their gray value (RGB).
inline Raster mask_to_image(const SegMask& mask, Palette palette,
                            const GrayImage* base = nullptr) {
  if (mask.labels.size() != mask.width * mask.height)
    throw DimensionError("mask_to_image: label count mismatch");
  Raster r{mask.width, mask.height, palette == Palette::bw ? 1 : 3, {}};
  if (palette == Palette::bw) {
    r.data.reserve(mask.labels.size());
    for (Label l : mask.labels) r.data.push_back(l == Label::crack ? 0 : 255);
    return r;
  }
  if (base == nullptr) throw DimensionError("mask_to_image: overlay needs a base image");
  if (base->width() != mask.width || base->height() != mask.height)
    throw DimensionError("mask_to_image: base and mask dimensions differ");
  r.data.reserve(mask.labels.size() * 3);
  const auto px = base->pixels();
  for (std::size_t i = 0; i < mask.labels.size(); ++i) {
    if (mask.labels[i] == Label::crack) {
      r.data.insert(r.data.end(), {255, 0, 0});
    } else {
      r.data.insert(r.data.end(), {px[i], px[i], px[i]});
    }
  }
  return r;
}

// Reads a bw mask image: intensity < 128 is crack.
inline SegMask mask_from_image(const GrayImage& img, Method method = Method::otsu) {
  SegMask m = threshold_mask(img, 128, method);
  m.final_threshold.reset();
  return m;
}

inline SegMask load_mask(const std::filesystem::path& path, Method method = Method::otsu) {
  return mask_from_image(load_gray(path), method);
}

}  // namespace crackseg
