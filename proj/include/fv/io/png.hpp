// fusionvision - RGB-D object isolation and 3D box extraction
// SPDX-License-Identifier: Apache-2.0

// In-memory PNG codec for depth frames (16-bit gray), masks (gray, any bit
// depth, > 127 is set), soft masks (gray, normalized to [0, 1]) and color
// frames (8-bit RGB). Backed by libpng.

#ifndef FV_IO_PNG_HPP
#define FV_IO_PNG_HPP

#include <png.h>

#include <csetjmp>
#include <cstdint>
#include <cstring>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fv/core.hpp"
#include "fv/metrics.hpp"

namespace fv::io {

using Bytes = std::vector<std::uint8_t>;

namespace png_detail {

struct Decoded {
  int width = 0;
  int height = 0;
  int bit_depth = 0;  // 8 or 16 after normalization
  int channels = 0;
  std::vector<std::uint16_t> samples;  // row-major, channels interleaved
};

enum class Want { Gray16, GrayAny, Rgb8 };

struct ReadState {
  const std::uint8_t* data;
  std::size_t size;
  std::size_t offset;
};

extern "C" inline void read_cb(png_structp png, png_bytep out, png_size_t n) {
  auto* s = static_cast<ReadState*>(png_get_io_ptr(png));
  if (n > s->size - s->offset) png_error(png, "unexpected end of data");
  std::memcpy(out, s->data + s->offset, n);
  s->offset += n;
}

extern "C" inline void error_cb(png_structp png, png_const_charp msg) {
  auto* buf = static_cast<char*>(png_get_error_ptr(png));
  std::strncpy(buf, msg, 255);
  buf[255] = '\0';
  png_longjmp(png, 1);
}

extern "C" inline void warning_cb(png_structp, png_const_charp) {}

// libpng reports errors by longjmp. Everything with a destructor lives in
// the caller; this frame only holds trivially destructible state.
inline bool decode_into(std::span<const std::uint8_t> bytes, Want want, Decoded& out,
                        std::vector<std::uint8_t>& raw, std::vector<png_bytep>& rows, char* err,
                        std::string& format_err) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    std::strcpy(err, "not a PNG file");
    return false;
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, err, error_cb, warning_cb);
  if (!png) {
    std::strcpy(err, "out of memory");
    return false;
  }
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    std::strcpy(err, "out of memory");
    return false;
  }
  ReadState state{bytes.data(), bytes.size(), 0};
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_set_read_fn(png, &state, read_cb);
  png_set_user_limits(png, 1u << 15, 1u << 15);
  png_read_info(png, info);

  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  const int depth = png_get_bit_depth(png, info);
  const int color = png_get_color_type(png, info);

  bool ok = true;
  switch (want) {
    case Want::Gray16:
      if (color != PNG_COLOR_TYPE_GRAY || depth != 16) {
        format_err = "expected a 16-bit single-channel PNG (got bit depth " +
                     std::to_string(depth) + ", color type " + std::to_string(color) + ")";
        ok = false;
      }
      break;
    case Want::GrayAny:
      if (color != PNG_COLOR_TYPE_GRAY) {
        format_err = "expected a single-channel PNG (got color type " + std::to_string(color) + ")";
        ok = false;
      } else if (depth < 8) {
        png_set_expand_gray_1_2_4_to_8(png);
      }
      break;
    case Want::Rgb8:
      if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
      if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) {
        if (depth < 8) png_set_expand_gray_1_2_4_to_8(png);
        png_set_gray_to_rgb(png);
      }
      if (depth == 16) png_set_strip_16(png);
      if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
      break;
  }
  if (!ok) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_read_update_info(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  out.width = static_cast<int>(w);
  out.height = static_cast<int>(h);
  out.bit_depth = png_get_bit_depth(png, info);
  out.channels = png_get_channels(png, info);
  if (want == Want::Rgb8 && out.channels != 3) {
    format_err = "could not convert PNG to 3-channel RGB";
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  raw.resize(rowbytes * h);
  rows.resize(h);
  for (png_uint_32 y = 0; y < h; ++y) rows[y] = raw.data() + y * rowbytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  const std::size_t n = static_cast<std::size_t>(w) * h * out.channels;
  out.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.samples[i] = out.bit_depth == 16
                         ? static_cast<std::uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1])
                         : raw[i];
  }
  return true;
}

inline Decoded decode(std::span<const std::uint8_t> bytes, Want want, const char* what) {
  Decoded out;
  std::vector<std::uint8_t> raw;
  std::vector<png_bytep> rows;
  char err[256] = {0};
  std::string format_err;
  if (!decode_into(bytes, want, out, raw, rows, err, format_err)) {
    throw FormatError(std::string(what) + ": " + (format_err.empty() ? err : format_err));
  }
  return out;
}

struct WriteState {
  Bytes* out;
};

extern "C" inline void write_cb(png_structp png, png_bytep data, png_size_t n) {
  auto* s = static_cast<WriteState*>(png_get_io_ptr(png));
  s->out->insert(s->out->end(), data, data + n);
}

extern "C" inline void flush_cb(png_structp) {}

/// `rows` must already hold big-endian sample bytes.
inline bool encode_into(int width, int height, int bit_depth, int color_type,
                        std::vector<png_bytep>& rows, Bytes& out, char* err) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, err, error_cb, warning_cb);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    return false;
  }
  WriteState state{&out};
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_set_write_fn(png, &state, write_cb, flush_cb);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
               bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

inline Bytes encode(int width, int height, int bit_depth, int color_type, int channels,
                    std::vector<std::uint8_t>& raw) {
  if (width < 1 || height < 1) throw FormatError("png: cannot encode an empty image");
  const std::size_t rowbytes =
      static_cast<std::size_t>(width) * channels * static_cast<std::size_t>(bit_depth / 8);
  std::vector<png_bytep> rows(static_cast<std::size_t>(height));
  for (int y = 0; y < height; ++y) rows[y] = raw.data() + y * rowbytes;
  Bytes out;
  char err[256] = {0};
  if (!encode_into(width, height, bit_depth, color_type, rows, out, err)) {
    throw FormatError(std::string("png: encode failed: ") + err);
  }
  return out;
}

}  // namespace png_detail

inline DepthFrame load_depth_png(std::span<const std::uint8_t> bytes,
                                 double depth_scale = DepthFrame::kDefaultScale) {
  auto d = png_detail::decode(bytes, png_detail::Want::Gray16, "depth png");
  return DepthFrame(d.width, d.height, std::move(d.samples), depth_scale);
}

inline Bytes save_depth_png(const DepthFrame& depth) {
  std::vector<std::uint8_t> raw(depth.size() * 2);
  for (std::size_t i = 0; i < depth.size(); ++i) {
    raw[2 * i] = static_cast<std::uint8_t>(depth.data()[i] >> 8);
    raw[2 * i + 1] = static_cast<std::uint8_t>(depth.data()[i] & 0xff);
  }
  return png_detail::encode(depth.width(), depth.height(), 16, PNG_COLOR_TYPE_GRAY, 1, raw);
}

/// Single-channel mask; samples above half range are set. If `expected`
/// dimensions are given the image must match them.
inline BinaryMask load_mask(std::span<const std::uint8_t> bytes,
                            std::optional<std::pair<int, int>> expected = std::nullopt) {
  auto d = png_detail::decode(bytes, png_detail::Want::GrayAny, "mask png");
  if (expected && (expected->first != d.width || expected->second != d.height)) {
    throw FormatError("mask png: size " + std::to_string(d.width) + "x" +
                      std::to_string(d.height) + " does not match expected " +
                      std::to_string(expected->first) + "x" + std::to_string(expected->second));
  }
  const std::uint16_t cut = d.bit_depth == 16 ? 32767 : 127;
  std::vector<std::uint8_t> bits(d.samples.size());
  for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = d.samples[i] > cut ? 1 : 0;
  return BinaryMask(d.width, d.height, std::move(bits));
}

inline Bytes save_mask_png(const BinaryMask& mask) {
  std::vector<std::uint8_t> raw(mask.size());
  for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = mask[i] ? 255 : 0;
  return png_detail::encode(mask.width(), mask.height(), 8, PNG_COLOR_TYPE_GRAY, 1, raw);
}

/// Gray PNG scaled to [0, 1] by its maximum sample value.
inline metrics::SoftMask load_soft_mask(std::span<const std::uint8_t> bytes) {
  auto d = png_detail::decode(bytes, png_detail::Want::GrayAny, "soft mask png");
  const double full = d.bit_depth == 16 ? 65535.0 : 255.0;
  std::vector<double> values(d.samples.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = d.samples[i] / full;
  return metrics::SoftMask(d.width, d.height, std::move(values));
}

inline Bytes save_soft_mask_png(const metrics::SoftMask& mask) {
  std::vector<std::uint8_t> raw(mask.values().size() * 2);
  for (std::size_t i = 0; i < mask.values().size(); ++i) {
    const auto s = static_cast<std::uint16_t>(std::lround(mask.values()[i] * 65535.0));
    raw[2 * i] = static_cast<std::uint8_t>(s >> 8);
    raw[2 * i + 1] = static_cast<std::uint8_t>(s & 0xff);
  }
  return png_detail::encode(mask.width(), mask.height(), 16, PNG_COLOR_TYPE_GRAY, 1, raw);
}

inline ColorFrame load_color_png(std::span<const std::uint8_t> bytes) {
  auto d = png_detail::decode(bytes, png_detail::Want::Rgb8, "color png");
  std::vector<std::uint8_t> rgb(d.samples.begin(), d.samples.end());
  return ColorFrame(d.width, d.height, std::move(rgb));
}

inline Bytes save_color_png(const ColorFrame& color) {
  std::vector<std::uint8_t> raw = color.data();
  return png_detail::encode(color.width(), color.height(), 8, PNG_COLOR_TYPE_RGB, 3, raw);
}

}  // namespace fv::io

#endif  // FV_IO_PNG_HPP
