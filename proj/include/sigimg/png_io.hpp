#pragma once

// 8-bit RGB PNG encode/decode on top of libpng. Encoder settings are pinned
// (zlib level 6, default strategy, adaptive filters, no ancillary chunks) so
// equal images give equal bytes.

#include <png.h>

#include <csetjmp>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "sigimg/error.hpp"
#include "sigimg/image.hpp"
#include "sigimg/ingest.hpp"

namespace sigimg {

namespace detail {

struct PngErrorState {
  char message[256] = {};
};

inline void png_error_fn(png_structp png, png_const_charp msg) {
  auto* state = static_cast<PngErrorState*>(png_get_error_ptr(png));
  std::strncpy(state->message, msg ? msg : "libpng error", sizeof(state->message) - 1);
  png_longjmp(png, 1);
}

inline void png_warning_fn(png_structp, png_const_charp) {}

inline void png_write_to_vector(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

inline void png_flush_noop(png_structp) {}

// Only trivially destructible locals live between setjmp and any longjmp.
inline bool png_encode_raw(const std::uint8_t* pixels, std::uint32_t height, std::uint32_t width,
                           std::vector<std::uint8_t>* out, PngErrorState* state,
                           png_bytep* row_ptrs) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, state, png_error_fn, png_warning_fn);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_set_write_fn(png, out, png_write_to_vector, png_flush_noop);
  png_set_compression_level(png, 6);
  png_set_compression_strategy(png, 0);
  png_set_filter(png, PNG_FILTER_TYPE_BASE, PNG_ALL_FILTERS);
  png_set_IHDR(png, info, width, height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  for (std::uint32_t r = 0; r < height; ++r)
    row_ptrs[r] = const_cast<png_bytep>(pixels + static_cast<std::size_t>(r) * width * 3);
  png_set_rows(png, info, row_ptrs);
  png_write_png(png, info, PNG_TRANSFORM_IDENTITY, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

struct PngReadSource {
  const std::uint8_t* data;
  std::size_t size;
  std::size_t offset;
};

inline void png_read_from_memory(png_structp png, png_bytep out, png_size_t length) {
  auto* src = static_cast<PngReadSource*>(png_get_io_ptr(png));
  if (src->offset + length > src->size) png_error(png, "truncated PNG data");
  std::memcpy(out, src->data + src->offset, length);
  src->offset += length;
}

inline bool png_read_header(png_structp png, png_infop info, std::uint32_t* height, std::uint32_t* width) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_read_info(png, info);
  png_set_expand(png);
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_set_gray_to_rgb(png);
  png_set_interlace_handling(png);
  png_read_update_info(png, info);
  *height = png_get_image_height(png, info);
  *width = png_get_image_width(png, info);
  return true;
}

inline bool png_read_body(png_structp png, png_infop info, png_bytep* row_ptrs) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_read_image(png, row_ptrs);
  png_read_end(png, info);
  return true;
}

}  // namespace detail

/// Encodes to PNG bytes in memory.
inline std::vector<std::uint8_t> encode_png(const EncodedImage& image) {
  std::vector<std::uint8_t> out;
  out.reserve(image.bytes().size() / 8 + 1024);
  std::vector<png_bytep> rows(image.height());
  detail::PngErrorState state;
  if (!detail::png_encode_raw(image.bytes().data(), static_cast<std::uint32_t>(image.height()),
                              static_cast<std::uint32_t>(image.width()), &out, &state, rows.data()))
    throw Error(std::string("PNG encode failed: ") + state.message);
  return out;
}

inline EncodedImage decode_png(const std::vector<std::uint8_t>& bytes, const std::string& source = "<png>") {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) throw Error(source + ": not a PNG file");
  detail::PngErrorState state;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &state, detail::png_error_fn,
                                           detail::png_warning_fn);
  if (!png) throw Error(source + ": cannot create PNG reader");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error(source + ": cannot create PNG reader");
  }
  detail::PngReadSource src{bytes.data(), bytes.size(), 0};
  png_set_read_fn(png, &src, detail::png_read_from_memory);

  std::uint32_t height = 0, width = 0;
  if (!detail::png_read_header(png, info, &height, &width)) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(source + ": " + state.message);
  }
  if (png_get_rowbytes(png, info) != static_cast<std::size_t>(width) * 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(source + ": unsupported PNG pixel layout");
  }
  EncodedImage image(height, width);
  std::vector<png_bytep> rows(height);
  for (std::uint32_t r = 0; r < height; ++r)
    rows[r] = image.bytes().data() + static_cast<std::size_t>(r) * width * 3;
  const bool ok = detail::png_read_body(png, info, rows.data());
  png_destroy_read_struct(&png, &info, nullptr);
  if (!ok) throw Error(source + ": " + state.message);
  return image;
}

/// Writes via a temporary file and rename, so readers never see a partial PNG.
inline void write_png(const EncodedImage& image, const fs::path& path) {
  const auto bytes = encode_png(image);
  detail::write_file_atomic(path, {reinterpret_cast<const char*>(bytes.data()), bytes.size()});
}

inline EncodedImage read_png(const fs::path& path) {
  const auto text = detail::read_file(path);
  return decode_png(std::vector<std::uint8_t>(text.begin(), text.end()), path.string());
}

}  // namespace sigimg
