#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "sigimg/error.hpp"

namespace sigimg {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  friend auto operator<=>(const Rgb&, const Rgb&) = default;
};

/// H x W raster of 8-bit RGB, row-major, row 0 at the top.
class EncodedImage {
 public:
  EncodedImage(std::size_t height, std::size_t width, Rgb fill = {})
      : height_(height), width_(width), pixels_(height * width * 3) {
    if (height == 0 || width == 0) throw ShapeError("image dimensions must be positive");
    this->fill(fill);
  }

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }

  Rgb at(std::size_t row, std::size_t col) const {
    const auto* p = &pixels_[(row * width_ + col) * 3];
    return {p[0], p[1], p[2]};
  }
  void set(std::size_t row, std::size_t col, Rgb c) {
    auto* p = &pixels_[(row * width_ + col) * 3];
    p[0] = c.r;
    p[1] = c.g;
    p[2] = c.b;
  }
  void fill(Rgb c) {
    for (std::size_t i = 0; i < pixels_.size(); i += 3) {
      pixels_[i] = c.r;
      pixels_[i + 1] = c.g;
      pixels_[i + 2] = c.b;
    }
  }

  const std::vector<std::uint8_t>& bytes() const { return pixels_; }
  std::vector<std::uint8_t>& bytes() { return pixels_; }

  friend bool operator==(const EncodedImage&, const EncodedImage&) = default;

 private:
  std::size_t height_;
  std::size_t width_;
  std::vector<std::uint8_t> pixels_;
};

}  // namespace sigimg
