#pragma once

// Signal matrix -> RGB image. Columns are time, rows are value (max at the
// top), hue identifies the signal and a white-to-hue ramp marks elapsed time.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "sigimg/error.hpp"
#include "sigimg/image.hpp"
#include "sigimg/signal.hpp"

namespace sigimg {

namespace detail {

inline std::uint8_t round_channel(double x) {
  return static_cast<std::uint8_t>(std::clamp(std::floor(x + 0.5), 0.0, 255.0));
}

}  // namespace detail

/// Hue in degrees, saturation and value in [0, 1]. Channels rounded half-up.
inline Rgb hsv_to_rgb(double hue_deg, double saturation, double value) {
  hue_deg = std::fmod(hue_deg, 360.0);
  if (hue_deg < 0) hue_deg += 360.0;
  const double c = value * saturation;
  const double h = hue_deg / 60.0;
  const double x = c * (1.0 - std::abs(std::fmod(h, 2.0) - 1.0));
  const double m = value - c;
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(h)) {
    case 0: r = c, g = x; break;
    case 1: r = x, g = c; break;
    case 2: g = c, b = x; break;
    case 3: g = x, b = c; break;
    case 4: r = x, b = c; break;
    default: r = c, b = x; break;
  }
  return {detail::round_channel((r + m) * 255.0), detail::round_channel((g + m) * 255.0),
          detail::round_channel((b + m) * 255.0)};
}

struct Palette {
  std::vector<Rgb> colors;
};

/// n evenly spaced hues starting at red.
inline Palette sample_palette(std::size_t n, double saturation = 1.0, double value = 1.0) {
  if (n == 0) throw Error("palette size must be positive");
  if (n > 4096) throw Error("palette size " + std::to_string(n) + " exceeds 4096");
  if (!(saturation >= 0.0 && saturation <= 1.0) || !(value >= 0.0 && value <= 1.0))
    throw Error("saturation and value must lie in [0, 1]");
  Palette p;
  p.colors.reserve(n);
  for (std::size_t j = 0; j < n; ++j)
    p.colors.push_back(hsv_to_rgb(static_cast<double>(j) * 360.0 / static_cast<double>(n), saturation, value));
  return p;
}

/// Linear blend from white (t = 0) to `base` (t = m - 1).
inline Rgb temporal_color(Rgb base, std::size_t t, std::size_t m) {
  if (m == 0 || t >= m)
    throw Error("sample index " + std::to_string(t) + " out of range for length " + std::to_string(m));
  const double u = m == 1 ? 1.0 : static_cast<double>(t) / static_cast<double>(m - 1);
  auto ch = [u](std::uint8_t c) { return detail::round_channel(255.0 + u * (static_cast<double>(c) - 255.0)); };
  return {ch(base.r), ch(base.g), ch(base.b)};
}

/// max -> row 0, min -> row H-1; a degenerate range lands on the centre row.
inline std::size_t value_to_row(double v, ValueRange range, std::size_t height) {
  if (height < 2) throw Error("image height must be at least 2");
  const auto last = static_cast<double>(height - 1);
  if (!(range.max > range.min)) return (height - 1) / 2;
  const double row = std::floor(last * (range.max - v) / (range.max - range.min) + 0.5);
  return static_cast<std::size_t>(std::clamp(row, 0.0, last));
}

/// Sample index -> column, index-linear over [0, W-1]; rounds half-up.
inline std::size_t sample_to_column(std::size_t t, std::size_t m, std::size_t width) {
  if (m <= 1) return 0;
  return (2 * t * (width - 1) + (m - 1)) / (2 * (m - 1));
}

enum class DrawOrder { input_order };

struct EncodingConfig {
  std::size_t height = 256;
  std::size_t width = 256;
  std::size_t line_width = 1;
  Rgb background{0, 0, 0};
  double saturation = 1.0;
  double value = 1.0;
  RangeMode range_mode = PerSequenceRange{};
  DrawOrder draw_order = DrawOrder::input_order;
  bool gradient = true;

  void validate() const {
    if (height < 2 || width < 2)
      throw Error("image must be at least 2x2, got " + std::to_string(height) + "x" + std::to_string(width));
    if (line_width < 1) throw Error("line width must be positive");
    if (!(saturation >= 0.0 && saturation <= 1.0) || !(value >= 0.0 && value <= 1.0))
      throw Error("saturation and value must lie in [0, 1]");
    if (const auto* f = std::get_if<FixedRange>(&range_mode); f && !(f->min <= f->max))
      throw Error("fixed range has min > max");
  }
};

/// One plotted pixel, reported to an optional observer during encoding.
struct DrawEvent {
  std::size_t signal;
  std::size_t sample;
  std::size_t row;
  std::size_t col;
  Rgb color;
};

using DrawObserver = std::function<void(const DrawEvent&)>;

namespace detail {

struct Canvas {
  EncodedImage& image;
  std::size_t line_width;
  const DrawObserver* observer;

  void stamp(long row, long col, std::size_t signal, std::size_t sample, Rgb color) {
    const long lo = -static_cast<long>((line_width - 1) / 2);
    const long hi = static_cast<long>(line_width / 2);
    const long h = static_cast<long>(image.height());
    const long w = static_cast<long>(image.width());
    for (long dr = lo; dr <= hi; ++dr) {
      for (long dc = lo; dc <= hi; ++dc) {
        const long r = row + dr, c = col + dc;
        if (r < 0 || c < 0 || r >= h || c >= w) continue;
        image.set(static_cast<std::size_t>(r), static_cast<std::size_t>(c), color);
        if (observer)
          (*observer)({signal, sample, static_cast<std::size_t>(r), static_cast<std::size_t>(c), color});
      }
    }
  }

  /// Bresenham from (r0, c0) towards (r1, c1), excluding the end point.
  void segment(long r0, long c0, long r1, long c1, std::size_t signal, std::size_t sample, Rgb color) {
    const long dc = std::labs(c1 - c0), sc = c0 < c1 ? 1 : -1;
    const long dr = -std::labs(r1 - r0), sr = r0 < r1 ? 1 : -1;
    long err = dc + dr;
    while (r0 != r1 || c0 != c1) {
      stamp(r0, c0, signal, sample, color);
      const long e2 = 2 * err;
      if (e2 >= dr) {
        err += dr;
        c0 += sc;
      }
      if (e2 <= dc) {
        err += dc;
        r0 += sr;
      }
    }
  }
};

}  // namespace detail

/// Rasterizes every signal as a polyline in input order (later signals
/// overdraw earlier ones). Zeroed signals are drawn as flat lines at 0.
inline EncodedImage encode_image(const SignalMatrix& matrix, const EncodingConfig& config,
                                 const DrawObserver& observer = {}) {
  config.validate();
  EncodedImage image(config.height, config.width, config.background);
  const auto range = matrix_value_range(matrix, config.range_mode);
  const auto palette = sample_palette(matrix.n_signals(), config.saturation, config.value);
  const std::size_t m = matrix.length();
  detail::Canvas canvas{image, config.line_width, observer ? &observer : nullptr};

  std::vector<long> cols(m);
  for (std::size_t t = 0; t < m; ++t) cols[t] = static_cast<long>(sample_to_column(t, m, config.width));

  std::vector<Rgb> ramp(m);
  for (std::size_t j = 0; j < matrix.n_signals(); ++j) {
    const Rgb base = palette.colors[j];
    for (std::size_t t = 0; t < m; ++t) ramp[t] = config.gradient ? temporal_color(base, t, m) : base;
    const auto row = matrix.row(j);
    long r_prev = static_cast<long>(value_to_row(row[0], range, config.height));
    for (std::size_t t = 0; t + 1 < m; ++t) {
      const long r_next = static_cast<long>(value_to_row(row[t + 1], range, config.height));
      canvas.segment(r_prev, cols[t], r_next, cols[t + 1], j, t, ramp[t]);
      r_prev = r_next;
    }
    canvas.stamp(r_prev, cols[m - 1], j, m - 1, ramp[m - 1]);
  }
  return image;
}

}  // namespace sigimg
