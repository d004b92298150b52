#pragma once

// Image-space augmentation: width stretch, rotation and perspective warp,
// all nearest-neighbour so results are bit-reproducible.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sigimg/error.hpp"
#include "sigimg/image.hpp"
#include "sigimg/parallel.hpp"
#include "sigimg/random.hpp"

namespace sigimg {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

/// Row-major 3x3 projective transform acting on (x, y, 1).
using Homography = std::array<double, 9>;

namespace detail {

inline long round_half_up(double x) { return static_cast<long>(std::floor(x + 0.5)); }

inline Point2 project(const Homography& h, double x, double y) {
  const double w = h[6] * x + h[7] * y + h[8];
  return {(h[0] * x + h[1] * y + h[2]) / w, (h[3] * x + h[4] * y + h[5]) / w};
}

/// out(r, c) = in(round(to_source(c, r))), background where that falls outside.
inline EncodedImage warp_by_inverse(const EncodedImage& image, const Homography& to_source, Rgb fill) {
  EncodedImage out(image.height(), image.width(), fill);
  const long h = static_cast<long>(image.height());
  const long w = static_cast<long>(image.width());
  for (long r = 0; r < h; ++r) {
    for (long c = 0; c < w; ++c) {
      const double den = to_source[6] * c + to_source[7] * r + to_source[8];
      if (!(std::abs(den) > 1e-12)) continue;
      const Point2 s = project(to_source, static_cast<double>(c), static_cast<double>(r));
      if (!std::isfinite(s.x) || !std::isfinite(s.y)) continue;
      const long sc = round_half_up(s.x), sr = round_half_up(s.y);
      if (sr < 0 || sc < 0 || sr >= h || sc >= w) continue;
      out.set(static_cast<std::size_t>(r), static_cast<std::size_t>(c),
              image.at(static_cast<std::size_t>(sr), static_cast<std::size_t>(sc)));
    }
  }
  return out;
}

inline EncodedImage rotate_unchecked(const EncodedImage& image, double angle_deg, Rgb fill) {
  const double a = angle_deg * std::numbers::pi / 180.0;
  const double cs = std::cos(a), sn = std::sin(a);
  const double cx = (static_cast<double>(image.width()) - 1.0) / 2.0;
  const double cy = (static_cast<double>(image.height()) - 1.0) / 2.0;
  // Inverse map of a counter-clockwise (on screen) rotation about the centre.
  const Homography to_source{cs, -sn, cx - cs * cx + sn * cy,
                             sn, cs,  cy - sn * cx - cs * cy,
                             0,  0,   1};
  return warp_by_inverse(image, to_source, fill);
}

inline double cross(Point2 o, Point2 a, Point2 b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

}  // namespace detail

/// Solves for H with H(src[i]) = dst[i]. Throws on degenerate input.
inline Homography homography_from_points(const std::array<Point2, 4>& src, const std::array<Point2, 4>& dst) {
  double a[8][9] = {};
  for (int i = 0; i < 4; ++i) {
    const double x = src[i].x, y = src[i].y, u = dst[i].x, v = dst[i].y;
    double* r0 = a[2 * i];
    double* r1 = a[2 * i + 1];
    r0[0] = x, r0[1] = y, r0[2] = 1, r0[6] = -u * x, r0[7] = -u * y, r0[8] = u;
    r1[3] = x, r1[4] = y, r1[5] = 1, r1[6] = -v * x, r1[7] = -v * y, r1[8] = v;
  }
  for (int col = 0; col < 8; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 8; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    if (std::abs(a[pivot][col]) < 1e-12) throw Error("degenerate point correspondence for homography");
    if (pivot != col)
      for (int k = 0; k < 9; ++k) std::swap(a[col][k], a[pivot][k]);
    for (int r = 0; r < 8; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      if (f == 0.0) continue;
      for (int k = col; k < 9; ++k) a[r][k] -= f * a[col][k];
    }
  }
  Homography h{};
  for (int i = 0; i < 8; ++i) h[i] = a[i][8] / a[i][i];
  h[8] = 1.0;
  return h;
}

inline Homography invert(const Homography& m) {
  const double det = m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
                     m[2] * (m[3] * m[7] - m[4] * m[6]);
  if (std::abs(det) < 1e-15) throw Error("homography is singular");
  return {(m[4] * m[8] - m[5] * m[7]) / det, (m[2] * m[7] - m[1] * m[8]) / det, (m[1] * m[5] - m[2] * m[4]) / det,
          (m[5] * m[6] - m[3] * m[8]) / det, (m[0] * m[8] - m[2] * m[6]) / det, (m[2] * m[3] - m[0] * m[5]) / det,
          (m[3] * m[7] - m[4] * m[6]) / det, (m[1] * m[6] - m[0] * m[7]) / det, (m[0] * m[4] - m[1] * m[3]) / det};
}

/// Horizontal nearest-neighbour rescale, then centre crop or centre pad back to W.
inline EncodedImage width_stretch(const EncodedImage& image, double factor, Rgb fill = {}) {
  if (!(factor >= 0.25 && factor <= 4.0))
    throw Error("stretch factor must lie in [0.25, 4], got " + std::to_string(factor));
  const long w = static_cast<long>(image.width());
  const long scaled = std::max(1L, detail::round_half_up(static_cast<double>(w) * factor));
  const long offset = scaled >= w ? (scaled - w) / 2 : -((w - scaled) / 2);
  EncodedImage out(image.height(), image.width(), fill);
  for (long c = 0; c < w; ++c) {
    const long xs = c + offset;
    if (xs < 0 || xs >= scaled) continue;
    const long src = std::min(w - 1, static_cast<long>(std::floor((static_cast<double>(xs) + 0.5) / factor)));
    for (std::size_t r = 0; r < image.height(); ++r)
      out.set(r, static_cast<std::size_t>(c), image.at(r, static_cast<std::size_t>(src)));
  }
  return out;
}

/// Counter-clockwise rotation about the image centre, |angle| <= 45 degrees.
inline EncodedImage rotate(const EncodedImage& image, double angle_deg, Rgb fill = {}) {
  if (!(std::abs(angle_deg) <= 45.0))
    throw Error("rotation angle must lie in [-45, 45] degrees, got " + std::to_string(angle_deg));
  return detail::rotate_unchecked(image, angle_deg, fill);
}

/// Warps so that the quad `corners` (normalized frame coordinates, order
/// top-left, top-right, bottom-right, bottom-left) fills the whole frame.
inline EncodedImage perspective_warp(const EncodedImage& image, const std::array<Point2, 4>& corners, Rgb fill = {}) {
  for (const auto& p : corners)
    if (!(p.x >= -0.25 && p.x <= 1.25 && p.y >= -0.25 && p.y <= 1.25))
      throw Error("perspective corner outside [-0.25, 1.25]^2");
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      for (int k = j + 1; k < 4; ++k)
        if (std::abs(detail::cross(corners[i], corners[j], corners[k])) < 1e-9)
          throw Error("degenerate perspective corners (three are collinear)");
  // Same winding as the frame (y down): every turn is positive.
  for (int i = 0; i < 4; ++i)
    if (detail::cross(corners[i], corners[(i + 1) % 4], corners[(i + 2) % 4]) <= 0)
      throw Error("perspective corners must form a convex quadrilateral ordered top-left, top-right, "
                  "bottom-right, bottom-left");
  const double sx = static_cast<double>(image.width()) - 1.0;
  const double sy = static_cast<double>(image.height()) - 1.0;
  const std::array<Point2, 4> frame{{{0, 0}, {sx, 0}, {sx, sy}, {0, sy}}};
  std::array<Point2, 4> quad;
  for (int i = 0; i < 4; ++i) quad[i] = {corners[i].x * sx, corners[i].y * sy};
  return detail::warp_by_inverse(image, homography_from_points(frame, quad), fill);
}

/// Applies a forward (source -> destination) pixel-space homography.
inline EncodedImage apply_homography(const EncodedImage& image, const Homography& forward, Rgb fill = {}) {
  return detail::warp_by_inverse(image, invert(forward), fill);
}

struct AugmentSpec {
  std::pair<double, double> width_stretch_range{0.8, 1.2};
  std::pair<double, double> rotation_range_deg{-10.0, 10.0};
  double perspective_jitter = 0.05;
  std::size_t count_per_image = 0;
  std::uint64_t seed = 0;

  void validate() const {
    const auto [slo, shi] = width_stretch_range;
    if (!(slo > 0 && slo <= shi)) throw Error("width_stretch_range needs 0 < lo <= hi");
    if (slo < 0.25 || shi > 4.0) throw Error("width_stretch_range must lie within [0.25, 4]");
    const auto [rlo, rhi] = rotation_range_deg;
    if (!(rlo <= rhi)) throw Error("rotation_range_deg needs lo <= hi");
    if (rlo < -45.0 || rhi > 45.0) throw Error("rotation_range_deg must lie within [-45, 45]");
    if (!(perspective_jitter >= 0.0 && perspective_jitter <= 0.25))
      throw Error("perspective_jitter must lie in [0, 0.25]");
  }

  friend bool operator==(const AugmentSpec&, const AugmentSpec&) = default;
};

inline void to_json(nlohmann::json& j, const AugmentSpec& s) {
  j = {{"width_stretch_range", {s.width_stretch_range.first, s.width_stretch_range.second}},
       {"rotation_range_deg", {s.rotation_range_deg.first, s.rotation_range_deg.second}},
       {"perspective_jitter", s.perspective_jitter},
       {"count_per_image", s.count_per_image},
       {"seed", s.seed}};
}

inline void from_json(const nlohmann::json& j, AugmentSpec& s) {
  auto range = [&](const char* key, std::pair<double, double>& out) {
    if (!j.contains(key)) return;
    const auto& r = j.at(key);
    if (!r.is_array() || r.size() != 2) throw Error(std::string(key) + " must be a [lo, hi] array");
    out = {r[0].get<double>(), r[1].get<double>()};
  };
  range("width_stretch_range", s.width_stretch_range);
  range("rotation_range_deg", s.rotation_range_deg);
  s.perspective_jitter = j.value("perspective_jitter", s.perspective_jitter);
  s.count_per_image = j.value("count_per_image", s.count_per_image);
  s.seed = j.value("seed", s.seed);
}

/// The concrete transform chosen for one augmented variant.
struct AugmentParams {
  double stretch = 1.0;
  double angle_deg = 0.0;
  std::array<Point2, 4> corners{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
};

inline void to_json(nlohmann::json& j, const AugmentParams& p) {
  nlohmann::json corners = nlohmann::json::array();
  for (const auto& c : p.corners) corners.push_back({c.x, c.y});
  j = {{"stretch", p.stretch}, {"angle_deg", p.angle_deg}, {"corners", corners}};
}

inline AugmentParams draw_augment_params(const AugmentSpec& spec, std::size_t height, std::size_t width,
                                         std::size_t image_index, std::size_t variant) {
  auto u = [&](std::uint64_t slot) { return keyed_uniform(spec.seed, image_index, variant, slot); };
  auto lerp = [](std::pair<double, double> r, double t) { return r.first + t * (r.second - r.first); };
  AugmentParams p;
  p.stretch = lerp(spec.width_stretch_range, u(0));
  p.angle_deg = lerp(spec.rotation_range_deg, u(1));
  const double px = spec.perspective_jitter * static_cast<double>(std::min(height, width));
  // Normalizing by W (not W - 1) keeps |offset| <= jitter <= 0.25, which
  // keeps the quad convex and inside the allowed frame.
  const double nx = px / static_cast<double>(width);
  const double ny = px / static_cast<double>(height);
  for (int i = 0; i < 4; ++i) {
    p.corners[i].x += (2.0 * u(2 + 2 * i) - 1.0) * nx;
    p.corners[i].y += (2.0 * u(3 + 2 * i) - 1.0) * ny;
  }
  return p;
}

/// stretch -> rotate -> perspective.
inline EncodedImage apply_augment(const EncodedImage& image, const AugmentParams& p, Rgb fill = {}) {
  auto out = width_stretch(image, p.stretch, fill);
  out = rotate(out, p.angle_deg, fill);
  return perspective_warp(out, p.corners, fill);
}

/// count_per_image variants per input, image-major. Output is independent
/// of `threads`.
inline std::vector<EncodedImage> augment_batch(const std::vector<EncodedImage>& images, const AugmentSpec& spec,
                                               Rgb fill = {}, std::size_t threads = 1) {
  spec.validate();
  const std::size_t k = spec.count_per_image;
  std::vector<EncodedImage> out(images.size() * k, EncodedImage(1, 1));
  parallel_for(out.size(), threads, [&](std::size_t i) {
    const std::size_t img = i / k, var = i % k;
    const auto& src = images[img];
    out[i] = apply_augment(src, draw_augment_params(spec, src.height(), src.width(), img, var), fill);
  });
  return out;
}

}  // namespace sigimg
