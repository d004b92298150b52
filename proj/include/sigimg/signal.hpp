#pragma once

// Signal matrices and the numeric primitives shared by the pipeline.
// Orientation is fixed: one row per signal, one column per time sample.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

#include "sigimg/error.hpp"

namespace sigimg {

/// N named signals of common length M. Immutable once built.
class SignalMatrix {
 public:
  SignalMatrix(std::vector<std::string> names, std::vector<std::vector<double>> rows)
      : names_(std::move(names)), rows_(std::move(rows)) {
    if (rows_.empty()) throw ShapeError("signal matrix needs at least one signal");
    if (names_.size() != rows_.size())
      throw ShapeError("signal matrix has " + std::to_string(rows_.size()) + " rows but " +
                       std::to_string(names_.size()) + " names");
    const std::size_t m = rows_.front().size();
    if (m == 0) throw ShapeError("signal matrix needs at least one sample");
    std::unordered_set<std::string> seen;
    for (std::size_t j = 0; j < rows_.size(); ++j) {
      if (rows_[j].size() != m)
        throw ShapeError("signal '" + names_[j] + "' has length " +
                         std::to_string(rows_[j].size()) + ", expected " + std::to_string(m));
      if (!seen.insert(names_[j]).second)
        throw ShapeError("duplicate signal name '" + names_[j] + "'");
      for (double v : rows_[j])
        if (!std::isfinite(v)) throw ShapeError("signal '" + names_[j] + "' has a non-finite sample");
    }
  }

  std::size_t n_signals() const { return rows_.size(); }
  std::size_t length() const { return rows_.front().size(); }

  std::span<const double> row(std::size_t j) const { return rows_.at(j); }
  const std::string& name(std::size_t j) const { return names_.at(j); }
  double at(std::size_t j, std::size_t t) const { return rows_.at(j).at(t); }

  const std::vector<std::string>& names() const { return names_; }
  const std::vector<std::vector<double>>& rows() const { return rows_; }

  friend bool operator==(const SignalMatrix&, const SignalMatrix&) = default;

 private:
  std::vector<std::string> names_;
  std::vector<std::vector<double>> rows_;
};

/// Standard deviation with the population convention (divide by M).
/// Single pass (Welford), so it stays accurate for large offsets.
inline double population_std(std::span<const double> signal) {
  if (signal.empty()) throw Error("empty signal");
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t n = 0;
  for (double x : signal) {
    ++n;
    const double delta = x - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (x - mean);
  }
  return std::sqrt(std::max(0.0, m2 / static_cast<double>(n)));
}

/// Piecewise-linear evaluation at `target_len` equally spaced positions over [0, M-1].
/// Endpoints are reproduced exactly; equal length returns the input unchanged.
inline std::vector<double> resample_linear(std::span<const double> signal, std::size_t target_len) {
  if (signal.empty()) throw Error("empty signal");
  if (target_len == 0) throw Error("resample target length must be positive");
  const std::size_t m = signal.size();
  if (m == target_len) return {signal.begin(), signal.end()};
  std::vector<double> out(target_len);
  if (m == 1) {
    std::fill(out.begin(), out.end(), signal[0]);
    return out;
  }
  out[0] = signal[0];
  if (target_len == 1) return out;
  const double step = static_cast<double>(m - 1) / static_cast<double>(target_len - 1);
  for (std::size_t i = 1; i + 1 < target_len; ++i) {
    const double pos = static_cast<double>(i) * step;
    const auto k = std::min(static_cast<std::size_t>(pos), m - 2);
    out[i] = std::lerp(signal[k], signal[k + 1], pos - static_cast<double>(k));
  }
  out[target_len - 1] = signal[m - 1];
  return out;
}

struct PerSequenceRange {
  friend bool operator==(const PerSequenceRange&, const PerSequenceRange&) = default;
};

struct FixedRange {
  double min = -1.0;
  double max = 1.0;
  friend bool operator==(const FixedRange&, const FixedRange&) = default;
};

/// How the renderer maps sample values onto image rows.
using RangeMode = std::variant<PerSequenceRange, FixedRange>;

struct ValueRange {
  double min = 0.0;
  double max = 0.0;
  friend bool operator==(const ValueRange&, const ValueRange&) = default;
};

inline ValueRange matrix_value_range(const SignalMatrix& matrix, const RangeMode& mode) {
  if (const auto* fixed = std::get_if<FixedRange>(&mode)) {
    if (!(fixed->min <= fixed->max))
      throw Error("fixed range has min > max (" + std::to_string(fixed->min) + " > " +
                  std::to_string(fixed->max) + ")");
    return {fixed->min, fixed->max};
  }
  ValueRange r{matrix.at(0, 0), matrix.at(0, 0)};
  for (const auto& row : matrix.rows()) {
    const auto [lo, hi] = std::minmax_element(row.begin(), row.end());
    r.min = std::min(r.min, *lo);
    r.max = std::max(r.max, *hi);
  }
  return r;
}

enum class SensorKind { skeleton, inertial, wifi_csi, mocap, generic };

/// Sensor kind plus the layout metadata needed to check the signal count.
struct SensorDescriptor {
  SensorKind kind = SensorKind::generic;
  std::size_t joints = 0;  // skeleton / mocap
  std::size_t coords = 0;  // per joint
  std::size_t bands = 0;   // wifi_csi

  /// Expected signal count, if the layout pins one.
  std::optional<std::size_t> expected_signals() const {
    if ((kind == SensorKind::skeleton || kind == SensorKind::mocap) && joints > 0 && coords > 0)
      return joints * coords;
    if (kind == SensorKind::wifi_csi && bands > 0) return bands;
    return std::nullopt;
  }

  void check(std::size_t n_signals) const {
    if (auto n = expected_signals(); n && *n != n_signals)
      throw ShapeError("sensor layout expects " + std::to_string(*n) + " signals, got " +
                       std::to_string(n_signals));
  }

  friend bool operator==(const SensorDescriptor&, const SensorDescriptor&) = default;
};

inline const char* to_string(SensorKind kind) {
  switch (kind) {
    case SensorKind::skeleton: return "skeleton";
    case SensorKind::inertial: return "inertial";
    case SensorKind::wifi_csi: return "wifi_csi";
    case SensorKind::mocap: return "mocap";
    case SensorKind::generic: return "generic";
  }
  return "generic";
}

inline SensorKind sensor_kind_from_string(const std::string& s) {
  if (s == "skeleton") return SensorKind::skeleton;
  if (s == "inertial") return SensorKind::inertial;
  if (s == "wifi_csi") return SensorKind::wifi_csi;
  if (s == "mocap") return SensorKind::mocap;
  if (s == "generic") return SensorKind::generic;
  throw Error("unknown sensor kind '" + s + "'");
}

struct ClassLabel {
  std::size_t index = 0;
  friend auto operator<=>(const ClassLabel&, const ClassLabel&) = default;
};

/// One labelled sequence as it flows through the pipeline.
struct SequenceRecord {
  SignalMatrix matrix;
  ClassLabel label;
  std::string sequence_id;
  SensorDescriptor sensor;
  std::optional<double> sample_rate_hz;
};

}  // namespace sigimg
