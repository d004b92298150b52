#pragma once

// Variance-threshold signal reduction and signal-axis fusion.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "sigimg/error.hpp"
#include "sigimg/signal.hpp"

namespace sigimg {

enum class TauBasis {
  max_sigma,      ///< ratio x largest per-signal standard deviation
  max_abs_value,  ///< ratio x largest absolute sample
};

struct ReductionConfig {
  double tau_ratio = 0.2;
  TauBasis tau_basis = TauBasis::max_sigma;
  bool enabled = true;
  /// Dataset-wide threshold; when set it replaces the per-sequence tau.
  std::optional<double> fixed_tau;

  void validate() const {
    if (!(tau_ratio >= 0.0 && tau_ratio <= 1.0))
      throw Error("tau_ratio must lie in [0, 1], got " + std::to_string(tau_ratio));
    if (fixed_tau && !(*fixed_tau >= 0.0)) throw Error("fixed tau must be non-negative");
  }
};

/// Per-signal keep (1) / zero (0) mask.
struct ContributionVector {
  std::vector<unsigned char> c;

  std::size_t size() const { return c.size(); }
  std::size_t active() const { return static_cast<std::size_t>(std::count(c.begin(), c.end(), 1)); }
  friend bool operator==(const ContributionVector&, const ContributionVector&) = default;
};

inline double compute_tau(const SignalMatrix& matrix, const ReductionConfig& config) {
  config.validate();
  double basis = 0.0;
  for (const auto& row : matrix.rows()) {
    if (config.tau_basis == TauBasis::max_sigma) {
      basis = std::max(basis, population_std(row));
    } else {
      for (double v : row) basis = std::max(basis, std::abs(v));
    }
  }
  return config.tau_ratio * basis;
}

/// c_j = 1 iff sigma(s_j) >= tau.
inline ContributionVector contribution_vector(const SignalMatrix& matrix, double tau) {
  if (!(tau >= 0.0)) throw Error("tau must be non-negative");
  ContributionVector out;
  out.c.reserve(matrix.n_signals());
  for (const auto& row : matrix.rows()) out.c.push_back(population_std(row) >= tau ? 1 : 0);
  return out;
}

/// Zeroes rows whose mask entry is 0. Shape and names are kept.
inline SignalMatrix apply_reduction(const SignalMatrix& matrix, const ContributionVector& c) {
  if (c.size() != matrix.n_signals())
    throw ShapeError("contribution vector has " + std::to_string(c.size()) + " entries for " +
                     std::to_string(matrix.n_signals()) + " signals");
  auto rows = matrix.rows();
  for (std::size_t j = 0; j < rows.size(); ++j)
    if (!c.c[j]) std::fill(rows[j].begin(), rows[j].end(), 0.0);
  return SignalMatrix(matrix.names(), std::move(rows));
}

/// compute_tau + contribution_vector + apply_reduction; identity when disabled.
inline SignalMatrix reduce(const SignalMatrix& matrix, const ReductionConfig& config) {
  if (!config.enabled) return matrix;
  config.validate();
  const double tau = config.fixed_tau ? *config.fixed_tau : compute_tau(matrix, config);
  return apply_reduction(matrix, contribution_vector(matrix, tau));
}

enum class FusePolicy { interpolate_to_max, subsample_to_min };

/// Stacks sources along the signal axis after resampling each to a common
/// length. Names become "<tag>/<name>"; tags default to the source index.
inline SignalMatrix fuse(const std::vector<SignalMatrix>& sources,
                         FusePolicy policy = FusePolicy::interpolate_to_max,
                         const std::vector<std::string>& tags = {}) {
  if (sources.empty()) throw Error("fuse needs at least one signal matrix");
  if (!tags.empty() && tags.size() != sources.size())
    throw ShapeError("fuse got " + std::to_string(tags.size()) + " tags for " +
                     std::to_string(sources.size()) + " sources");
  std::size_t target = sources.front().length();
  for (const auto& s : sources)
    target = policy == FusePolicy::interpolate_to_max ? std::max(target, s.length())
                                                      : std::min(target, s.length());

  std::vector<std::string> names;
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const std::string tag = tags.empty() ? std::to_string(i) : tags[i];
    for (std::size_t j = 0; j < sources[i].n_signals(); ++j) {
      names.push_back(tag + "/" + sources[i].name(j));
      rows.push_back(resample_linear(sources[i].row(j), target));
    }
  }
  return SignalMatrix(std::move(names), std::move(rows));
}

/// Reduces each source on its own scale, then fuses. Reducing after fusion
/// lets a large-scale sensor wipe out every signal of a small-scale one.
inline SignalMatrix reduce_then_fuse(const std::vector<SignalMatrix>& sources,
                                     const ReductionConfig& reduction,
                                     FusePolicy policy = FusePolicy::interpolate_to_max,
                                     const std::vector<std::string>& tags = {}) {
  std::vector<SignalMatrix> reduced;
  reduced.reserve(sources.size());
  for (const auto& s : sources) reduced.push_back(reduce(s, reduction));
  return fuse(reduced, policy, tags);
}

}  // namespace sigimg
