#pragma once

// Synthetic labelled sequences with known class structure. Class y drives
// its active signals at (y + 1) cycles per sequence; the remaining signals
// carry noise only.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "sigimg/error.hpp"
#include "sigimg/ingest.hpp"
#include "sigimg/random.hpp"
#include "sigimg/signal.hpp"

namespace sigimg {

struct SynthSpec {
  std::size_t n_classes = 6;
  std::size_t sequences_per_class = 40;
  std::size_t n_signals = 12;
  std::size_t length = 120;
  double noise_sigma = 0.05;
  double active_fraction = 0.5;
  std::uint64_t seed = 0;

  void validate() const {
    if (n_classes < 2) throw Error("synth needs at least 2 classes");
    if (sequences_per_class < 1) throw Error("synth needs at least 1 sequence per class");
    if (n_signals < 1) throw Error("synth needs at least 1 signal");
    if (length < 2) throw Error("synth sequence length must be at least 2");
    if (!(noise_sigma >= 0.0)) throw Error("noise_sigma must be non-negative");
    if (!(active_fraction > 0.0 && active_fraction <= 1.0)) throw Error("active_fraction must lie in (0, 1]");
  }

  std::size_t active_signals() const {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(active_fraction * static_cast<double>(n_signals) + 0.5)));
  }
  std::size_t train_per_class() const {
    return static_cast<std::size_t>(std::ceil(0.8 * static_cast<double>(sequences_per_class) - 1e-9));
  }
};

struct SynthDataset {
  std::vector<SequenceRecord> records;  // manifest entry order
  DatasetManifest manifest;             // paths relative to the dataset root
};

namespace detail {

/// mt19937_64 output is fixed by the standard; the distributions are not,
/// so uniforms and normals are derived by hand.
class PortableNormal {
 public:
  explicit PortableNormal(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

inline std::string zero_pad(std::size_t v, std::size_t width) {
  auto s = std::to_string(v);
  return s.size() >= width ? s : std::string(width - s.size(), '0') + s;
}

}  // namespace detail

inline SynthDataset generate(const SynthSpec& spec) {
  spec.validate();
  SynthDataset out;
  const std::size_t digits = std::to_string(spec.n_classes - 1).size();
  for (std::size_t y = 0; y < spec.n_classes; ++y) out.manifest.label_names.push_back("class_" + detail::zero_pad(y, digits));

  std::vector<std::string> names;
  const std::size_t name_digits = std::max<std::size_t>(2, std::to_string(spec.n_signals - 1).size());
  for (std::size_t j = 0; j < spec.n_signals; ++j) names.push_back("s" + detail::zero_pad(j, name_digits));

  const std::size_t active = spec.active_signals();
  const std::size_t n_train = spec.train_per_class();
  const auto m = static_cast<double>(spec.length);
  for (std::size_t y = 0; y < spec.n_classes; ++y) {
    const double cycles = static_cast<double>(y + 1);
    for (std::size_t i = 0; i < spec.sequences_per_class; ++i) {
      // Each sequence has its own stream, keyed by (seed, class, index).
      detail::PortableNormal rng(keyed_bits(spec.seed, y, i, 0));
      std::vector<std::vector<double>> rows(spec.n_signals, std::vector<double>(spec.length));
      for (std::size_t j = 0; j < spec.n_signals; ++j) {
        const double phase = j < active ? 2.0 * std::numbers::pi * rng.uniform() : 0.0;
        for (std::size_t t = 0; t < spec.length; ++t) {
          const double clean =
              j < active ? std::sin(2.0 * std::numbers::pi * cycles * static_cast<double>(t) / m + phase) : 0.0;
          rows[j][t] = clean + (spec.noise_sigma > 0.0 ? spec.noise_sigma * rng.normal() : 0.0);
        }
      }
      const std::string id = "c" + detail::zero_pad(y, digits) + "_s" + detail::zero_pad(i, 3);
      ManifestEntry entry;
      entry.relative_paths = {"sequences/" + id + ".csv"};
      entry.paths = {fs::path(entry.relative_paths.front())};
      entry.label = {y};
      entry.split = i < n_train ? Split::train : Split::test;
      entry.sequence_id = id;
      out.manifest.entries.push_back(entry);
      out.records.push_back({SignalMatrix(names, std::move(rows)), {y}, id, {}, std::nullopt});
    }
  }
  return out;
}

/// Writes sequences/<id>.csv and manifest.json under `root`.
inline void write_dataset(const SynthDataset& dataset, const fs::path& root) {
  for (std::size_t i = 0; i < dataset.records.size(); ++i)
    write_sequence_csv(dataset.records[i].matrix, root / dataset.manifest.entries[i].relative_paths.front());
  write_manifest(dataset.manifest, root / "manifest.json");
}

}  // namespace sigimg
