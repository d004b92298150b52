#pragma once

// Featurization and small reference classifiers for checking that encoded
// images separate their classes.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <sstream>
#include <iomanip>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "sigimg/error.hpp"
#include "sigimg/image.hpp"
#include "sigimg/signal.hpp"

namespace sigimg {

using FeatureVector = std::vector<double>;

/// Area-weighted box downsample to side x side of the luminance
/// 0.299 R + 0.587 G + 0.114 B, scaled to [0, 1], row-major.
inline FeatureVector featurize(const EncodedImage& image, std::size_t side = 32) {
  if (side < 2) throw Error("feature side must be at least 2");
  const std::size_t h = image.height(), w = image.width();
  std::vector<double> gray(h * w);
  const auto& px = image.bytes();
  for (std::size_t i = 0; i < h * w; ++i)
    gray[i] = static_cast<double>(299 * px[3 * i] + 587 * px[3 * i + 1] + 114 * px[3 * i + 2]) / 255000.0;

  // Overlap of source cells with each output cell along one axis.
  struct Span {
    std::size_t first;
    std::vector<double> weights;
  };
  auto spans = [side](std::size_t n) {
    std::vector<Span> out(side);
    const double scale = static_cast<double>(n) / static_cast<double>(side);
    for (std::size_t i = 0; i < side; ++i) {
      const double lo = static_cast<double>(i) * scale, hi = static_cast<double>(i + 1) * scale;
      const auto first = static_cast<std::size_t>(std::floor(lo));
      const auto last = std::min(n - 1, static_cast<std::size_t>(std::ceil(hi)) - 1);
      out[i].first = first;
      for (std::size_t k = first; k <= last; ++k) {
        const double overlap = std::min(hi, static_cast<double>(k + 1)) - std::max(lo, static_cast<double>(k));
        out[i].weights.push_back(std::max(0.0, overlap) / scale);
      }
    }
    return out;
  };
  const auto rows = spans(h), cols = spans(w);

  FeatureVector out(side * side);
  for (std::size_t i = 0; i < side; ++i) {
    for (std::size_t j = 0; j < side; ++j) {
      double acc = 0.0;
      for (std::size_t a = 0; a < rows[i].weights.size(); ++a) {
        const double* line = &gray[(rows[i].first + a) * w + cols[j].first];
        double inner = 0.0;
        for (std::size_t b = 0; b < cols[j].weights.size(); ++b) inner += cols[j].weights[b] * line[b];
        acc += rows[i].weights[a] * inner;
      }
      out[i * side + j] = std::clamp(acc, 0.0, 1.0);
    }
  }
  return out;
}

inline double euclidean(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw ShapeError("feature length mismatch: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

struct LabeledFeature {
  FeatureVector features;
  ClassLabel label;
};

/// Majority vote among the k nearest (Euclidean). Neighbour ties at equal
/// distance go to the lower label; vote ties go to the smallest summed
/// distance, then the lower label.
inline ClassLabel knn_predict(std::span<const LabeledFeature> train, std::span<const double> query, std::size_t k) {
  if (train.empty()) throw Error("k-NN needs a non-empty training set");
  if (k == 0 || k % 2 == 0) throw Error("k must be a positive odd integer, got " + std::to_string(k));
  if (k > train.size())
    throw Error("k = " + std::to_string(k) + " exceeds training set size " + std::to_string(train.size()));

  std::vector<std::pair<double, std::size_t>> dist;  // (distance, label)
  dist.reserve(train.size());
  for (const auto& t : train) dist.emplace_back(euclidean(t.features, query), t.label.index);
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());

  std::map<std::size_t, std::pair<std::size_t, double>> votes;  // label -> (count, summed distance)
  for (std::size_t i = 0; i < k; ++i) {
    auto& v = votes[dist[i].second];
    ++v.first;
    v.second += dist[i].first;
  }
  auto best = votes.begin();
  for (auto it = std::next(votes.begin()); it != votes.end(); ++it) {
    const auto& [count, sum] = it->second;
    if (count > best->second.first || (count == best->second.first && sum < best->second.second)) best = it;
  }
  return {best->first};
}

/// Per-class mean feature vectors.
class NearestCentroid {
 public:
  NearestCentroid(std::span<const LabeledFeature> train, std::size_t n_classes) {
    if (train.empty()) throw Error("nearest centroid needs a non-empty training set");
    const std::size_t dim = train.front().features.size();
    centroids_.assign(n_classes, FeatureVector(dim, 0.0));
    std::vector<std::size_t> counts(n_classes, 0);
    for (const auto& t : train) {
      if (t.label.index >= n_classes) throw Error("training label out of range");
      if (t.features.size() != dim) throw ShapeError("inconsistent feature lengths in training set");
      for (std::size_t d = 0; d < dim; ++d) centroids_[t.label.index][d] += t.features[d];
      ++counts[t.label.index];
    }
    for (std::size_t c = 0; c < n_classes; ++c) {
      if (counts[c] == 0) throw Error("class " + std::to_string(c) + " has no training vectors");
      for (auto& v : centroids_[c]) v /= static_cast<double>(counts[c]);
    }
  }

  ClassLabel predict(std::span<const double> query) const {
    std::size_t best = 0;
    double best_d = euclidean(centroids_[0], query);
    for (std::size_t c = 1; c < centroids_.size(); ++c) {
      const double d = euclidean(centroids_[c], query);
      if (d < best_d) best = c, best_d = d;
    }
    return {best};
  }

  const std::vector<FeatureVector>& centroids() const { return centroids_; }

 private:
  std::vector<FeatureVector> centroids_;
};

inline ClassLabel nearest_centroid(std::span<const LabeledFeature> train, std::span<const double> query,
                                   std::size_t n_classes) {
  return NearestCentroid(train, n_classes).predict(query);
}

struct EvalReport {
  std::vector<std::string> label_names;
  /// confusion[actual][predicted]
  std::vector<std::vector<std::size_t>> confusion;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  double accuracy = 0.0;
  std::vector<double> per_class_accuracy;

  static EvalReport from_predictions(std::vector<std::string> names, std::span<const ClassLabel> actual,
                                     std::span<const ClassLabel> predicted, std::size_t n_train) {
    if (actual.size() != predicted.size()) throw ShapeError("prediction count mismatch");
    EvalReport r;
    const std::size_t k = names.size();
    r.label_names = std::move(names);
    r.confusion.assign(k, std::vector<std::size_t>(k, 0));
    for (std::size_t i = 0; i < actual.size(); ++i) ++r.confusion.at(actual[i].index).at(predicted[i].index);
    r.n_train = n_train;
    r.n_test = actual.size();
    std::size_t hits = 0;
    for (std::size_t c = 0; c < k; ++c) {
      hits += r.confusion[c][c];
      const auto row = std::accumulate(r.confusion[c].begin(), r.confusion[c].end(), std::size_t{0});
      r.per_class_accuracy.push_back(row ? static_cast<double>(r.confusion[c][c]) / static_cast<double>(row) : 0.0);
    }
    r.accuracy = r.n_test ? static_cast<double>(hits) / static_cast<double>(r.n_test) : 0.0;
    return r;
  }

  nlohmann::json to_json() const {
    return {{"accuracy", accuracy},
            {"per_class_accuracy", per_class_accuracy},
            {"label_names", label_names},
            {"confusion_matrix", confusion},
            {"n_train", n_train},
            {"n_test", n_test}};
  }

  /// Rows are actual classes, columns predicted; accuracies in percent.
  std::string table() const {
    std::ostringstream out;
    std::size_t name_w = 6;
    for (const auto& n : label_names) name_w = std::max(name_w, n.size());
    out << std::left << std::setw(static_cast<int>(name_w)) << "actual" << std::right;
    for (std::size_t c = 0; c < label_names.size(); ++c) out << std::setw(6) << c;
    out << std::setw(9) << "acc %" << '\n';
    for (std::size_t r = 0; r < confusion.size(); ++r) {
      out << std::left << std::setw(static_cast<int>(name_w)) << label_names[r] << std::right;
      for (auto v : confusion[r]) out << std::setw(6) << v;
      out << std::setw(9) << std::fixed << std::setprecision(2) << 100.0 * per_class_accuracy[r] << '\n';
    }
    out << "accuracy: " << std::fixed << std::setprecision(2) << 100.0 * accuracy << " % (" << n_test
        << " test, " << n_train << " train)\n";
    return out.str();
  }

  std::string confusion_csv() const {
    std::ostringstream out;
    out << "actual\\predicted";
    for (const auto& n : label_names) out << ',' << n;
    out << '\n';
    for (std::size_t r = 0; r < confusion.size(); ++r) {
      out << label_names[r];
      for (auto v : confusion[r]) out << ',' << v;
      out << '\n';
    }
    return out.str();
  }
};

}  // namespace sigimg
