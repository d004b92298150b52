#pragma once

// End-to-end glue: manifest entry -> reduced/fused matrix -> image ->
// features -> evaluation, plus the image-folder dataset export.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sigimg/augment.hpp"
#include "sigimg/classify.hpp"
#include "sigimg/error.hpp"
#include "sigimg/ingest.hpp"
#include "sigimg/parallel.hpp"
#include "sigimg/png_io.hpp"
#include "sigimg/reduce_fuse.hpp"
#include "sigimg/render.hpp"
#include "sigimg/signal.hpp"

namespace sigimg {

enum class ClassifierKind { knn, nearest_centroid };

struct ClassifierConfig {
  ClassifierKind kind = ClassifierKind::knn;
  std::size_t k = 3;
  std::size_t feature_side = 32;
};

struct PipelineConfig {
  ReductionConfig reduction;
  FusePolicy fuse_policy = FusePolicy::interpolate_to_max;
  EncodingConfig encoding;
  AugmentSpec augment;
  ClassifierConfig classifier;
  std::size_t threads = 1;
};

// ---- JSON ----------------------------------------------------------------

inline const char* to_string(TauBasis b) { return b == TauBasis::max_sigma ? "max_sigma" : "max_abs_value"; }
inline const char* to_string(FusePolicy p) {
  return p == FusePolicy::interpolate_to_max ? "interpolate_to_max" : "subsample_to_min";
}
inline const char* to_string(ClassifierKind k) { return k == ClassifierKind::knn ? "knn" : "centroid"; }

inline TauBasis tau_basis_from_string(const std::string& s) {
  if (s == "max_sigma") return TauBasis::max_sigma;
  if (s == "max_abs_value") return TauBasis::max_abs_value;
  throw Error("unknown tau basis '" + s + "' (expected max_sigma or max_abs_value)");
}
inline FusePolicy fuse_policy_from_string(const std::string& s) {
  if (s == "interpolate_to_max") return FusePolicy::interpolate_to_max;
  if (s == "subsample_to_min") return FusePolicy::subsample_to_min;
  throw Error("unknown fuse policy '" + s + "' (expected interpolate_to_max or subsample_to_min)");
}
inline ClassifierKind classifier_from_string(const std::string& s) {
  if (s == "knn") return ClassifierKind::knn;
  if (s == "centroid") return ClassifierKind::nearest_centroid;
  throw Error("unknown classifier '" + s + "' (expected knn or centroid)");
}

inline nlohmann::json to_json(const PipelineConfig& c) {
  using nlohmann::json;
  const auto& e = c.encoding;
  json range = "per_sequence";
  if (const auto* f = std::get_if<FixedRange>(&e.range_mode)) range = {{"min", f->min}, {"max", f->max}};
  json reduction{{"enabled", c.reduction.enabled},
                 {"tau_ratio", c.reduction.tau_ratio},
                 {"tau_basis", to_string(c.reduction.tau_basis)}};
  if (c.reduction.fixed_tau) reduction["fixed_tau"] = *c.reduction.fixed_tau;
  return {{"encoding",
           {{"height", e.height},
            {"width", e.width},
            {"line_width", e.line_width},
            {"background", {e.background.r, e.background.g, e.background.b}},
            {"saturation", e.saturation},
            {"value", e.value},
            {"range", range},
            {"gradient", e.gradient}}},
          {"reduction", reduction},
          {"fuse_policy", to_string(c.fuse_policy)},
          {"augment", c.augment},
          {"classifier",
           {{"kind", to_string(c.classifier.kind)}, {"k", c.classifier.k}, {"feature_side", c.classifier.feature_side}}},
          {"threads", c.threads}};
}

/// Overlays the fields present in `j` onto `c`; absent fields keep their value.
inline void merge_json(PipelineConfig& c, const nlohmann::json& j) {
  if (!j.is_object()) throw Error("config must be a JSON object");
  try {
    if (j.contains("encoding")) {
      const auto& e = j["encoding"];
      auto& out = c.encoding;
      out.height = e.value("height", out.height);
      out.width = e.value("width", out.width);
      out.line_width = e.value("line_width", out.line_width);
      if (e.contains("background")) {
        const auto& b = e["background"];
        if (!b.is_array() || b.size() != 3) throw Error("encoding.background must be [r, g, b]");
        out.background = {b[0].get<std::uint8_t>(), b[1].get<std::uint8_t>(), b[2].get<std::uint8_t>()};
      }
      out.saturation = e.value("saturation", out.saturation);
      out.value = e.value("value", out.value);
      out.gradient = e.value("gradient", out.gradient);
      if (e.contains("range")) {
        const auto& r = e["range"];
        if (r.is_string() && r.get<std::string>() == "per_sequence") out.range_mode = PerSequenceRange{};
        else if (r.is_object()) out.range_mode = FixedRange{r.at("min").get<double>(), r.at("max").get<double>()};
        else throw Error("encoding.range must be \"per_sequence\" or {\"min\", \"max\"}");
      }
    }
    if (j.contains("reduction")) {
      const auto& r = j["reduction"];
      c.reduction.enabled = r.value("enabled", c.reduction.enabled);
      c.reduction.tau_ratio = r.value("tau_ratio", c.reduction.tau_ratio);
      if (r.contains("tau_basis")) c.reduction.tau_basis = tau_basis_from_string(r["tau_basis"].get<std::string>());
      if (r.contains("fixed_tau")) c.reduction.fixed_tau = r["fixed_tau"].get<double>();
    }
    if (j.contains("fuse_policy")) c.fuse_policy = fuse_policy_from_string(j["fuse_policy"].get<std::string>());
    if (j.contains("augment")) from_json(j["augment"], c.augment);
    if (j.contains("classifier")) {
      const auto& k = j["classifier"];
      if (k.contains("kind")) c.classifier.kind = classifier_from_string(k["kind"].get<std::string>());
      c.classifier.k = k.value("k", c.classifier.k);
      c.classifier.feature_side = k.value("feature_side", c.classifier.feature_side);
    }
    c.threads = j.value("threads", c.threads);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("invalid config: ") + e.what());
  }
}

// ---- encoding --------------------------------------------------------------

/// Reduces each source separately, then fuses (a single source is only reduced).
inline SignalMatrix prepare_matrix(const std::vector<SignalMatrix>& sources, const PipelineConfig& config) {
  if (sources.size() == 1) return reduce(sources.front(), config.reduction);
  return reduce_then_fuse(sources, config.reduction, config.fuse_policy);
}

inline EncodedImage encode_sources(const std::vector<SignalMatrix>& sources, const PipelineConfig& config) {
  return encode_image(prepare_matrix(sources, config), config.encoding);
}

inline std::vector<SignalMatrix> load_entry(const ManifestEntry& entry) {
  std::vector<SignalMatrix> out;
  for (const auto& p : entry.paths) {
    auto m = load_sequence_csv(p);
    try {
      entry.sensor.check(m.n_signals());
    } catch (const ShapeError& e) {
      throw ShapeError(p.string() + ": " + e.what());
    }
    out.push_back(std::move(m));
  }
  return out;
}

/// Loads every entry's sources (in parallel); result is in entry order.
inline std::vector<std::vector<SignalMatrix>> load_all(const DatasetManifest& manifest, std::size_t threads) {
  std::vector<std::vector<SignalMatrix>> out(manifest.entries.size());
  parallel_for(out.size(), threads, [&](std::size_t i) { out[i] = load_entry(manifest.entries[i]); });
  return out;
}

// ---- evaluation ------------------------------------------------------------

/// Trains on the train split (plus augmented variants when
/// augment.count_per_image > 0) and reports on the untouched test split.
inline EvalReport evaluate_loaded(const DatasetManifest& manifest,
                                  const std::vector<std::vector<SignalMatrix>>& sources,
                                  const PipelineConfig& config) {
  if (sources.size() != manifest.entries.size()) throw ShapeError("sources do not match manifest entries");
  if (manifest.count(Split::train) == 0) throw Error("evaluation needs at least one train entry");
  if (manifest.count(Split::test) == 0) throw Error("evaluation needs at least one test entry");
  config.augment.validate();
  const std::size_t n = manifest.entries.size();
  const std::size_t side = config.classifier.feature_side;
  const std::size_t aug = config.augment.count_per_image;

  // Slot i holds entry i's features followed by its augmented variants (train only).
  std::vector<std::vector<FeatureVector>> features(n);
  parallel_for(n, config.threads, [&](std::size_t i) {
    const auto image = encode_sources(sources[i], config);
    features[i].push_back(featurize(image, side));
    if (manifest.entries[i].split == Split::train) {
      for (std::size_t v = 0; v < aug; ++v) {
        const auto params = draw_augment_params(config.augment, image.height(), image.width(), i, v);
        features[i].push_back(featurize(apply_augment(image, params, config.encoding.background), side));
      }
    }
  });

  std::vector<LabeledFeature> train;
  std::vector<FeatureVector> queries;
  std::vector<ClassLabel> actual;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& e = manifest.entries[i];
    if (e.split == Split::train) {
      for (auto& f : features[i]) train.push_back({std::move(f), e.label});
    } else {
      queries.push_back(std::move(features[i].front()));
      actual.push_back(e.label);
    }
  }

  // The predictor only ever sees query features.
  std::vector<ClassLabel> predicted(queries.size());
  if (config.classifier.kind == ClassifierKind::knn) {
    parallel_for(queries.size(), config.threads, [&](std::size_t q) {
      predicted[q] = knn_predict(train, queries[q], config.classifier.k);
    });
  } else {
    const NearestCentroid model(train, manifest.label_names.size());
    for (std::size_t q = 0; q < queries.size(); ++q) predicted[q] = model.predict(queries[q]);
  }
  return EvalReport::from_predictions(manifest.label_names, actual, predicted, train.size());
}

inline EvalReport evaluate(const DatasetManifest& manifest, const PipelineConfig& config) {
  return evaluate_loaded(manifest, load_all(manifest, config.threads), config);
}

// ---- image-folder export ---------------------------------------------------

/// Writes <out>/<split>/<class>/<id>.png (and <id>.augN.png for train entries
/// when augmentation is on) plus <out>/inventory.json. Returns the inventory.
inline nlohmann::json build_dataset(const DatasetManifest& manifest,
                                    const std::vector<std::vector<SignalMatrix>>& sources,
                                    const PipelineConfig& config, const fs::path& out_dir) {
  using nlohmann::json;
  if (sources.size() != manifest.entries.size()) throw ShapeError("sources do not match manifest entries");
  config.augment.validate();
  const std::size_t n = manifest.entries.size();
  std::vector<json> records(n);
  parallel_for(n, config.threads, [&](std::size_t i) {
    const auto& e = manifest.entries[i];
    const fs::path dir = fs::path(to_string(e.split)) / manifest.label_names.at(e.label.index);
    const auto image = encode_sources(sources[i], config);
    json files = json::array();
    auto emit = [&](const EncodedImage& img, const std::string& name, json augmentation) {
      const fs::path rel = dir / name;
      write_png(img, out_dir / rel);
      files.push_back({{"path", rel.generic_string()},
                       {"split", to_string(e.split)},
                       {"label", manifest.label_names[e.label.index]},
                       {"sequence_id", e.sequence_id},
                       {"source", e.relative_paths},
                       {"augmentation", std::move(augmentation)}});
    };
    emit(image, e.sequence_id + ".png", nullptr);
    if (e.split == Split::train) {
      for (std::size_t v = 0; v < config.augment.count_per_image; ++v) {
        const auto params = draw_augment_params(config.augment, image.height(), image.width(), i, v);
        emit(apply_augment(image, params, config.encoding.background),
             e.sequence_id + ".aug" + std::to_string(v) + ".png", params);
      }
    }
    records[i] = std::move(files);
  });

  json files = json::array();
  for (auto& r : records)
    for (auto& f : r) files.push_back(std::move(f));
  json inventory{{"label_names", manifest.label_names}, {"config", to_json(config)}, {"files", std::move(files)}};
  detail::write_file_atomic(out_dir / "inventory.json", inventory.dump(2) + "\n");
  return inventory;
}

}  // namespace sigimg
