#pragma once

// sigimg command line: synth, encode, dataset, augment, eval.
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sigimg.hpp"

namespace sigimg::cli {

class UsageError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline std::vector<double> parse_list(const std::string& text, std::size_t count, const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(flag + ": '" + text + "' is not a comma-separated list of numbers");
    }
  }
  if (out.size() != count)
    throw UsageError(flag + ": expected " + std::to_string(count) + " comma-separated values, got '" + text + "'");
  return out;
}

/// Flags shared by the subcommands that run the pipeline. Every flag is
/// optional so that only flags actually given override the config file.
struct PipelineFlags {
  std::optional<std::string> config_file;
  std::optional<std::size_t> height, width, line_width, threads;
  std::optional<std::string> background, range;
  std::optional<double> saturation, value;
  bool no_gradient = false;
  bool reduce_on = false, reduce_off = false;
  std::optional<double> tau_ratio, tau;
  std::optional<std::string> tau_basis, fuse_policy;
  std::optional<std::size_t> augment_count;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> stretch_range, rotation_range;
  std::optional<double> perspective_jitter;
  std::optional<std::string> classifier;
  std::optional<std::size_t> k, feature_side;

  void add_encoding(CLI::App& app) {
    app.add_option("--config", config_file, "JSON pipeline config; flags override it")->check(CLI::ExistingFile);
    app.add_option("--height", height, "image height H (default 256)");
    app.add_option("--width", width, "image width W (default 256)");
    app.add_option("--line-width", line_width, "polyline width in pixels (default 1)");
    app.add_option("--background", background, "background colour r,g,b (default 0,0,0)");
    app.add_option("--saturation", saturation, "palette saturation in [0,1] (default 1)");
    app.add_option("--value", value, "palette value in [0,1] (default 1)");
    app.add_option("--range", range, "value range: per_sequence or min,max");
    app.add_flag("--no-gradient", no_gradient, "draw flat palette colours without the white-to-colour ramp");
    app.add_flag("--reduce", reduce_on, "enable signal reduction (default)");
    app.add_flag("--no-reduce", reduce_off, "disable signal reduction");
    app.add_option("--tau-ratio", tau_ratio, "reduction threshold ratio in [0,1] (default 0.2)");
    app.add_option("--tau-basis", tau_basis, "max_sigma (default) or max_abs_value");
    app.add_option("--tau", tau, "fixed dataset-wide threshold, replaces the per-sequence tau");
    app.add_option("--fuse-policy", fuse_policy, "interpolate_to_max (default) or subsample_to_min");
    app.add_option("--threads", threads, "worker threads (default 1)");
  }

  void add_augment(CLI::App& app, bool with_count = true) {
    if (with_count) app.add_option("--augment-count", augment_count, "augmented variants per train image (default 0)");
    app.add_option("--seed", seed, "augmentation seed");
    app.add_option("--stretch-range", stretch_range, "width stretch factor range lo,hi (default 0.8,1.2)");
    app.add_option("--rotation-range", rotation_range, "rotation range in degrees lo,hi (default -10,10)");
    app.add_option("--perspective-jitter", perspective_jitter, "max corner displacement / min(H,W) (default 0.05)");
  }

  void add_classifier(CLI::App& app) {
    app.add_option("--classifier", classifier, "knn (default) or centroid");
    app.add_option("--k", k, "neighbours for knn, positive odd (default 3)");
    app.add_option("--feature-side", feature_side, "feature grid side (default 32)");
  }

  /// Defaults, then the config file, then explicit flags. Invalid values are
  /// usage errors; unreadable files are runtime errors.
  PipelineConfig resolve() const {
    try {
      return merge();
    } catch (const IoError&) {
      throw;
    } catch (const UsageError&) {
      throw;
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
  }

 private:
  PipelineConfig merge() const {
    PipelineConfig c;
    if (config_file) {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(sigimg::detail::read_file(*config_file));
      } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(*config_file, 0, e.what());
      }
      merge_json(c, j);
    }
    auto& e = c.encoding;
    if (height) e.height = *height;
    if (width) e.width = *width;
    if (line_width) e.line_width = *line_width;
    if (background) {
      const auto v = parse_list(*background, 3, "--background");
      for (double x : v)
        if (!(x >= 0 && x <= 255)) throw UsageError("--background channels must lie in [0, 255]");
      e.background = {static_cast<std::uint8_t>(v[0]), static_cast<std::uint8_t>(v[1]), static_cast<std::uint8_t>(v[2])};
    }
    if (saturation) e.saturation = *saturation;
    if (value) e.value = *value;
    if (range) {
      if (*range == "per_sequence") e.range_mode = PerSequenceRange{};
      else {
        const auto v = parse_list(*range, 2, "--range");
        e.range_mode = FixedRange{v[0], v[1]};
      }
    }
    if (no_gradient) e.gradient = false;
    if (reduce_on && reduce_off) throw UsageError("--reduce and --no-reduce are mutually exclusive");
    if (reduce_on) c.reduction.enabled = true;
    if (reduce_off) c.reduction.enabled = false;
    if (tau_ratio) c.reduction.tau_ratio = *tau_ratio;
    if (tau_basis) c.reduction.tau_basis = tau_basis_from_string(*tau_basis);
    if (tau) c.reduction.fixed_tau = *tau;
    if (fuse_policy) c.fuse_policy = fuse_policy_from_string(*fuse_policy);
    if (threads) c.threads = *threads;
    if (augment_count) c.augment.count_per_image = *augment_count;
    if (seed) c.augment.seed = *seed;
    if (stretch_range) {
      const auto v = parse_list(*stretch_range, 2, "--stretch-range");
      c.augment.width_stretch_range = {v[0], v[1]};
    }
    if (rotation_range) {
      const auto v = parse_list(*rotation_range, 2, "--rotation-range");
      c.augment.rotation_range_deg = {v[0], v[1]};
    }
    if (perspective_jitter) c.augment.perspective_jitter = *perspective_jitter;
    if (classifier) c.classifier.kind = classifier_from_string(*classifier);
    if (k) c.classifier.k = *k;
    if (feature_side) c.classifier.feature_side = *feature_side;
    c.encoding.validate();
    c.reduction.validate();
    c.augment.validate();
    if (c.threads == 0) throw UsageError("--threads must be positive");
    return c;
  }
};

}  // namespace detail

/// Runs one command line (args excludes the program name).
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Encode multivariate sensor sequences as RGB images", "sigimg"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "sigimg 0.1.0");

  // synth
  SynthSpec synth_spec;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "generate a synthetic labelled dataset");
  synth->add_option("--out", synth_out, "output dataset directory")->required();
  synth->add_option("--seed", synth_spec.seed, "generator seed (default 0)");
  synth->add_option("--classes", synth_spec.n_classes, "number of classes (default 6)");
  synth->add_option("--per-class", synth_spec.sequences_per_class, "sequences per class (default 40)");
  synth->add_option("--signals", synth_spec.n_signals, "signals per sequence (default 12)");
  synth->add_option("--length", synth_spec.length, "samples per sequence (default 120)");
  synth->add_option("--noise", synth_spec.noise_sigma, "noise standard deviation (default 0.05)");
  synth->add_option("--active-fraction", synth_spec.active_fraction, "fraction of class-carrying signals (default 0.5)");

  // encode
  detail::PipelineFlags encode_flags;
  std::vector<std::string> encode_inputs;
  std::string encode_out;
  auto* encode = app.add_subcommand("encode", "encode sequence CSV(s) into one PNG; several inputs are fused");
  encode->add_option("inputs", encode_inputs, "sequence CSV files")->required();
  encode->add_option("--out", encode_out, "output PNG path")->required();
  encode_flags.add_encoding(*encode);

  // dataset
  detail::PipelineFlags dataset_flags;
  std::string dataset_manifest, dataset_out;
  auto* dataset = app.add_subcommand("dataset", "export a manifest as an image-folder dataset");
  dataset->add_option("manifest", dataset_manifest, "dataset manifest JSON")->required();
  dataset->add_option("--out", dataset_out, "output directory")->required();
  dataset_flags.add_encoding(*dataset);
  dataset_flags.add_augment(*dataset);

  // augment
  detail::PipelineFlags augment_flags;
  std::string augment_input, augment_out;
  std::size_t augment_count = 4;
  std::size_t augment_index = 0;
  auto* augment = app.add_subcommand("augment", "write augmented variants of one PNG");
  augment->add_option("input", augment_input, "input PNG")->required();
  augment->add_option("--out-dir", augment_out, "output directory")->required();
  augment->add_option("--count", augment_count, "number of variants (default 4)");
  augment->add_option("--index", augment_index, "image index used to key the generator (default 0)");
  augment->add_option("--background", augment_flags.background, "fill colour r,g,b (default 0,0,0)");
  augment->add_option("--config", augment_flags.config_file, "JSON pipeline config; flags override it")
      ->check(CLI::ExistingFile);
  augment_flags.add_augment(*augment, false);

  // eval
  detail::PipelineFlags eval_flags;
  std::string eval_manifest;
  bool eval_table = false;
  std::optional<std::string> eval_confusion;
  auto* eval = app.add_subcommand("eval", "train and evaluate the reference classifier, print a JSON report");
  eval->add_option("manifest", eval_manifest, "dataset manifest JSON")->required();
  eval->add_flag("--table", eval_table, "print a human-readable table instead of JSON");
  eval->add_option("--confusion-csv", eval_confusion, "also write the confusion matrix as CSV");
  eval_flags.add_encoding(*eval);
  eval_flags.add_augment(*eval);
  eval_flags.add_classifier(*eval);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << app.version() << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\nrun with --help for usage\n";
    return 2;
  }

  try {
    if (*synth) {
      write_dataset(generate(synth_spec), synth_out);
      out << "wrote " << synth_spec.n_classes * synth_spec.sequences_per_class << " sequences to " << synth_out << '\n';
    } else if (*encode) {
      const auto config = encode_flags.resolve();
      std::vector<SignalMatrix> sources;
      for (const auto& p : encode_inputs) sources.push_back(load_sequence_csv(p));
      write_png(encode_sources(sources, config), encode_out);
    } else if (*dataset) {
      const auto config = dataset_flags.resolve();
      const auto manifest = load_manifest(dataset_manifest);
      const auto inventory = build_dataset(manifest, load_all(manifest, config.threads), config, dataset_out);
      out << "wrote " << inventory["files"].size() << " images to " << dataset_out << '\n';
    } else if (*augment) {
      auto config = augment_flags.resolve();
      config.augment.count_per_image = augment_count;
      const auto image = read_png(augment_input);
      const auto stem = fs::path(augment_input).stem().string();
      nlohmann::json listing = nlohmann::json::array();
      for (std::size_t v = 0; v < augment_count; ++v) {
        const auto params = draw_augment_params(config.augment, image.height(), image.width(), augment_index, v);
        const auto name = stem + ".aug" + std::to_string(v) + ".png";
        write_png(apply_augment(image, params, config.encoding.background), fs::path(augment_out) / name);
        listing.push_back({{"path", name}, {"source", augment_input}, {"augmentation", params}});
      }
      sigimg::detail::write_file_atomic(fs::path(augment_out) / "augment.json", listing.dump(2) + "\n");
      out << "wrote " << augment_count << " images to " << augment_out << '\n';
    } else if (*eval) {
      const auto config = eval_flags.resolve();
      const auto report = evaluate(load_manifest(eval_manifest), config);
      if (eval_confusion) sigimg::detail::write_file_atomic(*eval_confusion, report.confusion_csv());
      if (eval_table) out << report.table();
      else out << report.to_json().dump(2) << '\n';
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace sigimg::cli
