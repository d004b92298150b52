#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "sigimg/pipeline.hpp"
#include "sigimg/synth.hpp"

using namespace sigimg;

TEST(Synth, Deterministic) {
  const SynthSpec spec{.sequences_per_class = 5, .seed = 17};
  const auto a = generate(spec), b = generate(spec);
  ASSERT_EQ(a.records.size(), 30u);
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].matrix, b.records[i].matrix);
    EXPECT_EQ(a.records[i].sequence_id, b.records[i].sequence_id);
  }
  EXPECT_EQ(manifest_to_json(a.manifest), manifest_to_json(b.manifest));
  auto other = spec;
  other.seed = 18;
  EXPECT_NE(generate(other).records[0].matrix, a.records[0].matrix);
}

TEST(Synth, CleanSinusoidsHaveRmsStd) {
  const SynthSpec spec{.n_classes = 3, .sequences_per_class = 2, .n_signals = 5, .length = 90, .noise_sigma = 0,
                       .active_fraction = 1, .seed = 3};
  for (const auto& r : generate(spec).records)
    for (const auto& row : r.matrix.rows()) {
      const double s = oracle::two_pass_std(row);
      EXPECT_NEAR(s / std::sqrt(0.5), 1.0, 2.0 / 90.0);
    }
}

TEST(Synth, ReductionZeroesNoiseOnlySignals) {
  const SynthSpec spec{.n_classes = 2, .seed = 5};
  const std::size_t active = spec.active_signals();
  ASSERT_EQ(active, 6u);
  for (const auto& r : generate(spec).records) {
    const auto reduced = reduce(r.matrix, {});
    for (std::size_t j = 0; j < reduced.n_signals(); ++j) {
      const auto row = reduced.row(j);
      const bool zero = std::all_of(row.begin(), row.end(), [](double v) { return v == 0.0; });
      EXPECT_EQ(zero, j >= active) << r.sequence_id << " signal " << j;
    }
  }
}

TEST(Synth, StratifiedSplit) {
  for (std::size_t per_class : {1u, 5u, 7u, 40u}) {
    const SynthSpec spec{.n_classes = 3, .sequences_per_class = per_class};
    const auto ds = generate(spec);
    const auto expect_train = static_cast<std::size_t>(std::ceil(0.8 * static_cast<double>(per_class)));
    for (std::size_t y = 0; y < 3; ++y) {
      std::size_t train = 0, test = 0;
      for (const auto& e : ds.manifest.entries)
        if (e.label.index == y) (e.split == Split::train ? train : test)++;
      EXPECT_EQ(train, expect_train);
      EXPECT_EQ(test, per_class - expect_train);
    }
  }
}

TEST(Synth, ClassesSeparateAfterEncoding) {
  const SynthSpec spec{.sequences_per_class = 10, .seed = 11};
  const auto ds = generate(spec);
  PipelineConfig cfg;
  std::vector<FeatureVector> f;
  for (const auto& r : ds.records) f.push_back(featurize(encode_sources({r.matrix}, cfg)));
  double intra = 0, inter = 0;
  std::size_t n_intra = 0, n_inter = 0;
  for (std::size_t i = 0; i < f.size(); ++i)
    for (std::size_t j = i + 1; j < f.size(); ++j) {
      const double d = euclidean(f[i], f[j]);
      if (ds.records[i].label == ds.records[j].label) intra += d, ++n_intra;
      else inter += d, ++n_inter;
    }
  EXPECT_GT(inter / static_cast<double>(n_inter), intra / static_cast<double>(n_intra));
}

TEST(Synth, WrittenDatasetLoadsBack) {
  const SynthSpec spec{.n_classes = 2, .sequences_per_class = 3, .length = 10, .seed = 1};
  const auto ds = generate(spec);
  const auto root = fs::temp_directory_path() / "sigimg_synth_test";
  fs::remove_all(root);
  write_dataset(ds, root);
  const auto manifest = load_manifest(root / "manifest.json");
  ASSERT_EQ(manifest.entries.size(), 6u);
  const auto loaded = load_all(manifest, 2);
  for (std::size_t i = 0; i < loaded.size(); ++i) EXPECT_EQ(loaded[i].front(), ds.records[i].matrix);
}

TEST(Synth, Validation) {
  EXPECT_THROW(generate({.n_classes = 1}), Error);
  EXPECT_THROW(generate({.length = 1}), Error);
  EXPECT_THROW(generate({.n_signals = 0}), Error);
  EXPECT_THROW(generate({.active_fraction = 0}), Error);
  EXPECT_THROW(generate({.noise_sigma = -1}), Error);
}
