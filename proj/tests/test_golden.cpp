#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>

#include "sigimg/pipeline.hpp"

using namespace sigimg;

namespace {

const fs::path fixtures = SIGIMG_FIXTURE_DIR;

struct GoldenCase {
  const char* csv;
  const char* png;
};

constexpr GoldenCase cases[] = {
    {"skeleton_zero_25x3.csv", "skeleton_zero_25x3.png"},
    {"csi_ramp_52.csv", "csi_ramp_52.png"},
    {"imu_6axis.csv", "imu_6axis.png"},
};

std::vector<std::uint8_t> bytes_of(const fs::path& p) {
  const auto s = sigimg::detail::read_file(p);
  return {s.begin(), s.end()};
}

}  // namespace

// Default pipeline (reduction on, 256x256) against PNGs stored in the repo.
// Set SIGIMG_REGENERATE_GOLDENS=1 to rewrite them after an intended change.
TEST(Golden, FixturesEncodeToStoredPngs) {
  const bool regenerate = std::getenv("SIGIMG_REGENERATE_GOLDENS") != nullptr;
  for (const auto& c : cases) {
    const auto image = encode_sources({load_sequence_csv(fixtures / c.csv)}, PipelineConfig{});
    const auto png = encode_png(image);
    const auto golden = fixtures / "golden" / c.png;
    if (regenerate) write_png(image, golden);
    ASSERT_TRUE(fs::exists(golden)) << golden;
    EXPECT_EQ(png, bytes_of(golden)) << c.png;
    EXPECT_EQ(read_png(golden), image) << c.png;
    EXPECT_EQ(encode_png(encode_sources({load_sequence_csv(fixtures / c.csv)}, PipelineConfig{})), png);
  }
}

TEST(Golden, ZeroSkeletonIsCentredLine) {
  const auto m = load_sequence_csv(fixtures / "skeleton_zero_25x3.csv");
  ASSERT_EQ(m.n_signals(), 75u);
  ASSERT_EQ(m.length(), 100u);
  const auto image = encode_sources({m}, PipelineConfig{});
  const Rgb last = sample_palette(75).colors.back();
  for (std::size_t r = 0; r < 256; ++r)
    for (std::size_t c = 0; c < 256; ++c) {
      if (r == 127) EXPECT_NE(image.at(r, c), Rgb{});
      else ASSERT_EQ(image.at(r, c), Rgb{}) << r << "," << c;
    }
  EXPECT_EQ(image.at(127, 0), (Rgb{255, 255, 255}));
  EXPECT_EQ(image.at(127, 255), last);
}

TEST(Golden, CsiRampGradientEndpoints) {
  const auto m = load_sequence_csv(fixtures / "csi_ramp_52.csv");
  ASSERT_EQ(m.n_signals(), 52u);
  PipelineConfig cfg;
  cfg.reduction.enabled = false;
  const auto image = encode_sources({m}, cfg);
  // The steepest band ends at the top-right corner; every band starts at the bottom-left.
  EXPECT_EQ(image.at(0, 255), sample_palette(52).colors[51]);
  EXPECT_EQ(image.at(255, 0), (Rgb{255, 255, 255}));
}
