// Acceptance checks, one per criterion. Prints one PASS/FAIL line each.
//   acceptance              run all
//   acceptance --criterion N

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "oracles.hpp"
#include "sigimg.hpp"

using namespace sigimg;

namespace {

const fs::path fixtures = SIGIMG_FIXTURE_DIR;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) detail << "failed: ";
      else detail << "; ";
      detail << what;
      pass = false;
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

SignalMatrix matrix_of(const std::vector<std::vector<double>>& rows, const std::string& prefix = "s") {
  return SignalMatrix(oracle::names(rows.size(), prefix), rows);
}

bool rows_equal(const SignalMatrix& m, const std::vector<std::vector<double>>& rows) {
  if (m.n_signals() != rows.size()) return false;
  for (std::size_t j = 0; j < rows.size(); ++j)
    if (!std::ranges::equal(m.row(j), rows[j])) return false;
  return true;
}

bool all_zero(std::span<const double> row) {
  return std::ranges::all_of(row, [](double v) { return v == 0.0; });
}

// 1: reduction against the brute-force oracle
void reduction_oracle(Outcome& o) {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20240101);
  std::uniform_int_distribution<std::size_t> n_dist(1, 50), m_dist(1, 200);
  std::uniform_real_distribution<double> ratio_dist(0.0, 1.0);
  double worst_rel = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto rows = oracle::random_rows(rng, n_dist(rng), m_dist(rng));
    const double ratio = ratio_dist(rng);
    const auto m = matrix_of(rows);
    std::vector<int> mask;
    const auto expected = oracle::reduce(rows, ratio, &mask);
    const ReductionConfig cfg{.tau_ratio = ratio};
    const auto c = contribution_vector(m, compute_tau(m, cfg));
    if (!std::ranges::equal(c.c, mask, [](unsigned char a, int b) { return a == b; })) {
      o.require(false, "mask mismatch in trial " + std::to_string(trial));
      return;
    }
    if (!rows_equal(apply_reduction(m, c), expected)) {
      o.require(false, "reduced matrix mismatch in trial " + std::to_string(trial));
      return;
    }
    for (std::size_t j = 0; j < rows.size(); ++j) {
      const double want = oracle::two_pass_std(rows[j]);
      const double got = population_std(m.row(j));
      const double rel = want == 0 ? std::abs(got) : std::abs(got - want) / want;
      worst_rel = std::max(worst_rel, rel);
    }
  }
  const double elapsed = seconds_since(start);
  o.require(worst_rel <= 1e-10, "sigma relative error " + std::to_string(worst_rel));
  o.require(elapsed < 5.0, "runtime " + std::to_string(elapsed) + " s");
  o.detail << (o.pass ? "" : " | ") << "200 matrices, worst sigma rel err " << worst_rel << ", " << elapsed << " s";
}

// 2: constant signals zeroed, mask invariant under positive scaling
void reduction_semantics(Outcome& o) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ratio_dist(1e-6, 1.0), scale_dist(1e-3, 1e3);
  for (int trial = 0; trial < 100; ++trial) {
    auto rows = oracle::random_rows(rng, 2 + trial % 20, 2 + trial * 3 % 150);
    const std::size_t constant = static_cast<std::size_t>(trial) % rows.size();
    std::ranges::fill(rows[constant], static_cast<double>(trial) - 50.0);
    const ReductionConfig cfg{.tau_ratio = ratio_dist(rng)};
    const auto m = matrix_of(rows);
    const auto reduced = reduce(m, cfg);
    o.require(all_zero(reduced.row(constant)), "constant signal kept in trial " + std::to_string(trial));

    const double k = scale_dist(rng);
    auto scaled_rows = rows;
    for (auto& r : scaled_rows)
      for (auto& v : r) v *= k;
    const auto scaled = matrix_of(scaled_rows);
    o.require(contribution_vector(m, compute_tau(m, cfg)).c == contribution_vector(scaled, compute_tau(scaled, cfg)).c,
              "mask changed under scaling by " + std::to_string(k));
    if (!o.pass) return;
  }
  // All-constant matrix: every row zeroed for any positive fixed tau.
  const auto flat = matrix_of({{3, 3, 3}, {-1, -1, -1}});
  o.require(all_zero(reduce(flat, {.fixed_tau = 1e-12}).row(0)), "all-constant matrix with fixed tau");
  o.detail << (o.pass ? "" : " | ") << "100 random matrices with a constant row, scale factors in [1e-3, 1e3]";
}

// 3: fusion shape, order, resampling, reduce-before-fuse
void fusion_contract(Outcome& o) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> n_dist(1, 8), m_dist(1, 90);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t k = 1 + static_cast<std::size_t>(trial) % 4;
    std::vector<std::vector<std::vector<double>>> parts;
    std::vector<SignalMatrix> sources;
    std::size_t total = 0, longest = 0, shortest = SIZE_MAX;
    for (std::size_t s = 0; s < k; ++s) {
      parts.push_back(oracle::random_rows(rng, n_dist(rng), m_dist(rng)));
      sources.push_back(matrix_of(parts.back()));
      total += parts.back().size();
      longest = std::max(longest, parts.back().front().size());
      shortest = std::min(shortest, parts.back().front().size());
    }
    for (auto policy : {FusePolicy::interpolate_to_max, FusePolicy::subsample_to_min}) {
      const std::size_t target = policy == FusePolicy::interpolate_to_max ? longest : shortest;
      const auto fused = fuse(sources, policy);
      o.require(fused.n_signals() == total && fused.length() == target, "fused shape");
      std::size_t j = 0;
      for (std::size_t s = 0; s < k; ++s)
        for (std::size_t r = 0; r < parts[s].size(); ++r, ++j) {
          o.require(fused.name(j) == std::to_string(s) + "/s" + std::to_string(r), "fused name order");
          const auto want = oracle::resample(parts[s][r], target);
          const auto got = fused.row(j);
          for (std::size_t t = 0; t < target; ++t)
            if (std::abs(got[t] - want[t]) > 1e-12 * (1 + std::abs(want[t]))) {
              o.require(false, "resampled row differs from oracle");
              return;
            }
        }
      if (!o.pass) return;
    }
  }

  const std::size_t m = 64;
  std::vector<std::vector<double>> a(3, std::vector<double>(m)), b(3, std::vector<double>(m));
  for (std::size_t t = 0; t < m; ++t) {
    const double ph = 2 * std::numbers::pi * static_cast<double>(t) / static_cast<double>(m);
    for (std::size_t j = 0; j < 3; ++j) {
      a[j][t] = 0.05 + 0.05 * std::sin(ph * static_cast<double>(j + 1));
      b[j][t] = 50 + 50 * std::cos(ph * static_cast<double>(j + 1));
    }
  }
  const auto sa = matrix_of(a, "a"), sb = matrix_of(b, "b");
  const auto before = reduce_then_fuse({sa, sb}, {});
  const auto after = reduce(fuse({sa, sb}), {});
  for (std::size_t j = 0; j < 3; ++j) {
    o.require(!all_zero(before.row(j)), "small-scale sensor lost when reduced first");
    o.require(all_zero(after.row(j)), "small-scale sensor survived reduction after fusion");
  }
  o.detail << (o.pass ? "" : " | ") << "50 random fusions x 2 policies; reduce-before-fuse keeps the [0,0.1] sensor";
}

// 4: golden PNGs, gradient endpoints, centred line
void rendering_goldens(Outcome& o) {
  for (const char* name : {"skeleton_zero_25x3", "csi_ramp_52", "imu_6axis"}) {
    const auto m = load_sequence_csv(fixtures / (std::string(name) + ".csv"));
    const auto png = encode_png(encode_sources({m}, {}));
    const auto golden = sigimg::detail::read_file(fixtures / "golden" / (std::string(name) + ".png"));
    o.require(std::string(png.begin(), png.end()) == golden, std::string(name) + " differs from golden");
    const auto again = encode_png(encode_sources({m}, {}));
    o.require(again == png, std::string(name) + " not deterministic");
  }

  // Gradient endpoints, via the draw observer.
  std::mt19937_64 rng(11);
  const auto rows = oracle::random_rows(rng, 7, 50);
  const auto palette = sample_palette(7);
  bool endpoints_ok = true;
  encode_image(matrix_of(rows), {}, [&](const DrawEvent& e) {
    if (e.sample == 0 && !(e.color == Rgb{255, 255, 255})) endpoints_ok = false;
    if (e.sample == 49 && !(e.color == palette.colors[e.signal])) endpoints_ok = false;
  });
  o.require(endpoints_ok, "gradient endpoints");

  const auto flat = encode_image(matrix_of({{4, 4, 4, 4}, {4, 4, 4, 4}}), {.height = 64, .width = 64});
  for (std::size_t r = 0; r < 64; ++r)
    for (std::size_t c = 0; c < 64; ++c)
      if ((r == 31) != (flat.at(r, c) != Rgb{})) {
        o.require(false, "degenerate range is not a centred line");
        return;
      }
  o.detail << (o.pass ? "" : " | ") << "3 goldens byte-identical, endpoints exact, flat input on row (H-1)/2";
}

// 5: augmentation identities and determinism
void augmentation_identities(Outcome& o) {
  std::mt19937_64 rng(5);
  std::vector<EncodedImage> images;
  for (int i = 0; i < 6; ++i) {
    EncodedImage img(40 + i, 56 - i);
    for (auto& b : img.bytes()) b = static_cast<std::uint8_t>(rng());
    images.push_back(std::move(img));
  }
  for (const auto& img : images) {
    o.require(width_stretch(img, 1.0) == img, "factor-1 stretch");
    o.require(rotate(img, 0.0) == img, "0 degree rotation");
    o.require(perspective_warp(img, {Point2{0, 0}, {1, 0}, {1, 1}, {0, 1}}) == img, "identity perspective");
  }
  const AugmentSpec spec{.perspective_jitter = 0.08, .count_per_image = 3, .seed = 1234};
  const auto a = augment_batch(images, spec);
  o.require(augment_batch(images, spec) == a, "same seed differs");
  for (std::size_t threads : {2u, 3u, 4u, 8u}) o.require(augment_batch(images, spec, {}, threads) == a, "thread count changes output");
  auto other = spec;
  other.seed = 1235;
  o.require(augment_batch(images, other) != a, "seed has no effect");
  o.detail << (o.pass ? "" : " | ") << "identities byte-exact on 6 images; batch equal for 1/2/3/4/8 threads";
}

// 6: synthetic end-to-end accuracy and reduction guard
void end_to_end(Outcome& o) {
  const auto start = std::chrono::steady_clock::now();
  auto run = [](const SynthSpec& spec, bool reduction) {
    const auto ds = generate(spec);
    std::vector<std::vector<SignalMatrix>> sources;
    for (const auto& r : ds.records) sources.push_back({r.matrix});
    PipelineConfig cfg;
    cfg.reduction.enabled = reduction;
    cfg.classifier.k = 3;
    return evaluate_loaded(ds.manifest, sources, cfg).accuracy;
  };
  const SynthSpec defaults{.seed = 1};
  const double acc = run(defaults, true);
  SynthSpec noisy = defaults;
  noisy.noise_sigma = 0.3;
  const double off = run(noisy, false), on = run(noisy, true);
  const double elapsed = seconds_since(start);
  o.require(acc >= 0.95, "default accuracy " + std::to_string(acc));
  o.require(on >= off - 0.02, "reduction costs " + std::to_string(off - on));
  o.require(elapsed < 60.0, "runtime " + std::to_string(elapsed) + " s");
  o.detail << (o.pass ? "" : " | ") << "accuracy " << acc << "; noise 0.3: reduction on " << on << ", off " << off
           << "; " << elapsed << " s";
}

// 7: CSV / PNG round-trips, manifest rejections
void round_trips(Outcome& o) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int trial = 0; trial < 50; ++trial) {
    auto rows = oracle::random_rows(rng, 1 + trial % 9, 1 + trial * 7 % 60);
    for (auto& r : rows)
      for (auto& v : r)
        if (rng() % 4 == 0) v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    const auto m = matrix_of(rows);
    o.require(parse_sequence_csv(format_sequence_csv(m), "round-trip") == m, "CSV round-trip");

    EncodedImage img(1 + trial % 17, 1 + trial * 5 % 23);
    for (auto& b : img.bytes()) b = static_cast<std::uint8_t>(rng());
    o.require(decode_png(encode_png(img), "round-trip") == img, "PNG round-trip");
    if (!o.pass) return;
  }

  auto rejected = [](const std::string& text, const std::string& needle) {
    try {
      parse_manifest(nlohmann::json::parse(text), "/data", "manifest.json", [](const std::string&) {});
      return false;
    } catch (const Error& e) {
      return std::string(e.what()).find(needle) != std::string::npos;
    }
  };
  o.require(rejected(R"({"label_names": ["a"], "entries": [{"path": "x.csv", "label": "a", "split": "validation"}]})",
                     "validation"),
            "unknown split accepted or undiagnosed");
  o.require(rejected(R"({"label_names": ["a"], "entries": [
                {"path": "x.csv", "label": "a", "split": "train", "sequence_id": "1"},
                {"path": "./x.csv", "label": "a", "split": "test", "sequence_id": "2"}]})",
                     "x.csv"),
            "duplicate path accepted or undiagnosed");
  o.detail << (o.pass ? "" : " | ") << "50 CSV + 50 PNG round-trips exact; bad split and duplicate path rejected";
}

// 8: encoding throughput and scaling
void throughput(Outcome& o) {
  const auto ds = generate({.n_classes = 10, .sequences_per_class = 100, .n_signals = 12, .length = 120, .seed = 8});
  const PipelineConfig cfg;
  auto encode_all = [&](std::size_t threads, std::vector<EncodedImage>& out) {
    out.assign(ds.records.size(), EncodedImage(1, 1));
    const auto start = std::chrono::steady_clock::now();
    parallel_for(out.size(), threads, [&](std::size_t i) { out[i] = encode_sources({ds.records[i].matrix}, cfg); });
    return seconds_since(start);
  };
  std::vector<EncodedImage> one, four;
  const double t1 = encode_all(1, one);
  const double t4 = encode_all(4, four);
  const double speedup = t1 / t4;
  o.require(one.size() == 1000 && one.front().height() == 256 && one.front().width() == 256, "output shape");
  o.require(t1 < 10.0, "single-threaded " + std::to_string(t1) + " s");
  o.require(speedup >= 3.0, "4-worker speedup " + std::to_string(speedup) + "x");
  o.require(one == four, "4-worker output differs");
  o.detail << (o.pass ? "" : " | ") << "1000 x 12x120 at 256x256: 1 worker " << t1 << " s, 4 workers " << t4
           << " s, speedup " << speedup << "x, hardware threads " << std::thread::hardware_concurrency();
}

struct Criterion {
  const char* title;
  std::function<void(Outcome&)> check;
};

const std::vector<Criterion> criteria{
    {"reduction matches brute-force oracle", reduction_oracle},
    {"reduction semantics", reduction_semantics},
    {"fusion contract", fusion_contract},
    {"rendering goldens", rendering_goldens},
    {"augmentation identities", augmentation_identities},
    {"end-to-end discriminability", end_to_end},
    {"format round-trips", round_trips},
    {"throughput", throughput},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sigimg acceptance checks"};
  int only = 0;
  app.add_option("--criterion", only, "run a single criterion (1-8)")->check(CLI::Range(1, 8));
  CLI11_PARSE(app, argc, argv);

  bool all_pass = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only != 0 && static_cast<std::size_t>(only) != i + 1) continue;
    Outcome o;
    try {
      criteria[i].check(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << i + 1 << " (" << criteria[i].title
              << "): " << o.detail.str() << '\n';
    all_pass = all_pass && o.pass;
  }
  return all_pass ? 0 : 1;
}
