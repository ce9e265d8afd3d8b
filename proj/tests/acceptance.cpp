// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include "ghostimg/experiment.hpp"
#include "ghostimg/stack_file.hpp"
#include "oracles.hpp"
#include "otsu_oracle.hpp"

using namespace gi;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass;
  std::string detail;
};

double relative_gap(const Grid<double>& a, const Grid<double>& b) {
  double diff = 0.0;
  double scale = 0.0;
  for (std::size_t p = 0; p < a.size(); ++p) {
    diff = std::max(diff, std::abs(a[p] - b[p]));
    scale = std::max(scale, std::abs(b[p]));
  }
  return scale == 0.0 ? diff : diff / scale;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "ghostimg_acceptance" / name;
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

ExperimentConfig default_protocol(ObjectSource object) {
  ExperimentConfig c;
  c.speckle = {128, 128, 1.5, 1.0, 1};
  c.seed_count = 5;
  c.object = std::move(object);
  c.count = 10000;
  c.methods = default_methods(BlockSpec{16, 16}, 0.15);
  c.levels = 256;
  return c;
}

// Corr per method (report order tgi, mbgi, obgi, ppbgi) for each seed.
std::vector<std::vector<double>> corr_table(const ExperimentConfig& config) {
  std::vector<std::vector<double>> table;
  for (const auto& seed : run_compare(config)) {
    std::vector<double> row;
    std::printf("    seed %llu:", static_cast<unsigned long long>(seed.seed));
    for (const auto& r : seed.reports) {
      row.push_back(r.corr.value_or(std::nan("")));
      std::printf(" %s=%.4f", r.method.c_str(), row.back());
    }
    std::printf("\n");
    table.push_back(std::move(row));
  }
  return table;
}

Verdict method_ranking() {
  int held = 0;
  for (const auto& c : corr_table(default_protocol(DoubleSlitSpec{}))) {
    const double tgi = c[0], mbgi = c[1], obgi = c[2], ppbgi = c[3];
    if (ppbgi > obgi && obgi > tgi && tgi > mbgi) ++held;
  }
  return {held >= 4, "PPBGI > OBGI > TGI > MBGI in " + std::to_string(held) + "/5 seeds (need 4)"};
}

Verdict complex_object_ranking() {
  int held = 0;
  for (const auto& c : corr_table(default_protocol(FeatherBirdObject{}))) {
    if (c[3] > c[0] && c[3] > c[1] && c[3] > c[2]) ++held;
  }
  return {held >= 4, "PPBGI maximal on feather-bird in " + std::to_string(held) + "/5 seeds (need 4)"};
}

ReferenceFrame random_frame(std::mt19937_64& rng, std::size_t index) {
  std::uniform_int_distribution<std::size_t> side(32, 128);
  std::uniform_real_distribution<double> sigma(0.0, 3.0);
  std::uniform_real_distribution<double> mean(0.1, 10.0);
  SpeckleParams p{side(rng), side(rng), sigma(rng), mean(rng), rng()};
  return generate_frame(p, index);
}

Verdict alpha_degeneracy() {
  std::mt19937_64 rng(301);
  const BlockSpec block{16, 16};
  int equal = 0;
  for (std::size_t i = 0; i < 100; ++i) {
    const auto frame = random_frame(rng, i);
    const auto ppb =
        binarize_with_method(frame, BinarizationMethod::point_by_point(block, 1.0));
    const auto otsu = binarize_with_method(frame, BinarizationMethod::otsu());
    if (std::get<BinaryFrame>(ppb).bits == std::get<BinaryFrame>(otsu).bits) ++equal;
  }
  return {equal == 100, std::to_string(equal) + "/100 frames bitwise identical"};
}

std::vector<std::uint64_t> random_histogram(std::mt19937_64& rng) {
  std::vector<std::uint64_t> h(256, 0);
  switch (rng() % 4) {
    case 0: {  // dense small counts
      for (auto& v : h) v = rng() % 50;
      break;
    }
    case 1: {  // a few spikes, many ties
      const int spikes = 2 + static_cast<int>(rng() % 6);
      for (int s = 0; s < spikes; ++s) h[rng() % 256] = 1 + rng() % 4;
      break;
    }
    case 2: {  // exponential speckle-like shape
      std::exponential_distribution<double> e(1.0 / 40.0);
      for (int n = 0; n < 16384; ++n) ++h[std::min<std::size_t>(255, static_cast<std::size_t>(e(rng)))];
      break;
    }
    default: {  // bimodal with large counts
      std::normal_distribution<double> a(70.0, 15.0), b(180.0, 25.0);
      for (int n = 0; n < 20000; ++n) {
        const double v = (n % 3 == 0) ? b(rng) : a(rng);
        ++h[static_cast<std::size_t>(std::clamp(v, 0.0, 255.0))];
      }
      for (auto& v : h) v *= 1 + rng() % 3;
    }
  }
  if (std::all_of(h.begin(), h.end(), [](auto v) { return v == 0; })) h[rng() % 256] = 1;
  return h;
}

Verdict otsu_equivalence() {
  std::mt19937_64 rng(404);
  int agree = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto h = random_histogram(rng);
    if (otsu_split(h).level == oracle::exhaustive_otsu_prefix(h).level) ++agree;
  }
  return {agree == 1000, std::to_string(agree) + "/1000 histograms match the exact search"};
}

Verdict threshold_convexity() {
  std::mt19937_64 rng(505);
  const BlockSpec blocks[] = {{16, 16}, {8, 12}, {5, 7}};
  int ok = 0;
  double worst = 0.0;
  for (std::size_t i = 0; i < 100; ++i) {
    const auto frame = random_frame(rng, i);
    const BlockSpec block = blocks[i % 3];
    const auto corners = block_corner_thresholds(frame.intensity, block);
    const auto [lo, hi] = std::minmax_element(corners.begin(), corners.end());
    const auto map = ppb_threshold_map(frame, block);
    bool inside = true;
    for (double t : map.local) {
      const double excess = std::max(*lo - t, t - *hi);
      worst = std::max(worst, excess);
      if (excess > 1e-12) inside = false;
    }
    if (inside) ++ok;
  }
  return {ok == 100, std::to_string(ok) + "/100 frames inside corner range, worst excess " +
                         fmt("%.3g", worst)};
}

Verdict correlator() {
  const SpeckleParams params{32, 32, 1.5, 1.0, 606};
  const auto object = make_double_slit(DoubleSlitSpec{Shape{32, 32}, 2, 6, 16, SlitOrientation::vertical});
  const auto run = MeasurementRun::synthetic(params, object, 1000);

  std::vector<std::vector<double>> refs;
  std::vector<double> buckets;
  for (const auto& m : run) {
    refs.emplace_back(m.frame.intensity.begin(), m.frame.intensity.end());
    buckets.push_back(m.bucket.value);
  }
  const auto stream = [&](std::size_t begin, std::size_t end, const std::function<double(double)>& f) {
    auto acc = acc_new(run.shape());
    for (std::size_t k = begin; k < end; ++k) {
      const auto m = run.at(k);
      acc.update(BucketSample{f(m.bucket.value), m.bucket.frame_index}, m.frame);
    }
    return acc;
  };
  const auto id = [](double b) { return b; };

  const auto g = acc_finalize(stream(0, 1000, id)).image;
  const double batch_gap =
      relative_gap(g, Grid<double>(run.shape(), oracle::two_pass_correlation(refs, buckets)));

  double mean_abs = 0.0;
  for (const auto& r : refs)
    for (double v : r) mean_abs += std::abs(5.0 * v);
  mean_abs /= static_cast<double>(refs.size() * refs.front().size());
  const auto flat = acc_finalize(stream(0, 1000, [](double) { return 5.0; })).image;
  double flat_max = 0.0;
  for (double v : flat) flat_max = std::max(flat_max, std::abs(v));

  const auto shifted = acc_finalize(stream(0, 1000, [](double b) { return b + 1000.0; })).image;
  const double offset_gap = relative_gap(shifted, g);

  auto sharded = stream(0, 137, id);
  sharded.merge(stream(137, 500, id));
  sharded.merge(stream(500, 1000, id));
  const double shard_gap = relative_gap(acc_finalize(sharded).image, g);

  const bool pass = batch_gap <= 1e-10 && flat_max <= 1e-10 * mean_abs && offset_gap <= 1e-9 &&
                    shard_gap <= 1e-10;
  return {pass, "two-pass " + fmt("%.2e", batch_gap) + ", constant bucket " +
                    fmt("%.2e", flat_max / mean_abs) + ", offset " + fmt("%.2e", offset_gap) +
                    ", shards " + fmt("%.2e", shard_gap)};
}

Verdict corr_metric() {
  std::mt19937_64 rng(707);
  std::normal_distribution<double> normal;
  Grid<double> o(Shape{16, 16});
  Grid<double> g(Shape{16, 16});
  for (std::size_t p = 0; p < o.size(); ++p) {
    o[p] = normal(rng);
    g[p] = o[p] + normal(rng);
  }
  const double self = corr(o, o);
  Grid<double> affine = g;
  for (double& v : affine) v = 4.0 * v + 7.0;
  const double affine_gap = std::abs(corr(affine, o) - corr(g, o));
  const double example = corr(Grid<double>(Shape{1, 4}, std::vector<double>{1, 2, 3, 4}),
                              Grid<double>(Shape{1, 4}, std::vector<double>{1, 0, 1, 0}));
  const double example_gap = std::abs(example + 1.0 / std::sqrt(5.0));
  const bool pass = std::abs(self - 1.0) <= 1e-12 && affine_gap <= 1e-12 && example_gap <= 1e-12;
  return {pass, "corr(O,O)-1 " + fmt("%.1e", self - 1.0) + ", affine " + fmt("%.1e", affine_gap) +
                    ", example " + fmt("%.12f", example)};
}

Verdict grain_effect() {
  ExperimentConfig c = default_protocol(DoubleSlitSpec{});
  c.seed_count = 10;
  SpeckleStatsOptions opts;
  opts.frames = 10;
  opts.block = BlockSpec{16, 16};
  opts.alphas = {0.15, 0.4};
  const auto rows = speckle_stats(c, opts);
  int held = 0;
  double low_sum = 0.0;
  double high_sum = 0.0;
  for (std::size_t s = 0; s < 10; ++s) {
    double low = 0.0;
    double high = 0.0;
    for (const auto& r : rows) {
      if (r.seed != c.speckle.seed + s) continue;
      if (r.method == "ppbgi_a0.15") low = *r.grain_fwhm_px;
      if (r.method == "ppbgi_a0.4") high = *r.grain_fwhm_px;
    }
    if (low <= high) ++held;
    low_sum += low;
    high_sum += high;
  }
  return {held > 5, "FWHM(a=0.15) <= FWHM(a=0.4) in " + std::to_string(held) +
                        "/10 seeds; means " + fmt("%.4f", low_sum / 10) + " vs " +
                        fmt("%.4f", high_sum / 10)};
}

Verdict determinism() {
  ExperimentConfig c = default_protocol(DoubleSlitSpec{});
  c.seed_count = 2;
  c.count = 2000;
  c.emit_stack = false;
  c.output_dir = scratch("determinism_a");
  c.threads = 1;
  run_compare(c);
  const fs::path first = c.output_dir;
  c.output_dir = scratch("determinism_b");
  c.threads = 0;
  run_compare(c);
  int files = 0;
  int same = 0;
  for (const auto& entry : fs::directory_iterator(first)) {
    ++files;
    const fs::path twin = c.output_dir / entry.path().filename();
    if (fs::exists(twin) && slurp(twin) == slurp(entry.path())) ++same;
  }
  return {files > 0 && same == files,
          std::to_string(same) + "/" + std::to_string(files) + " output files byte-identical"};
}

Verdict stack_round_trip() {
  const fs::path dir = scratch("stack");
  fs::create_directories(dir);
  const auto tiny = MeasurementRun::stored(
      {ReferenceFrame{Grid<float>(Shape{2, 2}, std::vector<float>{0.5f, 1.25f, 3.0f, 0.0f}), 0}},
      {BucketSample{2.75, 0}});
  write_stack(tiny, dir / "tiny.gifs");
  const auto tiny_size = fs::file_size(dir / "tiny.gifs");

  const SpeckleParams params{48, 40, 1.5, 1.0, 1010};
  const auto run = MeasurementRun::synthetic(
      params, make_feather_bird(params.shape()), 25, 0.3);
  write_stack(run, dir / "run.gifs");
  const auto back = read_stack(dir / "run.gifs");
  bool identical = back.count() == run.count() && back.shape() == run.shape();
  for (std::size_t k = 0; identical && k < run.count(); ++k) {
    const auto a = run.at(k);
    const auto b = back.at(k);
    identical = std::memcmp(a.frame.intensity.values().data(), b.frame.intensity.values().data(),
                            a.frame.intensity.size() * sizeof(float)) == 0 &&
                std::memcmp(&a.bucket.value, &b.bucket.value, sizeof(double)) == 0;
  }
  return {identical && tiny_size == 42, "round trip " + std::string(identical ? "bit-identical" : "differs") +
                                            ", 2x2x1 file " + std::to_string(tiny_size) + " bytes"};
}

}  // namespace

int main(int argc, char** argv) {
  // Optional arguments select criteria by number; default runs all.
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));

  struct Criterion {
    const char* name;
    Verdict (*check)();
  };
  const Criterion criteria[] = {
      {"method ranking on the double slit", method_ranking},
      {"ranking on a complex object", complex_object_ranking},
      {"alpha = 1 equals Otsu binarization", alpha_degeneracy},
      {"Otsu matches exhaustive search", otsu_equivalence},
      {"threshold map convexity", threshold_convexity},
      {"correlator correctness", correlator},
      {"Corr metric", corr_metric},
      {"grain shrinkage at lower alpha", grain_effect},
      {"compare determinism", determinism},
      {"frame stack file", stack_round_trip},
  };

  int failures = 0;
  int index = 0;
  int ran = 0;
  for (const auto& c : criteria) {
    ++index;
    if (!selected.empty() && std::find(selected.begin(), selected.end(), index) == selected.end()) continue;
    ++ran;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!v.pass) ++failures;
    std::printf("[%s] %2d %s: %s (%.1f s)\n", v.pass ? "PASS" : "FAIL", index, c.name,
                v.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", ran - failures, ran);
  return failures == 0 ? 0 : 1;
}
