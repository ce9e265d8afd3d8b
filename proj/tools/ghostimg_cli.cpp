// Command-line driver: simulate speckle runs, reconstruct them with each
// binarization method, and report Corr / speckle-grain statistics.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "ghostimg/experiment.hpp"
#include "ghostimg/pnm.hpp"
#include "ghostimg/stack_file.hpp"

namespace {

gi::Shape parse_size(const std::string& text) {
  std::size_t rows = 0;
  std::size_t cols = 0;
  char x = 0;
  std::istringstream in(text);
  if (in >> rows) {
    if (in >> x) {
      if ((x != 'x' && x != 'X') || !(in >> cols)) cols = 0;
    } else {
      cols = rows;
    }
  }
  if (rows == 0 || cols == 0 || !in.eof()) {
    throw gi::ParameterError("bad size '" + text + "' (expected N or RxC)");
  }
  return {rows, cols};
}

gi::BlockSpec parse_block(const std::string& text) {
  const gi::Shape s = parse_size(text);
  return {s.rows, s.cols};
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void print_reports(const std::vector<gi::MetricsReport>& reports) {
  std::printf("%-14s %8s %8s %10s %10s %10s\n", "method", "seed", "count", "corr", "fill",
              "fwhm_px");
  for (const auto& r : reports) {
    std::printf("%-14s %8llu %8llu %10s %10s %10.3f\n", r.method.c_str(),
                static_cast<unsigned long long>(r.seed), static_cast<unsigned long long>(r.count),
                r.corr ? std::to_string(*r.corr).substr(0, 8).c_str() : "-",
                r.fill_fraction ? std::to_string(*r.fill_fraction).substr(0, 8).c_str() : "-",
                r.grain_fwhm_px.value_or(0.0));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ghost-imaging simulator with mean, Otsu and point-by-point reference binarization"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "Flat 'key = value' file; keys are the long option names");

  std::string size = "128";
  std::size_t frames = 10000;
  std::uint64_t seed = 1;
  std::size_t seeds = 1;
  double grain_sigma = 1.5;
  double mean_intensity = 1.0;
  std::string block = "16x16";
  double alpha = 0.15;
  int levels = gi::kDefaultLevels;
  std::string object = "double-slit";
  double pitch_mm = 0.05;
  double slit_width_mm = 0.2;
  double slit_separation_mm = 0.6;
  std::size_t slit_height = 0;
  std::string slit_orientation = "vertical";
  std::string methods = "tgi,mbgi,obgi,ppbgi";
  double noise_sigma = 0.0;
  std::string out_dir = "out";
  std::string stack_path;
  bool emit_stack = false;
  bool timing = false;
  std::size_t threads = 0;
  std::size_t stats_frames = 10;
  std::string alphas = "0.15,0.4";

  app.add_option("--size", size, "Grid size, N or RxC")->capture_default_str();
  app.add_option("--frames", frames, "Measurements per run (K)")->capture_default_str();
  app.add_option("--seed", seed, "First seed")->capture_default_str();
  app.add_option("--seeds", seeds, "Number of consecutive seeds")->capture_default_str();
  app.add_option("--grain-sigma", grain_sigma, "Speckle correlation length, pixels")
      ->capture_default_str();
  app.add_option("--mean-intensity", mean_intensity, "Expected pixel intensity")
      ->capture_default_str();
  app.add_option("--block", block, "Point-by-point block size k1xk2")->capture_default_str();
  app.add_option("--alpha", alpha, "Harmonic factor in [0, 1]")->capture_default_str();
  app.add_option("--levels", levels, "Histogram levels for Otsu")->capture_default_str();
  app.add_option("--object", object, "double-slit, feather-bird, or a PGM/PNG path")
      ->capture_default_str();
  app.add_option("--pitch-mm", pitch_mm, "Object-plane pixel pitch, mm")->capture_default_str();
  app.add_option("--slit-width-mm", slit_width_mm, "Slit width, mm")->capture_default_str();
  app.add_option("--slit-separation-mm", slit_separation_mm,
                 "Slit center-to-center separation, mm")
      ->capture_default_str();
  app.add_option("--slit-height", slit_height, "Slit height in pixels (0: half the grid)")
      ->capture_default_str();
  app.add_option("--slit-orientation", slit_orientation, "vertical or horizontal")
      ->check(CLI::IsMember({"vertical", "horizontal"}))
      ->capture_default_str();
  app.add_option("--methods", methods,
                 "Comma list of tgi, mbgi, obgi, ppbgi[:alpha]")
      ->capture_default_str();
  app.add_option("--noise-sigma", noise_sigma, "Additive Gaussian bucket noise (std)")
      ->capture_default_str();
  app.add_option("--out", out_dir, "Output directory")->capture_default_str();
  app.add_option("--stack", stack_path, "Frame-stack file (simulate output, reconstruct input)");
  app.add_flag("--emit-stack", emit_stack, "compare: also write the frame stack of each seed");
  app.add_flag("--timing", timing, "Fill the wall_ms column (makes outputs non-reproducible)");
  app.add_option("--threads", threads, "Worker threads (0: all cores)")->capture_default_str();
  app.add_option("--stats-frames", stats_frames, "speckle-stats: frames averaged per seed")
      ->capture_default_str();
  app.add_option("--alphas", alphas, "speckle-stats: point-by-point alphas")
      ->capture_default_str();

  auto* compare = app.add_subcommand("compare", "Reconstruct one run per seed with every method");
  auto* simulate = app.add_subcommand("simulate", "Write the frame stack of each seed");
  auto* reconstruct = app.add_subcommand("reconstruct", "Reconstruct from a frame-stack file");
  auto* stats = app.add_subcommand("speckle-stats", "Grain size and fill of binarized speckle");

  CLI11_PARSE(app, argc, argv);

  try {
    const gi::Shape shape = parse_size(size);
    const gi::BlockSpec block_spec = parse_block(block);

    gi::ExperimentConfig config;
    config.speckle = {shape.rows, shape.cols, grain_sigma, mean_intensity, seed};
    config.seed_count = seeds;
    config.count = frames;
    config.levels = levels;
    config.bucket_noise_sigma = noise_sigma;
    config.output_dir = out_dir;
    config.emit_stack = emit_stack;
    config.record_timing = timing;
    config.threads = threads;
    for (const auto& m : split_list(methods)) {
      config.methods.push_back(gi::parse_method(m, block_spec, alpha));
    }
    if (object == "double-slit") {
      auto spec = gi::DoubleSlitSpec::from_physical(shape, slit_width_mm, slit_separation_mm,
                                                    pitch_mm);
      if (slit_height != 0) spec.slit_height_px = slit_height;
      if (slit_orientation == "horizontal") {
        spec.orientation = gi::SlitOrientation::horizontal;
        if (slit_height == 0) spec.slit_height_px = std::max<std::size_t>(1, shape.cols / 2);
      }
      config.object = spec;
    } else if (object == "feather-bird") {
      config.object = gi::FeatherBirdObject{};
    } else {
      config.object = std::filesystem::path(object);
    }

    if (compare->parsed()) {
      std::vector<gi::MetricsReport> reports;
      for (const auto& r : gi::run_compare(config)) {
        reports.insert(reports.end(), r.reports.begin(), r.reports.end());
      }
      print_reports(reports);
    } else if (simulate->parsed()) {
      config.speckle.validate();
      const gi::ObjectMask mask = gi::make_object(config.object, shape);
      std::filesystem::create_directories(config.output_dir);
      for (std::size_t s = 0; s < seeds; ++s) {
        gi::SpeckleParams params = config.speckle;
        params.seed = seed + s;
        const auto run = gi::MeasurementRun::synthetic(params, mask, frames, noise_sigma);
        const std::filesystem::path path =
            !stack_path.empty() && seeds == 1
                ? std::filesystem::path(stack_path)
                : config.output_dir / ("stack_seed" + std::to_string(params.seed) + ".gifs");
        gi::write_stack(run, path);
        std::printf("wrote %s (%zu frames, %s)\n", path.c_str(), run.count(),
                    gi::to_string(run.shape()).c_str());
      }
    } else if (reconstruct->parsed()) {
      if (stack_path.empty()) throw gi::ParameterError("reconstruct needs --stack FILE");
      const gi::MeasurementRun run = gi::read_stack(stack_path);
      if (run.count() < 2) throw gi::ParameterError("stack holds fewer than 2 frames");
      const gi::ObjectMask mask = gi::make_object(config.object, run.shape());
      const auto outcomes = gi::reconstruct_methods(run, config.methods, levels, threads);
      const auto reports = gi::score_outcomes(outcomes, mask, seed, timing);
      std::filesystem::create_directories(config.output_dir);
      for (const auto& o : outcomes) {
        gi::write_pgm8(gi::normalize_display(o.reconstruction),
                       config.output_dir / ("recon_" + o.method.name() + "_seed" +
                                            std::to_string(seed) + ".pgm"));
      }
      gi::write_metrics_csv(reports, config.output_dir / "metrics.csv");
      print_reports(reports);
    } else if (stats->parsed()) {
      gi::SpeckleStatsOptions options;
      options.frames = stats_frames;
      options.block = block_spec;
      options.alphas.clear();
      for (const auto& a : split_list(alphas)) {
        options.alphas.push_back(std::stod(a));
      }
      print_reports(gi::speckle_stats(config, options));
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "ghostimg: error: %s\n", e.what());
    return 1;
  }
  return 0;
}
