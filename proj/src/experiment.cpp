#include "ghostimg/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "ghostimg/pnm.hpp"
#include "ghostimg/stack_file.hpp"

namespace gi {
namespace {

constexpr std::size_t kChunkFrames = 256;

using Clock = std::chrono::steady_clock;

struct ChunkResult {
  std::vector<CorrelationAccumulator> accumulators;
  std::vector<double> fill_sum;
  std::vector<double> elapsed_ms;
  std::vector<double> first_frame_fwhm;  ///< only filled by the chunk holding frame 0
};

double processed_fwhm(const ProcessedReference& ref) {
  return std::visit([](const auto& frame) { return grain_fwhm(frame); }, ref);
}

std::filesystem::path ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw FilesystemError("cannot create output directory '" + dir.string() +
                          "': " + ec.message());
  }
  return dir;
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string optional_field(const std::optional<double>& v) {
  return v ? format_number(*v) : std::string();
}

Grid<std::uint8_t> binary_image(const BinaryFrame& b) {
  Grid<std::uint8_t> out(b.shape());
  for (std::size_t p = 0; p < out.size(); ++p) out[p] = b.bits[p] ? 255 : 0;
  return out;
}

}  // namespace

ObjectMask make_object(const ObjectSource& source, Shape shape) {
  ObjectMask object = std::visit(
      [&](const auto& s) -> ObjectMask {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, DoubleSlitSpec>) {
          return make_double_slit(s);
        } else if constexpr (std::is_same_v<T, FeatherBirdObject>) {
          return make_feather_bird(shape);
        } else {
          return load_object(s);
        }
      },
      source);
  if (object.shape() != shape) {
    throw DimensionError("object '" + object.label + "' is " + to_string(object.shape()) +
                         " but the speckle grid is " + to_string(shape));
  }
  return object;
}

void ExperimentConfig::validate() const {
  speckle.validate();
  if (count < 2) throw ParameterError("need at least 2 measurements, got " + std::to_string(count));
  if (seed_count < 1) throw ParameterError("need at least one seed");
  if (methods.empty()) throw ParameterError("no binarization methods selected");
  if (levels < 2 || levels > 65536) throw ParameterError("levels must be in [2, 65536]");
  if (!(bucket_noise_sigma >= 0.0)) throw ParameterError("bucket noise sigma must be >= 0");
  for (const auto& m : methods) {
    if (m.block()) m.block()->validate(speckle.shape());
  }
}

std::vector<BinarizationMethod> default_methods(BlockSpec block, double alpha) {
  return {BinarizationMethod::none(), BinarizationMethod::mean(), BinarizationMethod::otsu(),
          BinarizationMethod::point_by_point(block, alpha)};
}

std::vector<MethodOutcome> reconstruct_methods(const MeasurementRun& run,
                                               const std::vector<BinarizationMethod>& methods,
                                               int levels, std::size_t threads) {
  if (methods.empty()) throw ParameterError("no binarization methods selected");
  const Shape shape = run.shape();
  const std::size_t n_methods = methods.size();
  const std::size_t n_chunks = (run.count() + kChunkFrames - 1) / kChunkFrames;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n_chunks);

  const auto empty_result = [&] {
    ChunkResult r;
    r.accumulators.assign(n_methods, CorrelationAccumulator(shape));
    r.fill_sum.assign(n_methods, 0.0);
    r.elapsed_ms.assign(n_methods, 0.0);
    return r;
  };

  // Finished chunks are folded into `total` strictly in chunk order.
  ChunkResult total = empty_result();
  std::vector<std::optional<ChunkResult>> pending(n_chunks);
  std::size_t next_to_merge = 0;
  std::mutex merge_mutex;
  std::atomic<std::size_t> next_chunk{0};
  std::exception_ptr failure;

  const auto worker = [&] {
    try {
      std::vector<Binarizer> binarizers;
      binarizers.reserve(n_methods);
      for (const auto& m : methods) binarizers.emplace_back(m, levels);

      for (std::size_t chunk = next_chunk++; chunk < n_chunks; chunk = next_chunk++) {
        ChunkResult result = empty_result();
        const std::size_t begin = chunk * kChunkFrames;
        const std::size_t end = std::min(run.count(), begin + kChunkFrames);
        for (std::size_t k = begin; k < end; ++k) {
          const Measurement m = run.at(k);
          for (std::size_t i = 0; i < n_methods; ++i) {
            const auto start = Clock::now();
            const ProcessedReference ref = binarizers[i](m.frame);
            result.accumulators[i].update(m.bucket, ref);
            if (const auto* bits = std::get_if<BinaryFrame>(&ref)) {
              result.fill_sum[i] += fill_fraction(*bits);
            }
            result.elapsed_ms[i] +=
                std::chrono::duration<double, std::milli>(Clock::now() - start).count();
            if (k == 0) result.first_frame_fwhm.push_back(processed_fwhm(ref));
          }
        }

        std::lock_guard lock(merge_mutex);
        if (failure) return;
        pending[chunk] = std::move(result);
        while (next_to_merge < n_chunks && pending[next_to_merge]) {
          ChunkResult& r = *pending[next_to_merge];
          for (std::size_t i = 0; i < n_methods; ++i) {
            total.accumulators[i].merge(r.accumulators[i]);
            total.fill_sum[i] += r.fill_sum[i];
            total.elapsed_ms[i] += r.elapsed_ms[i];
          }
          if (!r.first_frame_fwhm.empty()) total.first_frame_fwhm = r.first_frame_fwhm;
          pending[next_to_merge].reset();
          ++next_to_merge;
        }
      }
    } catch (...) {
      std::lock_guard lock(merge_mutex);
      if (!failure) failure = std::current_exception();
      next_chunk = n_chunks;
    }
  };

  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<MethodOutcome> outcomes;
  outcomes.reserve(n_methods);
  const double k = static_cast<double>(run.count());
  for (std::size_t i = 0; i < n_methods; ++i) {
    MethodOutcome o{methods[i], acc_finalize(total.accumulators[i], methods[i].tag()),
                    std::nullopt, total.first_frame_fwhm.at(i), total.elapsed_ms[i]};
    if (methods[i].tag() != MethodTag::none) o.mean_fill_fraction = total.fill_sum[i] / k;
    outcomes.push_back(std::move(o));
  }
  return outcomes;
}

std::vector<MetricsReport> score_outcomes(const std::vector<MethodOutcome>& outcomes,
                                          const ObjectMask& object, std::uint64_t seed,
                                          bool record_timing) {
  std::vector<MetricsReport> reports;
  for (const auto& o : outcomes) {
    MetricsReport r;
    r.method = o.method.name();
    r.seed = seed;
    r.count = o.reconstruction.count;
    try {
      r.corr = corr(o.reconstruction.image, object.transmission);
    } catch (const UndefinedVarianceError&) {
      // Constant object or image: no correlation to report.
    }
    r.fill_fraction = o.mean_fill_fraction;
    r.grain_fwhm_px = o.grain_fwhm_px;
    if (record_timing) r.wall_ms = o.wall_ms;
    reports.push_back(std::move(r));
  }
  return reports;
}

std::vector<SeedResult> run_compare(const ExperimentConfig& config) {
  config.validate();
  const ObjectMask object = make_object(config.object, config.speckle.shape());
  const bool writing = !config.output_dir.empty();
  if (writing) {
    ensure_directory(config.output_dir);
    save_object(object, config.output_dir / "object.pgm");
  }

  std::vector<SeedResult> results;
  std::vector<MetricsReport> all_reports;
  for (std::size_t s = 0; s < config.seed_count; ++s) {
    SpeckleParams params = config.speckle;
    params.seed = config.speckle.seed + s;
    const MeasurementRun run =
        MeasurementRun::synthetic(params, object, config.count, config.bucket_noise_sigma);
    if (writing && config.emit_stack) {
      write_stack(run, config.output_dir / ("stack_seed" + std::to_string(params.seed) + ".gifs"));
    }

    SeedResult result;
    result.seed = params.seed;
    result.outcomes = reconstruct_methods(run, config.methods, config.levels, config.threads);
    result.reports = score_outcomes(result.outcomes, object, params.seed, config.record_timing);
    if (writing) {
      for (const auto& o : result.outcomes) {
        write_pgm8(normalize_display(o.reconstruction),
                   config.output_dir / ("recon_" + o.method.name() + "_seed" +
                                        std::to_string(params.seed) + ".pgm"));
      }
    }
    all_reports.insert(all_reports.end(), result.reports.begin(), result.reports.end());
    results.push_back(std::move(result));
  }
  if (writing) write_metrics_csv(all_reports, config.output_dir / "metrics.csv");
  return results;
}

std::vector<MetricsReport> speckle_stats(const ExperimentConfig& config,
                                         const SpeckleStatsOptions& options) {
  config.speckle.validate();
  if (options.frames < 1) throw ParameterError("speckle statistics need at least one frame");
  if (config.seed_count < 1) throw ParameterError("need at least one seed");
  options.block.validate(config.speckle.shape());

  struct Variant {
    std::string name;
    std::optional<Binarizer> binarizer;  ///< empty for the raw speckle
  };
  std::vector<Variant> variants;
  variants.push_back({"raw", std::nullopt});
  variants.push_back({"mbgi", Binarizer(BinarizationMethod::mean(), config.levels)});
  variants.push_back({"obgi", Binarizer(BinarizationMethod::otsu(), config.levels)});
  for (double alpha : options.alphas) {
    const auto method = BinarizationMethod::point_by_point(options.block, alpha);
    variants.push_back({method.name(), Binarizer(method, config.levels)});
  }

  const bool writing = !config.output_dir.empty();
  if (writing) ensure_directory(config.output_dir);

  std::vector<MetricsReport> reports;
  for (std::size_t s = 0; s < config.seed_count; ++s) {
    SpeckleParams params = config.speckle;
    params.seed = config.speckle.seed + s;
    std::vector<double> fwhm_sum(variants.size(), 0.0);
    std::vector<double> fill_sum(variants.size(), 0.0);
    std::vector<double> ms(variants.size(), 0.0);
    for (std::size_t f = 0; f < options.frames; ++f) {
      const ReferenceFrame frame = generate_frame(params, f);
      for (std::size_t v = 0; v < variants.size(); ++v) {
        const auto start = Clock::now();
        const ProcessedReference ref =
            variants[v].binarizer ? (*variants[v].binarizer)(frame) : ProcessedReference(frame);
        fwhm_sum[v] += processed_fwhm(ref);
        if (const auto* bits = std::get_if<BinaryFrame>(&ref)) {
          fill_sum[v] += fill_fraction(*bits);
          if (writing && f == 0) {
            write_pgm8(binary_image(*bits), config.output_dir /
                                                ("speckle_" + variants[v].name + "_seed" +
                                                 std::to_string(params.seed) + ".pgm"));
          }
        } else if (writing && f == 0) {
          write_pgm8(normalize_display(to_double(frame.intensity)),
                     config.output_dir /
                         ("speckle_raw_seed" + std::to_string(params.seed) + ".pgm"));
        }
        ms[v] += std::chrono::duration<double, std::milli>(Clock::now() - start).count();
      }
    }
    const double n = static_cast<double>(options.frames);
    for (std::size_t v = 0; v < variants.size(); ++v) {
      MetricsReport r;
      r.method = variants[v].name;
      r.seed = params.seed;
      r.count = options.frames;
      if (variants[v].binarizer) r.fill_fraction = fill_sum[v] / n;
      r.grain_fwhm_px = fwhm_sum[v] / n;
      if (config.record_timing) r.wall_ms = ms[v];
      reports.push_back(std::move(r));
    }
  }
  if (writing) write_metrics_csv(reports, config.output_dir / "speckle_stats.csv");
  return reports;
}

std::string metrics_csv(const std::vector<MetricsReport>& rows) {
  std::ostringstream out;
  out << "method,seed,count,corr,fill_fraction,grain_fwhm_px,wall_ms\n";
  for (const auto& r : rows) {
    out << r.method << ',' << r.seed << ',' << r.count << ',' << optional_field(r.corr) << ','
        << optional_field(r.fill_fraction) << ',' << optional_field(r.grain_fwhm_px) << ','
        << optional_field(r.wall_ms) << '\n';
  }
  return out.str();
}

void write_metrics_csv(const std::vector<MetricsReport>& rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FilesystemError("cannot create '" + path.string() + "'");
  out << metrics_csv(rows);
  if (!out) throw FilesystemError("write failed for '" + path.string() + "'");
}

}  // namespace gi
