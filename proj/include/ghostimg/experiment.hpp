#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "ghostimg/binarization.hpp"
#include "ghostimg/metrics.hpp"
#include "ghostimg/objects.hpp"
#include "ghostimg/reconstruction.hpp"
#include "ghostimg/speckle.hpp"

namespace gi {

struct FeatherBirdObject {};
using ObjectSource = std::variant<DoubleSlitSpec, FeatherBirdObject, std::filesystem::path>;

ObjectMask make_object(const ObjectSource& source, Shape shape);

struct ExperimentConfig {
  SpeckleParams speckle;
  std::size_t seed_count = 1;  ///< seeds speckle.seed, speckle.seed + 1, ...
  ObjectSource object = DoubleSlitSpec{};
  std::size_t count = 10000;
  std::vector<BinarizationMethod> methods;
  int levels = kDefaultLevels;
  double bucket_noise_sigma = 0.0;
  std::filesystem::path output_dir;  ///< empty: nothing is written
  bool emit_stack = false;
  bool record_timing = false;  ///< wall_ms is left blank otherwise, keeping outputs reproducible
  std::size_t threads = 0;     ///< 0: hardware concurrency

  void validate() const;
};

/// The four methods in report order, sharing one block size and alpha.
std::vector<BinarizationMethod> default_methods(BlockSpec block = {}, double alpha = 0.15);

struct MethodOutcome {
  BinarizationMethod method;
  Reconstruction reconstruction;
  std::optional<double> mean_fill_fraction;  ///< over all frames; unset for unbinarized
  double grain_fwhm_px = 0.0;                ///< of the processed first frame
  double wall_ms = 0.0;
};

/// One pass over the run feeding every method the same frames. Frames are
/// processed in fixed-size chunks whose accumulators are merged in chunk
/// order, so results do not depend on the thread count.
std::vector<MethodOutcome> reconstruct_methods(const MeasurementRun& run,
                                               const std::vector<BinarizationMethod>& methods,
                                               int levels, std::size_t threads = 0);

struct SeedResult {
  std::uint64_t seed = 0;
  std::vector<MethodOutcome> outcomes;
  std::vector<MetricsReport> reports;
};

/// Score `outcomes` against the object and, if `output_dir` is set, write
/// one reconstruction PGM per method.
std::vector<MetricsReport> score_outcomes(const std::vector<MethodOutcome>& outcomes,
                                          const ObjectMask& object, std::uint64_t seed,
                                          bool record_timing);

/// Runs every seed; writes recon_<method>_seed<seed>.pgm, object.pgm,
/// metrics.csv and optionally stack_seed<seed>.gifs into output_dir.
std::vector<SeedResult> run_compare(const ExperimentConfig& config);

/// Binarized-speckle statistics (raw, mbgi, obgi, ppbgi at each alpha)
/// averaged over the first `frames` frames of each seed. Writes
/// speckle_<variant>_seed<seed>.pgm of frame 0 and speckle_stats.csv.
struct SpeckleStatsOptions {
  std::size_t frames = 10;
  BlockSpec block;
  std::vector<double> alphas{0.15, 0.4};
};
std::vector<MetricsReport> speckle_stats(const ExperimentConfig& config,
                                         const SpeckleStatsOptions& options);

/// CSV with header method,seed,count,corr,fill_fraction,grain_fwhm_px,wall_ms.
void write_metrics_csv(const std::vector<MetricsReport>& rows, const std::filesystem::path& path);
std::string metrics_csv(const std::vector<MetricsReport>& rows);

}  // namespace gi
