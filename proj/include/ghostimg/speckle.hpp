#pragma once

#include <cstddef>
#include <cstdint>
#include <iterator>
#include <memory>
#include <optional>
#include <vector>

#include "ghostimg/grid.hpp"
#include "ghostimg/objects.hpp"

namespace gi {

/// Parameters of the statistical pseudo-thermal source.
struct SpeckleParams {
  std::size_t rows = 128;
  std::size_t cols = 128;
  double grain_sigma = 1.5;     ///< Gaussian field-correlation length in pixels.
  double mean_intensity = 1.0;  ///< Expected per-pixel intensity.
  std::uint64_t seed = 0;

  [[nodiscard]] Shape shape() const noexcept { return {rows, cols}; }
  void validate() const;
};

/// One speckle realization on the reference detector.
struct ReferenceFrame {
  Grid<float> intensity;
  std::uint64_t frame_index = 0;

  [[nodiscard]] const Shape& shape() const noexcept { return intensity.shape(); }
};

/// Bucket-detector reading paired with the reference frame of the same index.
struct BucketSample {
  double value = 0.0;
  std::uint64_t frame_index = 0;
};

struct Measurement {
  ReferenceFrame frame;
  BucketSample bucket;
};

/// Synthesize frame `frame_index` of the stream keyed by `params.seed`.
///
/// A circular complex Gaussian white field is drawn pixel-by-pixel from a
/// counter-based generator, both quadratures are low-pass filtered by a
/// separable Gaussian of width `grain_sigma` (truncated at 4 sigma, mirrored
/// borders), and the squared modulus is scaled so that its expected value is
/// `mean_intensity`. The output depends only on (params, frame_index).
ReferenceFrame generate_frame(const SpeckleParams& params, std::uint64_t frame_index);

/// Integrated transmitted intensity, sum over pixels of object * frame.
BucketSample bucket_measure(const ReferenceFrame& frame, const ObjectMask& object);

/// Normalized 1-D Gaussian taps for the given sigma, radius ceil(4 sigma).
std::vector<double> gaussian_kernel(double sigma);

/// An ordered sequence of (reference frame, bucket) pairs.
///
/// Synthetic runs produce each measurement on demand; stored runs (e.g. read
/// back from a frame-stack file) hold their data in memory.
class MeasurementRun {
 public:
  class const_iterator {
   public:
    using iterator_category = std::input_iterator_tag;
    using value_type = Measurement;
    using difference_type = std::ptrdiff_t;

    const_iterator(const MeasurementRun* run, std::size_t index) : run_(run), index_(index) {}
    Measurement operator*() const { return run_->at(index_); }
    const_iterator& operator++() {
      ++index_;
      return *this;
    }
    friend bool operator==(const const_iterator&, const const_iterator&) = default;

   private:
    const MeasurementRun* run_;
    std::size_t index_;
  };

  /// Synthetic run. `bucket_noise_sigma` adds zero-mean Gaussian detector
  /// noise to each bucket value (clamped at zero), keyed by the frame index.
  static MeasurementRun synthetic(const SpeckleParams& params, ObjectMask object,
                                  std::size_t count, double bucket_noise_sigma = 0.0);
  static MeasurementRun stored(std::vector<ReferenceFrame> frames,
                               std::vector<BucketSample> buckets);

  [[nodiscard]] std::size_t count() const noexcept { return count_; }
  [[nodiscard]] Shape shape() const noexcept { return shape_; }
  [[nodiscard]] std::uint64_t fingerprint() const noexcept { return fingerprint_; }
  [[nodiscard]] Measurement at(std::size_t index) const;

  [[nodiscard]] const_iterator begin() const { return {this, 0}; }
  [[nodiscard]] const_iterator end() const { return {this, count_}; }

 private:
  MeasurementRun() = default;

  struct Synthetic {
    SpeckleParams params;
    std::shared_ptr<const ObjectMask> object;
    double noise_sigma = 0.0;
  };
  struct Stored {
    std::shared_ptr<const std::vector<ReferenceFrame>> frames;
    std::shared_ptr<const std::vector<BucketSample>> buckets;
  };

  std::size_t count_ = 0;
  Shape shape_;
  std::uint64_t fingerprint_ = 0;
  std::optional<Synthetic> synthetic_;
  std::optional<Stored> stored_;
};

/// Convenience wrapper matching `MeasurementRun::synthetic` without noise.
MeasurementRun generate_run(const SpeckleParams& params, const ObjectMask& object,
                            std::size_t count);

}  // namespace gi
