#pragma once

#include <cstddef>
#include <cstdint>

#include "ghostimg/binarization.hpp"
#include "ghostimg/grid.hpp"
#include "ghostimg/speckle.hpp"

namespace gi {

enum class Summation { naive, compensated };

/// Sufficient statistics of the bucket/reference fluctuation correlation.
///
/// Accumulators are single-writer. Independent shards can be merged; with
/// compensated summation every running sum carries a Neumaier correction term.
class CorrelationAccumulator {
 public:
  explicit CorrelationAccumulator(Shape shape, Summation mode = Summation::naive);

  void update(const BucketSample& bucket, const ReferenceFrame& ref);
  void update(const BucketSample& bucket, const BinaryFrame& ref);
  void update(const BucketSample& bucket, const ProcessedReference& ref);
  void merge(const CorrelationAccumulator& other);

  [[nodiscard]] const Shape& shape() const noexcept { return shape_; }
  [[nodiscard]] Summation mode() const noexcept { return mode_; }
  [[nodiscard]] std::uint64_t count() const noexcept { return count_; }
  [[nodiscard]] double sum_bucket() const noexcept { return sum_bucket_ + comp_bucket_; }
  [[nodiscard]] double sum_bucket_sq() const noexcept { return sum_bucket_sq_ + comp_bucket_sq_; }
  [[nodiscard]] Grid<double> sum_ref() const;
  [[nodiscard]] Grid<double> sum_bucket_ref() const;

 private:
  template <typename T>
  void update_impl(double bucket, const Grid<T>& ref);

  Shape shape_;
  Summation mode_;
  std::uint64_t count_ = 0;
  double sum_bucket_ = 0.0;
  double sum_bucket_sq_ = 0.0;
  Grid<double> sum_ref_;
  Grid<double> sum_bucket_ref_;
  // Compensation terms; zero and untouched in naive mode.
  double comp_bucket_ = 0.0;
  double comp_bucket_sq_ = 0.0;
  Grid<double> comp_ref_;
  Grid<double> comp_bucket_ref_;
};

inline CorrelationAccumulator acc_new(Shape shape, Summation mode = Summation::naive) {
  return CorrelationAccumulator(shape, mode);
}
CorrelationAccumulator acc_merge(const CorrelationAccumulator& a, const CorrelationAccumulator& b);

/// Fluctuation-correlation image G(u) = <B I(u)> - <B><I(u)>.
struct Reconstruction {
  Grid<double> image;
  std::uint64_t count = 0;
  MethodTag method = MethodTag::none;

  [[nodiscard]] const Shape& shape() const noexcept { return image.shape(); }
};

/// Population-normalized estimate; needs at least two measurements.
Reconstruction acc_finalize(const CorrelationAccumulator& acc, MethodTag method = MethodTag::none);

/// Min-max stretch to 8-bit codes with half-up rounding; constant input maps to 0.
Grid<std::uint8_t> normalize_display(const Grid<double>& image);
inline Grid<std::uint8_t> normalize_display(const Reconstruction& rec) {
  return normalize_display(rec.image);
}

}  // namespace gi
