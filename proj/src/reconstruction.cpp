#include "ghostimg/reconstruction.hpp"

#include <algorithm>
#include <cmath>
#include <variant>

namespace gi {
namespace {

// Neumaier compensated addition of `value` into (sum, comp).
inline void add_compensated(double& sum, double& comp, double value) {
  const double t = sum + value;
  if (std::abs(sum) >= std::abs(value)) {
    comp += (sum - t) + value;
  } else {
    comp += (value - t) + sum;
  }
  sum = t;
}

}  // namespace

CorrelationAccumulator::CorrelationAccumulator(Shape shape, Summation mode)
    : shape_(shape), mode_(mode), sum_ref_(shape, 0.0), sum_bucket_ref_(shape, 0.0) {
  if (shape.empty()) throw DimensionError("accumulator shape must be non-empty");
  if (mode_ == Summation::compensated) {
    comp_ref_ = Grid<double>(shape, 0.0);
    comp_bucket_ref_ = Grid<double>(shape, 0.0);
  }
}

template <typename T>
void CorrelationAccumulator::update_impl(double bucket, const Grid<T>& ref) {
  require_same_shape(ref.shape(), shape_, "accumulator update");
  ++count_;
  if (mode_ == Summation::naive) {
    sum_bucket_ += bucket;
    sum_bucket_sq_ += bucket * bucket;
    for (std::size_t p = 0; p < ref.size(); ++p) {
      const auto v = static_cast<double>(ref[p]);
      sum_ref_[p] += v;
      sum_bucket_ref_[p] += bucket * v;
    }
    return;
  }
  add_compensated(sum_bucket_, comp_bucket_, bucket);
  add_compensated(sum_bucket_sq_, comp_bucket_sq_, bucket * bucket);
  for (std::size_t p = 0; p < ref.size(); ++p) {
    const auto v = static_cast<double>(ref[p]);
    add_compensated(sum_ref_[p], comp_ref_[p], v);
    add_compensated(sum_bucket_ref_[p], comp_bucket_ref_[p], bucket * v);
  }
}

void CorrelationAccumulator::update(const BucketSample& bucket, const ReferenceFrame& ref) {
  update_impl(bucket.value, ref.intensity);
}

void CorrelationAccumulator::update(const BucketSample& bucket, const BinaryFrame& ref) {
  update_impl(bucket.value, ref.bits);
}

void CorrelationAccumulator::update(const BucketSample& bucket, const ProcessedReference& ref) {
  std::visit([&](const auto& frame) { update(bucket, frame); }, ref);
}

void CorrelationAccumulator::merge(const CorrelationAccumulator& other) {
  require_same_shape(other.shape_, shape_, "accumulator merge");
  count_ += other.count_;
  if (mode_ == Summation::naive) {
    sum_bucket_ += other.sum_bucket();
    sum_bucket_sq_ += other.sum_bucket_sq();
    const Grid<double> ref = other.sum_ref();
    const Grid<double> bucket_ref = other.sum_bucket_ref();
    for (std::size_t p = 0; p < ref.size(); ++p) {
      sum_ref_[p] += ref[p];
      sum_bucket_ref_[p] += bucket_ref[p];
    }
    return;
  }
  add_compensated(sum_bucket_, comp_bucket_, other.sum_bucket_);
  comp_bucket_ += other.comp_bucket_;
  add_compensated(sum_bucket_sq_, comp_bucket_sq_, other.sum_bucket_sq_);
  comp_bucket_sq_ += other.comp_bucket_sq_;
  const bool other_compensated = other.mode_ == Summation::compensated;
  for (std::size_t p = 0; p < sum_ref_.size(); ++p) {
    add_compensated(sum_ref_[p], comp_ref_[p], other.sum_ref_[p]);
    add_compensated(sum_bucket_ref_[p], comp_bucket_ref_[p], other.sum_bucket_ref_[p]);
    if (other_compensated) {
      comp_ref_[p] += other.comp_ref_[p];
      comp_bucket_ref_[p] += other.comp_bucket_ref_[p];
    }
  }
}

Grid<double> CorrelationAccumulator::sum_ref() const {
  if (mode_ == Summation::naive) return sum_ref_;
  Grid<double> out(shape_);
  for (std::size_t p = 0; p < out.size(); ++p) out[p] = sum_ref_[p] + comp_ref_[p];
  return out;
}

Grid<double> CorrelationAccumulator::sum_bucket_ref() const {
  if (mode_ == Summation::naive) return sum_bucket_ref_;
  Grid<double> out(shape_);
  for (std::size_t p = 0; p < out.size(); ++p) {
    out[p] = sum_bucket_ref_[p] + comp_bucket_ref_[p];
  }
  return out;
}

CorrelationAccumulator acc_merge(const CorrelationAccumulator& a, const CorrelationAccumulator& b) {
  CorrelationAccumulator out = a;
  out.merge(b);
  return out;
}

Reconstruction acc_finalize(const CorrelationAccumulator& acc, MethodTag method) {
  if (acc.count() < 2) {
    throw InsufficientDataError("fluctuation correlation needs >= 2 measurements, have " +
                                std::to_string(acc.count()));
  }
  const double k = static_cast<double>(acc.count());
  const double mean_bucket = acc.sum_bucket() / k;
  const Grid<double> ref = acc.sum_ref();
  const Grid<double> bucket_ref = acc.sum_bucket_ref();

  Reconstruction rec{Grid<double>(acc.shape()), acc.count(), method};
  for (std::size_t p = 0; p < ref.size(); ++p) {
    rec.image[p] = bucket_ref[p] / k - mean_bucket * (ref[p] / k);
  }
  return rec;
}

Grid<std::uint8_t> normalize_display(const Grid<double>& image) {
  Grid<std::uint8_t> out(image.shape(), 0);
  if (image.empty()) return out;
  const auto [lo_it, hi_it] = std::minmax_element(image.begin(), image.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (!(hi > lo)) return out;
  for (std::size_t p = 0; p < image.size(); ++p) {
    const double code = std::floor((image[p] - lo) / (hi - lo) * 255.0 + 0.5);
    out[p] = static_cast<std::uint8_t>(std::clamp(code, 0.0, 255.0));
  }
  return out;
}

}  // namespace gi
