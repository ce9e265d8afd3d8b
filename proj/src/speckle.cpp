#include "ghostimg/speckle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "ghostimg/philox.hpp"

namespace gi {
namespace {

// Counter word 3 selects the stream drawn from the per-seed key.
constexpr std::uint32_t kFieldStream = 0;
constexpr std::uint32_t kBucketNoiseStream = 1;

// Mirror index into [0, n) with the edge sample repeated (... 1 0 | 0 1 ...).
std::size_t reflect(std::ptrdiff_t i, std::size_t n) {
  const auto period = static_cast<std::ptrdiff_t>(2 * n);
  std::ptrdiff_t m = i % period;
  if (m < 0) m += period;
  return static_cast<std::size_t>(m < static_cast<std::ptrdiff_t>(n) ? m : period - 1 - m);
}

// Separable convolution with mirrored borders, rows first then columns.
void blur(std::vector<double>& field, const Shape& shape, const std::vector<double>& taps) {
  if (taps.size() == 1) return;
  const auto radius = static_cast<std::ptrdiff_t>(taps.size() / 2);
  std::vector<double> tmp(field.size());

  std::vector<double> padded(shape.cols + 2 * static_cast<std::size_t>(radius));
  for (std::size_t r = 0; r < shape.rows; ++r) {
    const double* src = field.data() + r * shape.cols;
    for (std::size_t i = 0; i < padded.size(); ++i) {
      padded[i] = src[reflect(static_cast<std::ptrdiff_t>(i) - radius, shape.cols)];
    }
    double* dst = tmp.data() + r * shape.cols;
    for (std::size_t c = 0; c < shape.cols; ++c) {
      const double* window = padded.data() + c;
      double acc = 0.0;
      for (std::size_t k = 0; k < taps.size(); ++k) acc += taps[k] * window[k];
      dst[c] = acc;
    }
  }
  for (std::size_t r = 0; r < shape.rows; ++r) {
    double* dst = field.data() + r * shape.cols;
    for (std::size_t c = 0; c < shape.cols; ++c) dst[c] = 0.0;
    for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
      const double w = taps[static_cast<std::size_t>(k + radius)];
      const double* src =
          tmp.data() + reflect(static_cast<std::ptrdiff_t>(r) + k, shape.rows) * shape.cols;
      for (std::size_t c = 0; c < shape.cols; ++c) dst[c] += w * src[c];
    }
  }
}

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

template <typename T>
std::uint64_t fnv1a(std::uint64_t h, const T& value) {
  return fnv1a(h, &value, sizeof(T));
}

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ull;

}  // namespace

void SpeckleParams::validate() const {
  if (rows < 1 || cols < 1) {
    throw ParameterError("speckle grid must be at least 1x1, got " + to_string(shape()));
  }
  if (!(grain_sigma >= 0.0) || !std::isfinite(grain_sigma)) {
    throw ParameterError("grain_sigma must be finite and >= 0, got " +
                         std::to_string(grain_sigma));
  }
  if (!(mean_intensity > 0.0) || !std::isfinite(mean_intensity)) {
    throw ParameterError("mean_intensity must be finite and > 0, got " +
                         std::to_string(mean_intensity));
  }
}

std::vector<double> gaussian_kernel(double sigma) {
  if (sigma <= 0.0) return {1.0};
  const auto radius = static_cast<std::ptrdiff_t>(std::ceil(4.0 * sigma));
  std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
    const double w = std::exp(-0.5 * static_cast<double>(k * k) / (sigma * sigma));
    taps[static_cast<std::size_t>(k + radius)] = w;
    total += w;
  }
  for (double& w : taps) w /= total;
  return taps;
}

ReferenceFrame generate_frame(const SpeckleParams& params, std::uint64_t frame_index) {
  params.validate();
  const Shape shape = params.shape();
  const Philox4x32 rng(params.seed);
  const auto frame_lo = static_cast<std::uint32_t>(frame_index);
  const auto frame_hi = static_cast<std::uint32_t>(frame_index >> 32);

  // Circular complex Gaussian with E|z|^2 = 1.
  std::vector<double> re(shape.size());
  std::vector<double> im(shape.size());
  const double quadrature_sd = std::sqrt(0.5);
  for (std::size_t p = 0; p < shape.size(); ++p) {
    const auto block = rng({static_cast<std::uint32_t>(p), frame_lo, frame_hi, kFieldStream});
    const auto [a, b] = normal_pair(block);
    re[p] = quadrature_sd * a;
    im[p] = quadrature_sd * b;
  }

  const std::vector<double> taps = gaussian_kernel(params.grain_sigma);
  blur(re, shape, taps);
  blur(im, shape, taps);

  // Filtering scales the field variance by sum(w^2) over the 2-D kernel.
  double energy_1d = 0.0;
  for (double w : taps) energy_1d += w * w;
  const double scale = params.mean_intensity / (energy_1d * energy_1d);

  ReferenceFrame frame{Grid<float>(shape), frame_index};
  for (std::size_t p = 0; p < shape.size(); ++p) {
    frame.intensity[p] = static_cast<float>(scale * (re[p] * re[p] + im[p] * im[p]));
  }
  return frame;
}

BucketSample bucket_measure(const ReferenceFrame& frame, const ObjectMask& object) {
  require_same_shape(frame.shape(), object.shape(), "bucket_measure");
  double total = 0.0;
  for (std::size_t i = 0; i < frame.intensity.size(); ++i) {
    total += object.transmission[i] * static_cast<double>(frame.intensity[i]);
  }
  return {total, frame.frame_index};
}

MeasurementRun MeasurementRun::synthetic(const SpeckleParams& params, ObjectMask object,
                                         std::size_t count, double bucket_noise_sigma) {
  params.validate();
  require_same_shape(params.shape(), object.shape(), "measurement run object");
  if (count < 1) throw ParameterError("measurement count must be >= 1");
  if (!(bucket_noise_sigma >= 0.0)) {
    throw ParameterError("bucket noise sigma must be >= 0");
  }

  std::uint64_t h = kFnvOffset;
  h = fnv1a(h, params.rows);
  h = fnv1a(h, params.cols);
  h = fnv1a(h, std::bit_cast<std::uint64_t>(params.grain_sigma));
  h = fnv1a(h, std::bit_cast<std::uint64_t>(params.mean_intensity));
  h = fnv1a(h, params.seed);
  h = fnv1a(h, std::bit_cast<std::uint64_t>(bucket_noise_sigma));
  h = fnv1a(h, object.label.data(), object.label.size());
  for (double t : object.transmission) h = fnv1a(h, std::bit_cast<std::uint64_t>(t));

  MeasurementRun run;
  run.count_ = count;
  run.shape_ = params.shape();
  run.fingerprint_ = h;
  run.synthetic_ = Synthetic{params, std::make_shared<const ObjectMask>(std::move(object)),
                             bucket_noise_sigma};
  return run;
}

MeasurementRun MeasurementRun::stored(std::vector<ReferenceFrame> frames,
                                      std::vector<BucketSample> buckets) {
  if (frames.empty()) throw ParameterError("stored run needs at least one frame");
  if (frames.size() != buckets.size()) {
    throw DimensionError("stored run has " + std::to_string(frames.size()) + " frames but " +
                         std::to_string(buckets.size()) + " bucket values");
  }
  const Shape shape = frames.front().shape();
  std::uint64_t h = kFnvOffset;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    require_same_shape(frames[i].shape(), shape, "stored run frame");
    if (frames[i].frame_index != i || buckets[i].frame_index != i) {
      throw ParameterError("stored run frame indices must run 0, 1, 2, ...");
    }
    for (float v : frames[i].intensity) h = fnv1a(h, std::bit_cast<std::uint32_t>(v));
    h = fnv1a(h, std::bit_cast<std::uint64_t>(buckets[i].value));
  }

  MeasurementRun run;
  run.count_ = frames.size();
  run.shape_ = shape;
  run.fingerprint_ = h;
  run.stored_ = Stored{std::make_shared<const std::vector<ReferenceFrame>>(std::move(frames)),
                       std::make_shared<const std::vector<BucketSample>>(std::move(buckets))};
  return run;
}

Measurement MeasurementRun::at(std::size_t index) const {
  if (index >= count_) {
    throw ParameterError("measurement index " + std::to_string(index) + " out of range " +
                         std::to_string(count_));
  }
  if (stored_) return {(*stored_->frames)[index], (*stored_->buckets)[index]};

  const Synthetic& s = *synthetic_;
  Measurement m{generate_frame(s.params, index), {}};
  m.bucket = bucket_measure(m.frame, *s.object);
  if (s.noise_sigma > 0.0) {
    const Philox4x32 rng(s.params.seed);
    const auto block = rng({0, static_cast<std::uint32_t>(index),
                            static_cast<std::uint32_t>(std::uint64_t{index} >> 32),
                            kBucketNoiseStream});
    m.bucket.value = std::max(0.0, m.bucket.value + s.noise_sigma * normal_pair(block).first);
  }
  return m;
}

MeasurementRun generate_run(const SpeckleParams& params, const ObjectMask& object,
                            std::size_t count) {
  return MeasurementRun::synthetic(params, object, count);
}

}  // namespace gi
