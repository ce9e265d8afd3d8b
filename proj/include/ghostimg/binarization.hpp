#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ghostimg/grid.hpp"
#include "ghostimg/speckle.hpp"

namespace gi {

inline constexpr int kDefaultLevels = 256;

/// Linear min-max quantization of a frame onto `levels` integer codes.
struct QuantizedFrame {
  int levels = kDefaultLevels;
  Grid<std::uint16_t> codes;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::uint64_t> histogram;

  /// Intensity represented by `code`.
  [[nodiscard]] double intensity_of(int code) const noexcept {
    return lo + static_cast<double>(code) * (hi - lo) / static_cast<double>(levels - 1);
  }
};

QuantizedFrame quantize(const Grid<float>& values, int levels = kDefaultLevels);
inline QuantizedFrame quantize(const ReferenceFrame& frame, int levels = kDefaultLevels) {
  return quantize(frame.intensity, levels);
}

double mean_threshold(const Grid<float>& values);
inline double mean_threshold(const ReferenceFrame& frame) {
  return mean_threshold(frame.intensity);
}

/// Result of the between-class variance search over a histogram.
struct OtsuSplit {
  int level = 0;                  ///< class 0 holds codes <= level
  double between_variance = 0.0;  ///< omega0 * omega1 * (mu0 - mu1)^2, in code units
};

/// Maximize between-class variance over 0 <= k < L-1; ties go to the smallest k.
OtsuSplit otsu_split(std::span<const std::uint64_t> histogram);

/// Otsu threshold mapped back to intensity units. A histogram with a single
/// occupied bin yields that bin's intensity.
double otsu_threshold(const QuantizedFrame& q);

struct BlockSpec {
  std::size_t k1 = 16;  ///< block rows
  std::size_t k2 = 16;  ///< block cols

  void validate(const Shape& frame) const;
  friend bool operator==(const BlockSpec&, const BlockSpec&) = default;
};

/// Per-pixel thresholds and their harmonization with the global threshold.
struct ThresholdMap {
  Grid<double> local;
  double global_t = 0.0;
  std::optional<double> alpha;
  Grid<double> effective;  ///< empty until harmonized

  [[nodiscard]] const Shape& shape() const noexcept { return local.shape(); }
};

/// Threshold of every pixel in a k1 x k2 block as a convex combination of the
/// block's own Otsu corner and the corners of its right and lower neighbours.
///
/// The first row interpolates linearly toward the right neighbour's corner,
/// the first column toward the lower neighbour's corner. The remaining pixels
/// are filled in row-major order, each as the normalized weighted sum of all
/// previously assigned pixels (i, j) <= (r, c) with weight
/// (1 - 1/(r + c - 1))^((r - i) + (c - j)) in 1-based indices.
/// Because the recurrence is linear, each pixel reduces to three fixed
/// coefficients, which are computed once here.
class PropagationWeights {
 public:
  explicit PropagationWeights(BlockSpec block);

  [[nodiscard]] const BlockSpec& block() const noexcept { return block_; }
  [[nodiscard]] double own(std::size_t r, std::size_t c) const { return own_(r, c); }
  [[nodiscard]] double right(std::size_t r, std::size_t c) const { return right_(r, c); }
  [[nodiscard]] double below(std::size_t r, std::size_t c) const { return below_(r, c); }

 private:
  BlockSpec block_;
  Grid<double> own_;
  Grid<double> right_;
  Grid<double> below_;
};

/// Block-corner Otsu thresholds of a frame after edge replication to a
/// multiple of the block size; shape is (ceil(rows/k1), ceil(cols/k2)).
Grid<double> block_corner_thresholds(const Grid<float>& values, const BlockSpec& block,
                                     int levels = kDefaultLevels);

/// Point-by-point local threshold map plus the frame's global Otsu threshold.
/// `alpha` is left unset; see `harmonize`.
ThresholdMap ppb_threshold_map(const ReferenceFrame& frame, const BlockSpec& block,
                               int levels = kDefaultLevels);
ThresholdMap ppb_threshold_map(const ReferenceFrame& frame, const PropagationWeights& weights,
                               int levels = kDefaultLevels);

/// effective = (1 - alpha) * local + alpha * global_t.
ThresholdMap harmonize(ThresholdMap map, double alpha);

/// Binary reference frame, each value exactly 0 or 1.
struct BinaryFrame {
  Grid<std::uint8_t> bits;
  std::uint64_t frame_index = 0;

  [[nodiscard]] const Shape& shape() const noexcept { return bits.shape(); }
};

/// bit = 1 iff intensity > threshold.
BinaryFrame binarize(const ReferenceFrame& frame, const Grid<double>& effective);
BinaryFrame binarize_uniform(const ReferenceFrame& frame, double threshold);

enum class MethodTag { none, mean, otsu, point_by_point };

/// Reference-beam processing strategy.
class BinarizationMethod {
 public:
  static BinarizationMethod none() { return BinarizationMethod(MethodTag::none); }
  static BinarizationMethod mean() { return BinarizationMethod(MethodTag::mean); }
  static BinarizationMethod otsu() { return BinarizationMethod(MethodTag::otsu); }
  static BinarizationMethod point_by_point(BlockSpec block, double alpha);

  [[nodiscard]] MethodTag tag() const noexcept { return tag_; }
  [[nodiscard]] const std::optional<BlockSpec>& block() const noexcept { return block_; }
  [[nodiscard]] const std::optional<double>& alpha() const noexcept { return alpha_; }

  /// Short report name: tgi, mbgi, obgi, ppbgi (with alpha when not default).
  [[nodiscard]] std::string name() const;

  friend bool operator==(const BinarizationMethod&, const BinarizationMethod&) = default;

 private:
  explicit BinarizationMethod(MethodTag tag) : tag_(tag) {}

  MethodTag tag_;
  std::optional<BlockSpec> block_;
  std::optional<double> alpha_;
};

/// Parse "tgi|none", "mbgi|mean", "obgi|otsu", "ppbgi|point_by_point".
/// Point-by-point parameters come from `block` and `alpha`.
BinarizationMethod parse_method(const std::string& text, BlockSpec block, double alpha);

/// Either the untouched frame (no binarization) or its binary version.
using ProcessedReference = std::variant<ReferenceFrame, BinaryFrame>;

/// Stateful dispatcher; caches the propagation weights between frames.
class Binarizer {
 public:
  explicit Binarizer(BinarizationMethod method, int levels = kDefaultLevels);

  [[nodiscard]] const BinarizationMethod& method() const noexcept { return method_; }
  [[nodiscard]] ProcessedReference operator()(const ReferenceFrame& frame) const;

 private:
  BinarizationMethod method_;
  int levels_;
  std::optional<PropagationWeights> weights_;
};

ProcessedReference binarize_with_method(const ReferenceFrame& frame,
                                        const BinarizationMethod& method,
                                        int levels = kDefaultLevels);

}  // namespace gi
