#include "ghostimg/binarization.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>

namespace gi {
namespace {

__extension__ typedef unsigned __int128 u128;

int bit_width(std::uint64_t v) { return static_cast<int>(std::bit_width(v)); }

void require_levels(int levels) {
  if (levels < 2 || levels > 65536) {
    throw ParameterError("quantization levels must be in [2, 65536], got " +
                         std::to_string(levels));
  }
}

}  // namespace

QuantizedFrame quantize(const Grid<float>& values, int levels) {
  require_levels(levels);
  if (values.empty()) throw DimensionError("cannot quantize an empty frame");

  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  QuantizedFrame q;
  q.levels = levels;
  q.lo = *lo_it;
  q.hi = *hi_it;
  q.codes = Grid<std::uint16_t>(values.shape(), 0);
  q.histogram.assign(static_cast<std::size_t>(levels), 0);

  if (q.hi == q.lo) {
    q.histogram[0] = values.size();
    return q;
  }
  const double top = static_cast<double>(levels - 1);
  const double scale = top / (q.hi - q.lo);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double code = std::floor((static_cast<double>(values[i]) - q.lo) * scale + 0.5);
    const auto c = static_cast<std::uint16_t>(std::clamp(code, 0.0, top));
    q.codes[i] = c;
    ++q.histogram[c];
  }
  return q;
}

double mean_threshold(const Grid<float>& values) {
  if (values.empty()) throw DimensionError("mean of an empty frame");
  double total = 0.0;
  for (float v : values) total += v;
  return total / static_cast<double>(values.size());
}

OtsuSplit otsu_split(std::span<const std::uint64_t> histogram) {
  if (histogram.size() < 2) throw ParameterError("Otsu needs at least two histogram bins");
  std::uint64_t total = 0;
  std::uint64_t moment = 0;
  for (std::size_t k = 0; k < histogram.size(); ++k) {
    total += histogram[k];
    moment += k * histogram[k];
  }
  if (total == 0) throw ParameterError("Otsu on an empty histogram");
  const double total_sq = static_cast<double>(total) * static_cast<double>(total);

  // sigma_b^2(k) * N^2 = (n1*s0 - n0*s1)^2 / (n0*n1). Candidates are compared
  // as exact fractions when the cross products fit in 128 bits, so that ties
  // resolve to the smallest k independently of rounding.
  const bool exact = 2 * (bit_width(total) + bit_width(moment)) + 2 * bit_width(total) <= 127;

  OtsuSplit best;
  u128 best_num = 0;
  u128 best_den = 1;
  long double best_value = -1.0L;
  std::uint64_t n0 = 0;
  std::uint64_t s0 = 0;
  for (std::size_t k = 0; k + 1 < histogram.size(); ++k) {
    n0 += histogram[k];
    s0 += k * histogram[k];
    const std::uint64_t n1 = total - n0;
    const std::uint64_t s1 = moment - s0;

    u128 num = 0;
    u128 den = 1;
    long double value = 0.0L;
    if (n0 != 0 && n1 != 0) {
      const u128 a = u128{n1} * s0;
      const u128 b = u128{n0} * s1;
      const u128 diff = a > b ? a - b : b - a;
      den = u128{n0} * n1;
      if (exact) {
        num = diff * diff;
      } else {
        const auto d = static_cast<long double>(diff);
        value = d * d / static_cast<long double>(den);
      }
    }

    const bool better = exact ? (k == 0 || num * best_den > best_num * den)
                              : (k == 0 || value > best_value);
    if (better) {
      best.level = static_cast<int>(k);
      best_num = num;
      best_den = den;
      best_value = value;
    }
  }
  const long double scaled =
      exact ? static_cast<long double>(best_num) / static_cast<long double>(best_den)
            : best_value;
  best.between_variance = static_cast<double>(scaled / static_cast<long double>(total_sq));
  return best;
}

double otsu_threshold(const QuantizedFrame& q) {
  int occupied = 0;
  int only = 0;
  for (std::size_t k = 0; k < q.histogram.size(); ++k) {
    if (q.histogram[k] != 0) {
      ++occupied;
      only = static_cast<int>(k);
    }
  }
  if (occupied == 0) throw ParameterError("Otsu on an empty histogram");
  if (occupied == 1) return q.intensity_of(only);
  return q.intensity_of(otsu_split(q.histogram).level);
}

void BlockSpec::validate(const Shape& frame) const {
  if (k1 < 2 || k2 < 2) {
    throw ParameterError("block size must be at least 2x2, got " + std::to_string(k1) + "x" +
                         std::to_string(k2));
  }
  if (frame.rows < k1 || frame.cols < k2) {
    throw DimensionError("frame " + to_string(frame) + " is smaller than one " +
                         std::to_string(k1) + "x" + std::to_string(k2) + " block");
  }
}

PropagationWeights::PropagationWeights(BlockSpec block)
    : block_(block),
      own_(Shape{block.k1, block.k2}),
      right_(Shape{block.k1, block.k2}),
      below_(Shape{block.k1, block.k2}) {
  if (block.k1 < 2 || block.k2 < 2) {
    throw ParameterError("block size must be at least 2x2");
  }
  const std::size_t k1 = block.k1;
  const std::size_t k2 = block.k2;
  const double rows = static_cast<double>(k1);
  const double cols = static_cast<double>(k2);

  own_(0, 0) = 1.0;
  for (std::size_t j = 1; j < k2; ++j) {
    own_(0, j) = (cols - static_cast<double>(j)) / cols;
    right_(0, j) = static_cast<double>(j) / cols;
  }
  for (std::size_t i = 1; i < k1; ++i) {
    own_(i, 0) = (rows - static_cast<double>(i)) / rows;
    below_(i, 0) = static_cast<double>(i) / rows;
  }

  std::vector<double> power(k1 + k2);
  for (std::size_t r = 1; r < k1; ++r) {
    for (std::size_t c = 1; c < k2; ++c) {
      // 1-based (r + 1) + (c + 1) - 1
      const double q = 1.0 - 1.0 / static_cast<double>(r + c + 1);
      power[0] = 1.0;
      for (std::size_t e = 1; e <= r + c; ++e) power[e] = power[e - 1] * q;

      double norm = 0.0;
      double a = 0.0;
      double b = 0.0;
      double d = 0.0;
      for (std::size_t i = 0; i <= r; ++i) {
        for (std::size_t j = 0; j <= c; ++j) {
          if (i == r && j == c) continue;
          const double w = power[(r - i) + (c - j)];
          norm += w;
          a += w * own_(i, j);
          b += w * right_(i, j);
          d += w * below_(i, j);
        }
      }
      own_(r, c) = a / norm;
      right_(r, c) = b / norm;
      below_(r, c) = d / norm;
    }
  }
}

Grid<double> block_corner_thresholds(const Grid<float>& values, const BlockSpec& block,
                                     int levels) {
  block.validate(values.shape());
  const std::size_t block_rows = (values.rows() + block.k1 - 1) / block.k1;
  const std::size_t block_cols = (values.cols() + block.k2 - 1) / block.k2;
  Grid<double> corners(Shape{block_rows, block_cols});
  Grid<float> tile(Shape{block.k1, block.k2});
  for (std::size_t l = 0; l < block_rows; ++l) {
    for (std::size_t h = 0; h < block_cols; ++h) {
      // Edge replication past the frame border.
      for (std::size_t i = 0; i < block.k1; ++i) {
        const std::size_t r = std::min(l * block.k1 + i, values.rows() - 1);
        for (std::size_t j = 0; j < block.k2; ++j) {
          const std::size_t c = std::min(h * block.k2 + j, values.cols() - 1);
          tile(i, j) = values(r, c);
        }
      }
      corners(l, h) = otsu_threshold(quantize(tile, levels));
    }
  }
  return corners;
}

ThresholdMap ppb_threshold_map(const ReferenceFrame& frame, const BlockSpec& block, int levels) {
  block.validate(frame.shape());
  return ppb_threshold_map(frame, PropagationWeights(block), levels);
}

ThresholdMap ppb_threshold_map(const ReferenceFrame& frame, const PropagationWeights& weights,
                               int levels) {
  const BlockSpec& block = weights.block();
  const Grid<double> corners = block_corner_thresholds(frame.intensity, block, levels);
  const std::size_t last_l = corners.rows() - 1;
  const std::size_t last_h = corners.cols() - 1;

  ThresholdMap map;
  map.local = Grid<double>(frame.shape());
  for (std::size_t r = 0; r < frame.shape().rows; ++r) {
    const std::size_t l = r / block.k1;
    const std::size_t i = r % block.k1;
    for (std::size_t c = 0; c < frame.shape().cols; ++c) {
      const std::size_t h = c / block.k2;
      const std::size_t j = c % block.k2;
      // Blocks in the last row/column have no neighbour and reuse their own corner.
      const double own = corners(l, h);
      const double right = h < last_h ? corners(l, h + 1) : own;
      const double below = l < last_l ? corners(l + 1, h) : own;
      map.local(r, c) = weights.own(i, j) * own + weights.right(i, j) * right +
                        weights.below(i, j) * below;
    }
  }
  map.global_t = otsu_threshold(quantize(frame.intensity, levels));
  return map;
}

ThresholdMap harmonize(ThresholdMap map, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ParameterError("harmonic factor alpha must lie in [0, 1], got " +
                         std::to_string(alpha));
  }
  map.alpha = alpha;
  map.effective = Grid<double>(map.local.shape());
  for (std::size_t p = 0; p < map.local.size(); ++p) {
    map.effective[p] = (1.0 - alpha) * map.local[p] + alpha * map.global_t;
  }
  return map;
}

BinaryFrame binarize(const ReferenceFrame& frame, const Grid<double>& effective) {
  require_same_shape(frame.shape(), effective.shape(), "binarize");
  BinaryFrame out{Grid<std::uint8_t>(frame.shape()), frame.frame_index};
  for (std::size_t p = 0; p < effective.size(); ++p) {
    out.bits[p] = static_cast<double>(frame.intensity[p]) > effective[p] ? 1 : 0;
  }
  return out;
}

BinaryFrame binarize_uniform(const ReferenceFrame& frame, double threshold) {
  BinaryFrame out{Grid<std::uint8_t>(frame.shape()), frame.frame_index};
  for (std::size_t p = 0; p < frame.intensity.size(); ++p) {
    out.bits[p] = static_cast<double>(frame.intensity[p]) > threshold ? 1 : 0;
  }
  return out;
}

BinarizationMethod BinarizationMethod::point_by_point(BlockSpec block, double alpha) {
  if (block.k1 < 2 || block.k2 < 2) {
    throw ParameterError("point-by-point block size must be at least 2x2");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ParameterError("harmonic factor alpha must lie in [0, 1], got " +
                         std::to_string(alpha));
  }
  BinarizationMethod m(MethodTag::point_by_point);
  m.block_ = block;
  m.alpha_ = alpha;
  return m;
}

std::string BinarizationMethod::name() const {
  switch (tag_) {
    case MethodTag::none:
      return "tgi";
    case MethodTag::mean:
      return "mbgi";
    case MethodTag::otsu:
      return "obgi";
    case MethodTag::point_by_point: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "ppbgi_a%g", *alpha_);
      return buf;
    }
  }
  return "unknown";
}

BinarizationMethod parse_method(const std::string& text, BlockSpec block, double alpha) {
  std::string tag = text;
  if (const auto colon = text.find(':'); colon != std::string::npos) {
    tag = text.substr(0, colon);
    const std::string value = text.substr(colon + 1);
    std::size_t used = 0;
    try {
      alpha = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != value.size()) {
      throw ParameterError("bad alpha in method '" + text + "'");
    }
    if (tag != "ppbgi" && tag != "point_by_point" && tag != "ppb") {
      throw ParameterError("only point-by-point methods take an alpha: '" + text + "'");
    }
  }
  if (tag == "tgi" || tag == "none") return BinarizationMethod::none();
  if (tag == "mbgi" || tag == "mean") return BinarizationMethod::mean();
  if (tag == "obgi" || tag == "otsu") return BinarizationMethod::otsu();
  if (tag == "ppbgi" || tag == "point_by_point" || tag == "ppb") {
    return BinarizationMethod::point_by_point(block, alpha);
  }
  throw ParameterError("unknown binarization method '" + text + "'");
}

Binarizer::Binarizer(BinarizationMethod method, int levels)
    : method_(std::move(method)), levels_(levels) {
  require_levels(levels);
  if (method_.tag() == MethodTag::point_by_point) weights_.emplace(*method_.block());
}

ProcessedReference Binarizer::operator()(const ReferenceFrame& frame) const {
  switch (method_.tag()) {
    case MethodTag::none:
      return frame;
    case MethodTag::mean:
      return binarize_uniform(frame, mean_threshold(frame));
    case MethodTag::otsu:
      return binarize_uniform(frame, otsu_threshold(quantize(frame, levels_)));
    case MethodTag::point_by_point: {
      weights_->block().validate(frame.shape());
      const ThresholdMap map =
          harmonize(ppb_threshold_map(frame, *weights_, levels_), *method_.alpha());
      return binarize(frame, map.effective);
    }
  }
  throw ParameterError("unhandled binarization method");
}

ProcessedReference binarize_with_method(const ReferenceFrame& frame,
                                        const BinarizationMethod& method, int levels) {
  return Binarizer(method, levels)(frame);
}

}  // namespace gi
