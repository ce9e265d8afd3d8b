#include "ghostimg/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace gi {

double corr(const Grid<double>& g, const Grid<double>& o) {
  require_same_shape(g.shape(), o.shape(), "corr");
  if (g.empty()) throw DimensionError("corr of empty grids");
  const double n = static_cast<double>(g.size());
  double mean_g = 0.0;
  double mean_o = 0.0;
  for (std::size_t p = 0; p < g.size(); ++p) {
    mean_g += g[p];
    mean_o += o[p];
  }
  mean_g /= n;
  mean_o /= n;

  double cov = 0.0;
  double var_g = 0.0;
  double var_o = 0.0;
  for (std::size_t p = 0; p < g.size(); ++p) {
    const double dg = g[p] - mean_g;
    const double d_o = o[p] - mean_o;
    cov += dg * d_o;
    var_g += dg * dg;
    var_o += d_o * d_o;
  }
  if (var_g == 0.0 || var_o == 0.0) {
    throw UndefinedVarianceError("corr is undefined for a constant image");
  }
  return std::clamp(cov / std::sqrt(var_g * var_o), -1.0, 1.0);
}

double fill_fraction(const BinaryFrame& b) {
  if (b.bits.empty()) throw DimensionError("fill fraction of an empty frame");
  std::size_t ones = 0;
  for (std::uint8_t v : b.bits) ones += v;
  return static_cast<double>(ones) / static_cast<double>(b.bits.size());
}

std::vector<double> autocorrelation_profile(const Grid<double>& frame) {
  if (frame.empty()) throw DimensionError("autocorrelation of an empty frame");
  const std::size_t rows = frame.rows();
  const std::size_t cols = frame.cols();
  double mean = 0.0;
  for (double v : frame) mean += v;
  mean /= static_cast<double>(frame.size());
  Grid<double> centered(frame.shape());
  double zero_lag = 0.0;
  for (std::size_t p = 0; p < frame.size(); ++p) {
    centered[p] = frame[p] - mean;
    zero_lag += centered[p] * centered[p];
  }
  if (zero_lag == 0.0) {
    throw UndefinedVarianceError("autocorrelation is undefined for a constant frame");
  }

  // Only the zero-row and zero-column lags of the periodic autocorrelation
  // are needed, so they are summed directly.
  const std::size_t half = std::max<std::size_t>(1, std::min(rows, cols) / 2);
  std::vector<double> profile(half + 1);
  profile[0] = 1.0;
  for (std::size_t lag = 1; lag <= half; ++lag) {
    double along_row = 0.0;
    double along_col = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
      const std::size_t r2 = (r + lag) % rows;
      for (std::size_t c = 0; c < cols; ++c) {
        const double v = centered(r, c);
        along_row += v * centered(r, (c + lag) % cols);
        along_col += v * centered(r2, c);
      }
    }
    profile[lag] = 0.5 * (along_row + along_col) / zero_lag;
  }
  return profile;
}

double grain_fwhm(const Grid<double>& frame) {
  const std::vector<double> profile = autocorrelation_profile(frame);
  for (std::size_t lag = 1; lag < profile.size(); ++lag) {
    if (profile[lag] <= 0.5) {
      const double above = profile[lag - 1];
      const double below = profile[lag];
      const double crossing =
          static_cast<double>(lag - 1) + (above - 0.5) / (above - below);
      return 2.0 * crossing;
    }
  }
  // Never drops to half maximum within the half extent.
  return 2.0 * static_cast<double>(profile.size() - 1);
}

double grain_fwhm(const ReferenceFrame& frame) { return grain_fwhm(to_double(frame.intensity)); }

double grain_fwhm(const BinaryFrame& frame) { return grain_fwhm(to_double(frame.bits)); }

}  // namespace gi
