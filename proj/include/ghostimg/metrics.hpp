#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ghostimg/binarization.hpp"
#include "ghostimg/grid.hpp"

namespace gi {

struct MetricsReport {
  std::string method;
  std::uint64_t seed = 0;
  std::uint64_t count = 0;
  std::optional<double> corr;
  std::optional<double> fill_fraction;
  std::optional<double> grain_fwhm_px;
  std::optional<double> wall_ms;
};

/// Pearson correlation coefficient with population moments.
double corr(const Grid<double>& g, const Grid<double>& o);

double fill_fraction(const BinaryFrame& b);

/// Central row/column average of the periodic, mean-subtracted autocorrelation
/// normalized to 1 at zero lag. Index i holds lag i, up to the half extent.
std::vector<double> autocorrelation_profile(const Grid<double>& frame);

/// Full width at half maximum of `autocorrelation_profile`, linearly
/// interpolated between lattice lags. Throws for constant frames.
double grain_fwhm(const Grid<double>& frame);
double grain_fwhm(const ReferenceFrame& frame);
double grain_fwhm(const BinaryFrame& frame);

template <typename T>
Grid<double> to_double(const Grid<T>& g) {
  Grid<double> out(g.shape());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = static_cast<double>(g[i]);
  return out;
}

}  // namespace gi
