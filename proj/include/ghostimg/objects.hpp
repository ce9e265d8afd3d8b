#pragma once

#include <cstddef>
#include <filesystem>
#include <string>

#include "ghostimg/grid.hpp"

namespace gi {

/// Transmission mask of the imaged object, values in [0, 1].
struct ObjectMask {
  Grid<double> transmission;
  std::string label;

  [[nodiscard]] const Shape& shape() const noexcept { return transmission.shape(); }
};

enum class SlitOrientation { vertical, horizontal };

struct DoubleSlitSpec {
  Shape shape{128, 128};
  std::size_t slit_width_px = 4;
  std::size_t separation_px = 12;  ///< center to center
  std::size_t slit_height_px = 64;
  SlitOrientation orientation = SlitOrientation::vertical;

  /// Pixel sizes from physical dimensions at `pitch_mm` per pixel. Height
  /// defaults to half the grid extent along the slits.
  static DoubleSlitSpec from_physical(Shape shape, double slit_width_mm, double separation_mm,
                                      double pitch_mm);
};

/// Two opaque-surround slits centered in the grid.
ObjectMask make_double_slit(const DoubleSlitSpec& spec);

/// Procedural grayscale test object: a bird with spread, feathered wings.
/// Used where a detailed continuous-tone target is needed.
ObjectMask make_feather_bird(Shape shape);

/// Grayscale PGM (P5, 8 or 16 bit) or PNG, rescaled by the maximum code value.
ObjectMask load_object(const std::filesystem::path& path);

/// Write the mask as a 16-bit P5 PGM.
void save_object(const ObjectMask& object, const std::filesystem::path& path);

}  // namespace gi
