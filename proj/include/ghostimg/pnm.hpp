#pragma once

#include <cstdint>
#include <filesystem>

#include "ghostimg/grid.hpp"

namespace gi {

/// Raw grayscale raster together with its maximum code value.
struct GrayImage {
  Grid<std::uint16_t> codes;
  std::uint32_t max_value = 255;
};

/// Binary PGM (P5). Samples wider than 8 bits are big-endian.
GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const GrayImage& image, const std::filesystem::path& path);
void write_pgm8(const Grid<std::uint8_t>& image, const std::filesystem::path& path);

/// 8- or 16-bit grayscale PNG (no alpha, no palette).
GrayImage read_png(const std::filesystem::path& path);
void write_png(const GrayImage& image, const std::filesystem::path& path);

}  // namespace gi
