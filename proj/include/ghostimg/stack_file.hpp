#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>

#include "ghostimg/speckle.hpp"

namespace gi {

/// Frame-stack container ("GIFS", version 1), all fields little-endian:
///
///   offset  size  field
///   0       4     magic "GIFS"
///   4       2     version (u16) = 1
///   6       4     rows (u32)
///   10      4     cols (u32)
///   14      4     count (u32)
///   18      ...   count frames of rows*cols f32, row-major
///   ...     ...   count bucket values, f64
inline constexpr std::size_t kStackHeaderBytes = 18;
inline constexpr std::uint16_t kStackVersion = 1;

[[nodiscard]] constexpr std::uint64_t stack_file_size(std::uint64_t rows, std::uint64_t cols,
                                                      std::uint64_t count) noexcept {
  return kStackHeaderBytes + count * (rows * cols * 4 + 8);
}

/// Streams the run to disk frame by frame.
void write_stack(const MeasurementRun& run, const std::filesystem::path& path);

/// Reads and validates a whole stack. Any header or length problem raises
/// FormatError naming the byte offset; nothing is returned on failure.
MeasurementRun read_stack(const std::filesystem::path& path);

}  // namespace gi
