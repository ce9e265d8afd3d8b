#include "ghostimg/stack_file.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

namespace gi {
namespace {

constexpr std::array<char, 4> kMagic{'G', 'I', 'F', 'S'};

template <typename U>
void put_le(std::vector<unsigned char>& out, U value) {
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    out.push_back(static_cast<unsigned char>(value >> (8 * i)));
  }
}

template <typename U>
U get_le(const unsigned char* p) {
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(U{p[i]} << (8 * i));
  return value;
}

[[noreturn]] void format_error(const std::filesystem::path& path, std::uint64_t offset,
                               const std::string& what) {
  throw FormatError("frame stack '" + path.string() + "' at offset " + std::to_string(offset) +
                    ": " + what);
}

}  // namespace

void write_stack(const MeasurementRun& run, const std::filesystem::path& path) {
  const Shape shape = run.shape();
  if (shape.rows > 0xFFFFFFFFu || shape.cols > 0xFFFFFFFFu || run.count() > 0xFFFFFFFFu) {
    throw ParameterError("run too large for the frame-stack format");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FilesystemError("cannot create '" + path.string() + "'");

  std::vector<unsigned char> bytes;
  bytes.insert(bytes.end(), kMagic.begin(), kMagic.end());
  put_le<std::uint16_t>(bytes, kStackVersion);
  put_le<std::uint32_t>(bytes, static_cast<std::uint32_t>(shape.rows));
  put_le<std::uint32_t>(bytes, static_cast<std::uint32_t>(shape.cols));
  put_le<std::uint32_t>(bytes, static_cast<std::uint32_t>(run.count()));
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));

  std::vector<unsigned char> buckets;
  buckets.reserve(run.count() * 8);
  for (const Measurement& m : run) {
    bytes.clear();
    for (float v : m.frame.intensity) put_le<std::uint32_t>(bytes, std::bit_cast<std::uint32_t>(v));
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    put_le<std::uint64_t>(buckets, std::bit_cast<std::uint64_t>(m.bucket.value));
  }
  out.write(reinterpret_cast<const char*>(buckets.data()),
            static_cast<std::streamsize>(buckets.size()));
  out.flush();
  if (!out) throw FilesystemError("write failed for '" + path.string() + "'");
}

MeasurementRun read_stack(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw FilesystemError("cannot open '" + path.string() + "'");
  const auto file_size = static_cast<std::uint64_t>(in.tellg());
  in.seekg(0);

  std::array<unsigned char, kStackHeaderBytes> header{};
  if (file_size < kStackHeaderBytes) {
    format_error(path, file_size, "header truncated (need 18 bytes)");
  }
  in.read(reinterpret_cast<char*>(header.data()), kStackHeaderBytes);
  if (std::memcmp(header.data(), kMagic.data(), kMagic.size()) != 0) {
    format_error(path, 0, "bad magic (expected \"GIFS\")");
  }
  const auto version = get_le<std::uint16_t>(header.data() + 4);
  if (version != kStackVersion) {
    format_error(path, 4, "unsupported version " + std::to_string(version));
  }
  const auto rows = get_le<std::uint32_t>(header.data() + 6);
  const auto cols = get_le<std::uint32_t>(header.data() + 10);
  const auto count = get_le<std::uint32_t>(header.data() + 14);
  if (rows == 0) format_error(path, 6, "rows must be >= 1");
  if (cols == 0) format_error(path, 10, "cols must be >= 1");
  if (count == 0) format_error(path, 14, "count must be >= 1");

  const std::uint64_t expected = stack_file_size(rows, cols, count);
  if (file_size < expected) {
    format_error(path, file_size,
                 "payload truncated (expected " + std::to_string(expected) + " bytes)");
  }
  if (file_size > expected) format_error(path, expected, "unexpected trailing data");

  const Shape shape{rows, cols};
  std::vector<unsigned char> raw(shape.size() * 4);
  std::vector<ReferenceFrame> frames;
  frames.reserve(count);
  for (std::uint32_t k = 0; k < count; ++k) {
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!in) format_error(path, static_cast<std::uint64_t>(in.tellg()), "read failed");
    ReferenceFrame frame{Grid<float>(shape), k};
    for (std::size_t p = 0; p < shape.size(); ++p) {
      frame.intensity[p] = std::bit_cast<float>(get_le<std::uint32_t>(raw.data() + 4 * p));
    }
    frames.push_back(std::move(frame));
  }
  std::vector<unsigned char> bucket_raw(std::size_t{count} * 8);
  in.read(reinterpret_cast<char*>(bucket_raw.data()),
          static_cast<std::streamsize>(bucket_raw.size()));
  if (!in) format_error(path, expected - bucket_raw.size(), "bucket block read failed");
  std::vector<BucketSample> buckets(count);
  for (std::uint32_t k = 0; k < count; ++k) {
    buckets[k] = {std::bit_cast<double>(get_le<std::uint64_t>(bucket_raw.data() + 8 * k)), k};
  }
  return MeasurementRun::stored(std::move(frames), std::move(buckets));
}

}  // namespace gi
