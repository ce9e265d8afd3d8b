#include "ghostimg/pnm.hpp"

#include <png.h>

#include <cctype>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

namespace gi {
namespace {

std::string describe(const std::filesystem::path& path) { return "'" + path.string() + "'"; }

// Reads one whitespace-delimited header token, skipping '#' comments.
std::string header_token(std::istream& in, const std::filesystem::path& path) {
  std::string token;
  int ch = in.get();
  while (ch != EOF) {
    if (ch == '#') {
      while (ch != EOF && ch != '\n' && ch != '\r') ch = in.get();
    } else if (std::isspace(ch)) {
      if (!token.empty()) return token;
    } else {
      token.push_back(static_cast<char>(ch));
    }
    ch = in.get();
  }
  if (token.empty()) throw FormatError("truncated PGM header in " + describe(path));
  return token;
}

std::uint32_t header_number(std::istream& in, const std::filesystem::path& path,
                            const char* field) {
  const std::string token = header_token(in, path);
  std::size_t used = 0;
  unsigned long value = 0;
  try {
    value = std::stoul(token, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != token.size() || value > 0xFFFFFFFFul) {
    throw FormatError("bad PGM " + std::string(field) + " '" + token + "' in " + describe(path));
  }
  return static_cast<std::uint32_t>(value);
}

struct FileCloser {
  void operator()(std::FILE* f) const noexcept { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FilesystemError("cannot open " + describe(path));

  char magic[2] = {};
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || magic[1] != '5') {
    throw FormatError(describe(path) + " is not a binary PGM (P5)");
  }
  const std::uint32_t width = header_number(in, path, "width");
  const std::uint32_t height = header_number(in, path, "height");
  const std::uint32_t max_value = header_number(in, path, "maxval");
  if (width == 0 || height == 0) throw FormatError("empty PGM raster in " + describe(path));
  if (max_value == 0 || max_value > 65535) {
    throw FormatError("PGM maxval " + std::to_string(max_value) + " out of range in " +
                      describe(path));
  }

  const std::size_t bytes_per_sample = max_value > 255 ? 2 : 1;
  const Shape shape{height, width};
  std::vector<unsigned char> raw(shape.size() * bytes_per_sample);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
    throw FormatError("truncated PGM raster in " + describe(path));
  }

  GrayImage image{Grid<std::uint16_t>(shape), max_value};
  for (std::size_t i = 0; i < shape.size(); ++i) {
    const std::uint16_t code =
        bytes_per_sample == 2 ? static_cast<std::uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1])
                              : raw[i];
    if (code > max_value) {
      throw FormatError("PGM sample exceeds maxval in " + describe(path));
    }
    image.codes[i] = code;
  }
  return image;
}

void write_pgm(const GrayImage& image, const std::filesystem::path& path) {
  if (image.max_value == 0 || image.max_value > 65535) {
    throw ParameterError("PGM maxval must be in [1, 65535]");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FilesystemError("cannot create " + describe(path));

  out << "P5\n" << image.codes.cols() << ' ' << image.codes.rows() << '\n'
      << image.max_value << '\n';
  const bool wide = image.max_value > 255;
  std::vector<unsigned char> raw;
  raw.reserve(image.codes.size() * (wide ? 2 : 1));
  for (std::uint16_t code : image.codes) {
    if (wide) raw.push_back(static_cast<unsigned char>(code >> 8));
    raw.push_back(static_cast<unsigned char>(code & 0xFF));
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) throw FilesystemError("write failed for " + describe(path));
}

void write_pgm8(const Grid<std::uint8_t>& image, const std::filesystem::path& path) {
  GrayImage wide{Grid<std::uint16_t>(image.shape()), 255};
  for (std::size_t i = 0; i < image.size(); ++i) wide.codes[i] = image[i];
  write_pgm(wide, path);
}

GrayImage read_png(const std::filesystem::path& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw FilesystemError("cannot open " + describe(path));

  png_byte signature[8] = {};
  if (std::fread(signature, 1, 8, file.get()) != 8 || png_sig_cmp(signature, 0, 8) != 0) {
    throw FormatError(describe(path) + " is not a PNG file");
  }

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw FormatError("libpng initialisation failed for " + describe(path));
  }

  GrayImage image;
  // Everything libpng may longjmp across is declared before setjmp.
  std::vector<png_bytep> rows;
  std::vector<png_byte> raw;
  std::string failure;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("corrupt PNG data in " + describe(path));
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  const int color_type = png_get_color_type(png, info);
  if (color_type != PNG_COLOR_TYPE_GRAY || (bit_depth != 8 && bit_depth != 16)) {
    failure = "unsupported PNG layout (need 8- or 16-bit grayscale) in " + describe(path);
  } else {
    const std::size_t bytes = bit_depth == 16 ? 2 : 1;
    const Shape shape{height, width};
    raw.resize(shape.size() * bytes);
    rows.resize(height);
    for (png_uint_32 r = 0; r < height; ++r) rows[r] = raw.data() + r * width * bytes;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);

    image.max_value = bit_depth == 16 ? 65535 : 255;
    image.codes = Grid<std::uint16_t>(shape);
    for (std::size_t i = 0; i < shape.size(); ++i) {
      image.codes[i] = bytes == 2 ? static_cast<std::uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1])
                                  : raw[i];
    }
  }
  png_destroy_read_struct(&png, &info, nullptr);
  if (!failure.empty()) throw FormatError(failure);
  return image;
}

void write_png(const GrayImage& image, const std::filesystem::path& path) {
  const int bit_depth = image.max_value > 255 ? 16 : 8;
  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) throw FilesystemError("cannot create " + describe(path));

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, nullptr);
    throw FilesystemError("libpng initialisation failed for " + describe(path));
  }
  const std::size_t bytes = bit_depth == 16 ? 2 : 1;
  std::vector<png_byte> raw(image.codes.size() * bytes);
  for (std::size_t i = 0; i < image.codes.size(); ++i) {
    if (bytes == 2) {
      raw[2 * i] = static_cast<png_byte>(image.codes[i] >> 8);
      raw[2 * i + 1] = static_cast<png_byte>(image.codes[i] & 0xFF);
    } else {
      raw[i] = static_cast<png_byte>(image.codes[i]);
    }
  }
  std::vector<png_bytep> rows(image.codes.rows());
  for (std::size_t r = 0; r < rows.size(); ++r) rows[r] = raw.data() + r * image.codes.cols() * bytes;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw FilesystemError("PNG encoding failed for " + describe(path));
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.codes.cols()),
               static_cast<png_uint_32>(image.codes.rows()), bit_depth, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace gi
