#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "ghostimg/objects.hpp"
#include "ghostimg/pnm.hpp"

using namespace gi;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "ghostimg_test_objects";
  fs::create_directories(dir);
  return dir / name;
}

std::size_t count_ones(const ObjectMask& m) {
  std::size_t n = 0;
  for (double v : m.transmission) n += v == 1.0;
  return n;
}

}  // namespace

TEST_CASE("double slit geometry") {
  const DoubleSlitSpec spec{{128, 128}, 4, 12, 64, SlitOrientation::vertical};
  const auto mask = make_double_slit(spec);
  CHECK(mask.shape() == Shape{128, 128});
  CHECK(count_ones(mask) == 2 * 4 * 64);
  for (double v : mask.transmission) CHECK((v == 0.0 || v == 1.0));

  // Columns 56..59 and 68..71, rows 32..95.
  CHECK(mask.transmission(32, 56) == 1.0);
  CHECK(mask.transmission(95, 71) == 1.0);
  CHECK(mask.transmission(31, 56) == 0.0);
  CHECK(mask.transmission(64, 60) == 0.0);
  CHECK(mask.transmission(64, 67) == 0.0);

  SUBCASE("mirror symmetric about the pair center") {
    for (std::size_t r = 0; r < 128; ++r) {
      for (std::size_t c = 0; c < 128; ++c) CHECK(mask.transmission(r, c) == mask.transmission(r, 127 - c));
    }
    const auto odd = make_double_slit({{20, 21}, 3, 8, 9, SlitOrientation::vertical});
    // Pair spans columns 5..15.
    for (std::size_t r = 0; r < 20; ++r) {
      for (std::size_t c = 5; c <= 15; ++c) CHECK(odd.transmission(r, c) == odd.transmission(r, 20 - c));
    }
  }
  SUBCASE("touching slits form one bar") {
    const auto bar = make_double_slit({{32, 32}, 4, 4, 10, SlitOrientation::vertical});
    CHECK(count_ones(bar) == 2 * 4 * 10);
    const std::size_t row = 16;
    std::size_t first = 32, last = 0;
    for (std::size_t c = 0; c < 32; ++c) {
      if (bar.transmission(row, c) == 1.0) {
        first = std::min(first, c);
        last = std::max(last, c);
      }
    }
    CHECK(last - first + 1 == 8);
  }
  SUBCASE("horizontal orientation is the transpose") {
    const auto h = make_double_slit({{128, 128}, 4, 12, 64, SlitOrientation::horizontal});
    for (std::size_t r = 0; r < 128; ++r) {
      for (std::size_t c = 0; c < 128; ++c) CHECK(h.transmission(r, c) == mask.transmission(c, r));
    }
  }
  SUBCASE("geometry errors") {
    CHECK_THROWS_AS(make_double_slit({{32, 32}, 5, 4, 10, SlitOrientation::vertical}), GeometryError);
    CHECK_THROWS_AS(make_double_slit({{32, 32}, 8, 30, 10, SlitOrientation::vertical}), GeometryError);
    CHECK_THROWS_AS(make_double_slit({{32, 32}, 2, 6, 40, SlitOrientation::vertical}), GeometryError);
    CHECK_THROWS_AS(make_double_slit({{32, 32}, 0, 6, 4, SlitOrientation::vertical}), GeometryError);
  }
  SUBCASE("physical dimensions at 0.05 mm per pixel") {
    const auto s = DoubleSlitSpec::from_physical({128, 128}, 0.2, 0.6, 0.05);
    CHECK(s.slit_width_px == 4);
    CHECK(s.separation_px == 12);
    CHECK(s.slit_height_px == 64);
    CHECK_THROWS_AS(DoubleSlitSpec::from_physical({128, 128}, 0.2, 0.6, 0.0), ParameterError);
  }
}

TEST_CASE("feather bird test object") {
  const auto bird = make_feather_bird({128, 128});
  std::set<double> levels;
  for (double v : bird.transmission) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    levels.insert(v);
  }
  CHECK(levels.size() > 20);
  for (std::size_t r = 0; r < 128; ++r) {
    for (std::size_t c = 0; c < 128; ++c) {
      CHECK(bird.transmission(r, c) == doctest::Approx(bird.transmission(r, 127 - c)));
    }
  }
  CHECK_THROWS_AS(make_feather_bird({8, 8}), GeometryError);
}

TEST_CASE("loading grayscale images") {
  SUBCASE("8-bit PGM endpoints") {
    const auto path = scratch("endpoints.pgm");
    write_pgm(GrayImage{Grid<std::uint16_t>(Shape{1, 2}, std::vector<std::uint16_t>{0, 255}), 255},
              path);
    const auto mask = load_object(path);
    CHECK(mask.shape() == Shape{1, 2});
    CHECK(mask.transmission[0] == 0.0);
    CHECK(mask.transmission[1] == 1.0);
  }
  SUBCASE("uniform white and black") {
    const auto white = scratch("white.pgm");
    const auto black = scratch("black.pgm");
    write_pgm(GrayImage{Grid<std::uint16_t>(Shape{3, 4}, 255), 255}, white);
    write_pgm(GrayImage{Grid<std::uint16_t>(Shape{3, 4}, 0), 255}, black);
    for (double v : load_object(white).transmission) CHECK(v == 1.0);
    for (double v : load_object(black).transmission) CHECK(v == 0.0);
  }
  SUBCASE("header comments and a custom maxval") {
    const auto path = scratch("comment.pgm");
    {
      std::ofstream out(path, std::ios::binary);
      out << "P5\n# made by hand\n2 1\n# another\n100\n";
      out.put(static_cast<char>(50));
      out.put(static_cast<char>(100));
    }
    const auto mask = load_object(path);
    CHECK(mask.transmission[0] == 0.5);
    CHECK(mask.transmission[1] == 1.0);
  }
  SUBCASE("16-bit round trip within one code") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
      ObjectMask mask{Grid<double>(Shape{7 + rng() % 20, 5 + rng() % 20}), "random"};
      for (double& v : mask.transmission) v = unit(rng);
      mask.transmission[0] = 0.0;
      mask.transmission[1] = 1.0;
      const auto path = scratch("roundtrip.pgm");
      save_object(mask, path);
      const auto back = load_object(path);
      REQUIRE(back.shape() == mask.shape());
      for (std::size_t p = 0; p < mask.transmission.size(); ++p) {
        CHECK(std::abs(back.transmission[p] - mask.transmission[p]) <= 1.0 / 65535.0);
      }
    }
  }
  SUBCASE("PNG, 8 and 16 bit") {
    const auto p8 = scratch("g8.png");
    const auto p16 = scratch("g16.png");
    write_png(GrayImage{Grid<std::uint16_t>(Shape{2, 2}, std::vector<std::uint16_t>{0, 51, 102, 255}), 255}, p8);
    write_png(GrayImage{Grid<std::uint16_t>(Shape{1, 3}, std::vector<std::uint16_t>{0, 256, 65535}), 65535}, p16);
    const auto m8 = load_object(p8);
    CHECK(m8.shape() == Shape{2, 2});
    CHECK(m8.transmission[1] == doctest::Approx(0.2));
    CHECK(m8.transmission[3] == 1.0);
    const auto m16 = load_object(p16);
    CHECK(m16.transmission[1] == doctest::Approx(256.0 / 65535.0));
    CHECK(m16.transmission[2] == 1.0);
  }
  SUBCASE("format and filesystem errors") {
    const auto text = scratch("not_an_image.txt");
    std::ofstream(text) << "hello";
    CHECK_THROWS_AS(load_object(text), FormatError);
    CHECK_THROWS_AS(load_object(scratch("missing.pgm")), FilesystemError);

    const auto truncated = scratch("truncated.pgm");
    {
      std::ofstream out(truncated, std::ios::binary);
      out << "P5\n4 4\n255\n" << "abc";
    }
    CHECK_THROWS_AS(load_object(truncated), FormatError);

    const auto ascii = scratch("ascii.pgm");
    std::ofstream(ascii) << "P2\n1 1\n255\n7\n";
    CHECK_THROWS_AS(load_object(ascii), FormatError);
  }
}
