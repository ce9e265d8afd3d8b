#include "ghostimg/objects.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "ghostimg/pnm.hpp"

namespace gi {

DoubleSlitSpec DoubleSlitSpec::from_physical(Shape shape, double slit_width_mm,
                                             double separation_mm, double pitch_mm) {
  if (!(pitch_mm > 0.0)) throw ParameterError("pixel pitch must be > 0 mm");
  if (!(slit_width_mm > 0.0) || !(separation_mm > 0.0)) {
    throw ParameterError("slit width and separation must be > 0 mm");
  }
  DoubleSlitSpec spec;
  spec.shape = shape;
  spec.slit_width_px = static_cast<std::size_t>(std::lround(slit_width_mm / pitch_mm));
  spec.separation_px = static_cast<std::size_t>(std::lround(separation_mm / pitch_mm));
  spec.slit_height_px = std::max<std::size_t>(1, shape.rows / 2);
  return spec;
}

ObjectMask make_double_slit(const DoubleSlitSpec& spec) {
  if (spec.slit_width_px < 1 || spec.separation_px < 1 || spec.slit_height_px < 1) {
    throw GeometryError("slit width, separation and height must all be >= 1 px");
  }
  if (spec.separation_px < spec.slit_width_px) {
    throw GeometryError("slit separation " + std::to_string(spec.separation_px) +
                        " px is smaller than slit width " + std::to_string(spec.slit_width_px) +
                        " px; the slits would overlap");
  }
  const bool vertical = spec.orientation == SlitOrientation::vertical;
  // Across: the axis along which the slits are separated.
  const std::size_t across = vertical ? spec.shape.cols : spec.shape.rows;
  const std::size_t along = vertical ? spec.shape.rows : spec.shape.cols;
  const std::size_t span = spec.separation_px + spec.slit_width_px;
  if (span > across || spec.slit_height_px > along) {
    throw GeometryError("double slit (" + std::to_string(span) + " x " +
                        std::to_string(spec.slit_height_px) + " px) does not fit in " +
                        to_string(spec.shape));
  }

  // Integer offsets keep the pattern exactly mirror-symmetric about its own
  // center; the pair sits as close to the grid center as parity allows.
  const std::size_t first = (across - span) / 2;
  const std::size_t second = first + spec.separation_px;
  const std::size_t top = (along - spec.slit_height_px) / 2;

  ObjectMask mask{Grid<double>(spec.shape, 0.0), "double-slit"};
  for (std::size_t a = top; a < top + spec.slit_height_px; ++a) {
    for (std::size_t start : {first, second}) {
      for (std::size_t x = start; x < start + spec.slit_width_px; ++x) {
        if (vertical) {
          mask.transmission(a, x) = 1.0;
        } else {
          mask.transmission(x, a) = 1.0;
        }
      }
    }
  }
  return mask;
}

namespace {

// Transmission of the bird at normalized coordinates (x right, y down, both
// in [-1, 1]); zero outside the silhouette.
double bird_transmission(double x, double y) {
  const auto inside_ellipse = [](double dx, double dy, double ax, double ay) {
    return (dx * dx) / (ax * ax) + (dy * dy) / (ay * ay) <= 1.0;
  };
  if (inside_ellipse(x, y - 0.05, 0.11, 0.33)) return 0.85;  // body
  if (inside_ellipse(x, y + 0.36, 0.09, 0.09)) return 0.95;  // head
  if (x > -0.025 && x < 0.025 && y < -0.42 && y > -0.52) return 0.6;  // beak

  // Tail: a fan of five feathers below the body.
  {
    const double dx = x;
    const double dy = y - 0.3;
    const double r = std::hypot(dx, dy);
    const double theta = std::atan2(dx, dy);  // 0 straight down
    if (dy > 0.0 && r < 0.55 && std::abs(theta) < 0.35) {
      const double phase = (theta + 0.35) / 0.7 * 5.0;
      return std::abs(phase - std::floor(phase) - 0.5) < 0.375 ? 0.7 : 0.3;
    }
  }

  // Wings: feathers radiating from each shoulder, angle -65..20 degrees from
  // the horizontal (negative is upward), with notched tips.
  constexpr int kFeathers = 11;
  constexpr double kLow = -65.0 * std::numbers::pi / 180.0;
  constexpr double kHigh = 20.0 * std::numbers::pi / 180.0;
  for (double side : {-1.0, 1.0}) {
    const double dx = side * x - 0.08;
    const double dy = y + 0.02;
    if (dx <= 0.0) continue;
    const double r = std::hypot(dx, dy);
    const double theta = std::atan2(dy, dx);
    if (theta < kLow || theta > kHigh) continue;
    const double phase = (theta - kLow) / (kHigh - kLow) * kFeathers;
    const double within = phase - std::floor(phase);
    const double tip = 0.88 - 0.12 * std::abs(2.0 * within - 1.0) -
                       0.18 * std::pow((kHigh - theta) / (kHigh - kLow), 2.0);
    if (r < 0.06 || r > tip) continue;
    if (within > 0.8) return 0.15;  // gap between feathers
    // Shaft line down the middle of every feather, brighter toward the tip.
    if (std::abs(within - 0.4) < 0.05) return 0.45;
    return 0.55 + 0.4 * std::min(1.0, r / tip);
  }
  return 0.0;
}

}  // namespace

ObjectMask make_feather_bird(Shape shape) {
  if (shape.rows < 16 || shape.cols < 16) {
    throw GeometryError("feather-bird object needs at least 16x16 pixels");
  }
  constexpr int kSub = 4;
  ObjectMask mask{Grid<double>(shape, 0.0), "feather-bird"};
  const double extent = static_cast<double>(std::min(shape.rows, shape.cols));
  for (std::size_t r = 0; r < shape.rows; ++r) {
    for (std::size_t c = 0; c < shape.cols; ++c) {
      double total = 0.0;
      for (int sy = 0; sy < kSub; ++sy) {
        for (int sx = 0; sx < kSub; ++sx) {
          const double px = static_cast<double>(c) + (sx + 0.5) / kSub;
          const double py = static_cast<double>(r) + (sy + 0.5) / kSub;
          const double x = (2.0 * px - static_cast<double>(shape.cols)) / extent;
          const double y = (2.0 * py - static_cast<double>(shape.rows)) / extent;
          total += bird_transmission(x, y);
        }
      }
      mask.transmission(r, c) = total / (kSub * kSub);
    }
  }
  return mask;
}

ObjectMask load_object(const std::filesystem::path& path) {
  char magic[4] = {};
  {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FilesystemError("cannot open '" + path.string() + "'");
    in.read(magic, 4);
  }
  GrayImage image;
  if (magic[0] == 'P' && magic[1] == '5') {
    image = read_pgm(path);
  } else if (static_cast<unsigned char>(magic[0]) == 0x89 && magic[1] == 'P' &&
             magic[2] == 'N' && magic[3] == 'G') {
    image = read_png(path);
  } else {
    throw FormatError("'" + path.string() + "' is neither a P5 PGM nor a PNG image");
  }

  ObjectMask mask{Grid<double>(image.codes.shape()), path.stem().string()};
  const double scale = static_cast<double>(image.max_value);
  for (std::size_t i = 0; i < image.codes.size(); ++i) {
    mask.transmission[i] = static_cast<double>(image.codes[i]) / scale;
  }
  return mask;
}

void save_object(const ObjectMask& object, const std::filesystem::path& path) {
  GrayImage image{Grid<std::uint16_t>(object.shape()), 65535};
  for (std::size_t i = 0; i < object.transmission.size(); ++i) {
    const double t = std::clamp(object.transmission[i], 0.0, 1.0);
    image.codes[i] = static_cast<std::uint16_t>(std::lround(t * 65535.0));
  }
  write_pgm(image, path);
}

}  // namespace gi
