#include "ghostimg/grid.hpp"

namespace gi {

std::string to_string(const Shape& s) {
  return std::to_string(s.rows) + "x" + std::to_string(s.cols);
}

}  // namespace gi
