#pragma once

#include <stdexcept>

namespace gi {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Out-of-range or inconsistent configuration value.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Shape mismatch between grids, or a grid too small for the operation.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Object geometry that does not fit the grid.
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Malformed or unsupported file content.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Operating-system level I/O failure.
class FilesystemError : public Error {
 public:
  using Error::Error;
};

/// Too few measurements to form a fluctuation estimate.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

/// Statistic undefined because an input has zero variance.
class UndefinedVarianceError : public Error {
 public:
  using Error::Error;
};

}  // namespace gi
