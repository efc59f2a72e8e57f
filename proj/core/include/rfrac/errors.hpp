#pragma once

#include <stdexcept>
#include <string>

namespace rfrac {

/// A level or family size exceeded the enumeration bounds of the grid.
class EnumerationBoundError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Two points share a coordinate where distinct coordinates are required.
class DegeneratePairError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DimensionMismatchError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numeric parameter (exponent, ratio bound, depth, ...) is out of range.
/// The message names the violated relation.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed or incompatible weight / report file.
class FileFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rfrac
