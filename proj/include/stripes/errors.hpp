#pragma once

#include <stdexcept>
#include <string>

namespace stripes {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Value outside [0,1] beyond the clamp tolerance.
struct DomainError : Error {
  using Error::Error;
};

struct ParameterError : Error {
  using Error::Error;
};

struct DivergentMomentError : Error {
  using Error::Error;
};

// Requested periodization tolerance not reachable under the work cap.
struct TruncationError : Error {
  using Error::Error;
};

struct GridMismatchError : Error {
  using Error::Error;
};

struct NoBracketError : Error {
  using Error::Error;
};

struct FormatError : Error {
  using Error::Error;
};

}  // namespace stripes
