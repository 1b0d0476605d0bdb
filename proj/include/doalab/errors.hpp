#pragma once

#include <stdexcept>
#include <string>

namespace doalab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (bad length, out-of-range value, malformed file).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Both channels of a correlation frame carry no energy; callers treat the frame as non-speech.
class SilentFrame : public Error {
 public:
  SilentFrame() : Error("silent frame") {}
};

/// The data cannot identify the requested quantity (e.g. calibration with only on-axis angles).
class Unidentifiable : public Error {
 public:
  explicit Unidentifiable(const std::string& what) : Error("unidentifiable: " + what) {}
};

}  // namespace doalab
