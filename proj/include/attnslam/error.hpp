#pragma once

#include <stdexcept>
#include <string>

namespace attnslam {

/// Base class for every error raised by the library. The CLI maps these to
/// exit code 2 (data/validation error).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Bytes on disk do not follow the expected layout (bad magic, truncation).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Well-formed input that violates a documented invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace attnslam
