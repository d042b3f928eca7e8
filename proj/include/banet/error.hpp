#pragma once

#include <stdexcept>
#include <string>

namespace banet {

/// Base of every error raised by the library. The CLI maps these onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor extents do not agree with what an operation requires.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An operation produced NaN or Inf.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// API misuse: backward through an untaped tensor, iter > max_iters, empty sets.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Dataset content is inconsistent (size mismatches, unmatched files).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Malformed file content (PNM headers, checkpoints, config files).
class FormatError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace banet
