#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace annoreg {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input bytes (JSON, CSV, binary headers).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t byte_offset = 0)
      : Error(what), byte_offset_(byte_offset) {}
  std::size_t byte_offset() const noexcept { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

/// Well-formed input that violates a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Filesystem failures.
class IoError : public Error {
 public:
  using Error::Error;
};

/// A statistic or test that is undefined for the given input.
class UndefinedError : public Error {
 public:
  using Error::Error;
};

}  // namespace annoreg
