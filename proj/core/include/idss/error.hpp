#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace idss {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed file content. Carries the byte offset where decoding failed when
// one is known.
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what,
                       std::optional<std::uint64_t> offset = std::nullopt)
      : Error(offset ? what + " (at byte offset " + std::to_string(*offset) + ")"
                     : what),
        offset_(offset) {}

  std::optional<std::uint64_t> offset() const noexcept { return offset_; }

 private:
  std::optional<std::uint64_t> offset_;
};

// Model file written by an incompatible format version.
class VersionError : public FormatError {
 public:
  using FormatError::FormatError;
};

// Shapes or band counts that do not line up.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Zero-norm or non-finite vector handed to normalization.
class DegenerateVectorError : public Error {
 public:
  using Error::Error;
};

// Training data cannot produce a model (e.g. a class with no pixels).
class TrainingError : public Error {
 public:
  using Error::Error;
};

// Filesystem failures: missing inputs, unwritable outputs.
class IoError : public Error {
 public:
  using Error::Error;
};

// Caller broke a documented precondition (bad argument value).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace idss
