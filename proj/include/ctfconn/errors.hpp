#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

namespace ctfconn {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on shapes, ranges or configuration values was violated.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// An iterative fit produced non-finite iterates.
class NumericalFailure : public Error {
 public:
  NumericalFailure(const std::string& what, int iteration)
      : Error(what + " (iteration " + std::to_string(iteration) + ")"), iteration_(iteration) {}

  int iteration() const noexcept { return iteration_; }

 private:
  int iteration_;
};

/// Synthetic data generation could not satisfy its constraints.
class GenerationFailure : public Error {
 public:
  using Error::Error;
};

/// A container file is malformed. offset() is the byte position where parsing failed.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::uint64_t offset)
      : Error(what + " at byte offset " + std::to_string(offset)), reason_(what), offset_(offset) {}

  const std::string& reason() const noexcept { return reason_; }
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::string reason_;
  std::uint64_t offset_;
};

class IoError : public Error {
 public:
  IoError(const std::string& what, std::string path)
      : Error(what + ": " + path), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace ctfconn
