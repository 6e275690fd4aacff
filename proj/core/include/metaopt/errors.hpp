#pragma once

#include <stdexcept>
#include <cstddef>
#include <exception>
#include <string>

namespace metaopt {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input document (CSV row shape, ordering, JSON keys).
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// Physically invalid optical data (n <= 0, k < 0, lossy ambient).
class PhysicsError : public Error {
 public:
  using Error::Error;
};

/// A query falls outside the tabulated or configured domain.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Bit vector does not fit the binary encoding.
class EncodingError : public Error {
 public:
  using Error::Error;
};

class SingularInterfaceError : public Error {
 public:
  using Error::Error;
};

class SingularSystemError : public Error {
 public:
  using Error::Error;
};

/// Vector/matrix sizes disagree or a collection is empty where it must not be.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// Problem too large for an exhaustive or statevector method.
class CapacityError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Every point of the search space is already in the dataset.
class ExhaustedSpaceError : public Error {
 public:
  using Error::Error;
};

/// Wraps (via std::throw_with_nested) a failure inside one active-learning iteration.
class IterationError : public Error {
 public:
  IterationError(std::size_t iteration, const std::string& what)
      : Error("iteration " + std::to_string(iteration) + ": " + what), iteration_(iteration) {}
  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

/// "outer: inner: innermost" for a chain of nested exceptions.
std::string describe(const std::exception& e);

}  // namespace metaopt
