// Exception types shared by every seba module.
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace seba {

/// Base for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A request would exceed a configured size or memory budget.
class CapacityError : public Error {
 public:
  CapacityError(const std::string& what, std::size_t required)
      : Error(what + " (required budget: " + std::to_string(required) + ")"),
        required_(required) {}
  std::size_t required() const noexcept { return required_; }

 private:
  std::size_t required_;
};

/// A query reaches beyond the range covered by a stored spectrum.
class RangeError : public Error {
 public:
  using Error::Error;
};

class PoleProximityError : public Error {
 public:
  PoleProximityError(const std::string& what, std::size_t pole)
      : Error(what + " (pole index " + std::to_string(pole) + ")"), pole_(pole) {}
  std::size_t pole() const noexcept { return pole_; }

 private:
  std::size_t pole_;
};

class DegenerateGapError : public Error {
 public:
  DegenerateGapError(const std::string& what, std::size_t gap)
      : Error(what + " (gap index " + std::to_string(gap) + ")"), gap_(gap) {}
  std::size_t gap() const noexcept { return gap_; }

 private:
  std::size_t gap_;
};

class BracketError : public Error {
 public:
  using Error::Error;
};

class QuadratureError : public Error {
 public:
  using Error::Error;
};

/// A contour integral was requested on a line where the log-series condition fails.
class AdmissibilityError : public Error {
 public:
  using Error::Error;
};

/// Two inputs that must describe the same torus/spectrum do not.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

/// Too few levels for a statistic to be meaningful.
class SampleSizeError : public Error {
 public:
  using Error::Error;
};

/// A file could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// An input file has the wrong schema or version.
class SchemaError : public Error {
 public:
  using Error::Error;
};

}  // namespace seba
