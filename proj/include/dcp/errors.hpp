#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dcp {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A layer or dataflow code that violates its invariants.
class InvalidCode : public Error {
 public:
  using Error::Error;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

/// Training data that cannot be normalized (e.g. a constant metric).
class DegenerateData : public Error {
 public:
  using Error::Error;
};

class UntrainedPredictor : public Error {
 public:
  using Error::Error;
};

/// Brute-force enumeration refused because the lattice is too large.
class TooLarge : public Error {
 public:
  using Error::Error;
};

/// Exact integer arithmetic that left the representable range.
class Overflow : public Error {
 public:
  using Error::Error;
};

class SinkError : public Error {
 public:
  using Error::Error;
};

/// Bad hardware profile or configuration file.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A JSON-lines record that failed to parse; carries the 1-based line number.
class MalformedRecord : public Error {
 public:
  MalformedRecord(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace dcp
