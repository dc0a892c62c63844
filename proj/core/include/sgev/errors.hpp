#pragma once

#include <stdexcept>
#include <string>

namespace sgev {

// Category drives the process exit status in the CLI:
// usage -> 1, data -> 2, numeric -> 3.
enum class ErrorKind : int { usage = 1, data = 2, numeric = 3 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string tag, const std::string& message)
      : std::runtime_error(message), kind_(kind), tag_(std::move(tag)) {}

  ErrorKind kind() const noexcept { return kind_; }

  // Short machine-parsable token, e.g. "parse", "convergence".
  const std::string& tag() const noexcept { return tag_; }

 private:
  ErrorKind kind_;
  std::string tag_;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& m) : Error(ErrorKind::usage, "usage", m) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& m) : Error(ErrorKind::data, "io", m) {}
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& m) : Error(ErrorKind::data, "parse", m) {}
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& m) : Error(ErrorKind::data, "dimension", m) {}
};

// Input data cannot support the requested estimate (all-equal samples,
// constant series, too few rows).
class DegenerateDataError : public Error {
 public:
  explicit DegenerateDataError(const std::string& m)
      : Error(ErrorKind::data, "degenerate-data", m) {}
};

class UndefinedAucError : public Error {
 public:
  explicit UndefinedAucError(const std::string& m)
      : Error(ErrorKind::data, "undefined-auc", m) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& m) : Error(ErrorKind::numeric, "domain", m) {}
};

// Iterative solver hit its cap; message carries the last iterate.
class ConvergenceError : public Error {
 public:
  explicit ConvergenceError(const std::string& m, double last_iterate = 0.0)
      : Error(ErrorKind::numeric, "convergence", m), last_iterate_(last_iterate) {}

  double last_iterate() const noexcept { return last_iterate_; }

 private:
  double last_iterate_;
};

// Weighted-sample collapse (zero weights, identical particles, zero spread).
class DegeneracyError : public Error {
 public:
  explicit DegeneracyError(const std::string& m)
      : Error(ErrorKind::numeric, "degeneracy", m) {}
};

}  // namespace sgev
