#pragma once

#include <stdexcept>
#include <string>

namespace tabsynth {

/// Base of every exception thrown by the library. The CLI maps the two
/// families below onto exit codes: data that violates a contract (1) and
/// input that cannot be read or decoded (2).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Data is well-formed but violates a domain rule.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class BoundsError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// The tone bank has no candidates for one or more (string, fret) positions.
class CoverageError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Prediction and ground truth do not share a frame grid.
class AlignmentError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InsufficientDataError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DegenerateDataError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class GroupingError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Input could not be read or decoded.
class IoError : public Error {
 public:
  using Error::Error;
};

class FormatError : public IoError {
 public:
  using IoError::IoError;
};

/// Text input failed to parse. `line` is 1-based, 0 when unknown.
class ParseError : public FormatError {
 public:
  ParseError(const std::string& what, int line = 0, std::string field = {})
      : FormatError(decorate(what, line, field)), line_(line), field_(std::move(field)) {}

  int line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  static std::string decorate(const std::string& what, int line, const std::string& field) {
    std::string out;
    if (line > 0) out += "line " + std::to_string(line) + ": ";
    if (!field.empty()) out += field + ": ";
    return out + what;
  }

  int line_;
  std::string field_;
};

}  // namespace tabsynth
