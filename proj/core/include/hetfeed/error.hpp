#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hetfeed {

/// Failure category. The CLI maps parse/validation to exit code 2 and
/// runtime to exit code 3.
enum class ErrorKind { parse, validation, runtime };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// A malformed input line. `line` is 1-based; `field` may be empty when the
/// line is not valid JSON at all.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::string field, const std::string& detail)
      : Error(ErrorKind::parse, format(line, field, detail)),
        line_(line),
        field_(std::move(field)) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  static std::string format(std::size_t line, const std::string& field,
                            const std::string& detail) {
    std::string msg = "line " + std::to_string(line);
    if (!field.empty()) msg += ", field '" + field + "'";
    return msg + ": " + detail;
  }

  std::size_t line_;
  std::string field_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message)
      : Error(ErrorKind::validation, message) {}
};

/// Raised by the pipeline runner; keeps the kind of the underlying failure.
class StageError : public Error {
 public:
  StageError(std::string stage, ErrorKind kind, const std::string& cause)
      : Error(kind, "stage '" + stage + "' failed: " + cause),
        stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace hetfeed
