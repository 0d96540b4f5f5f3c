#pragma once

#include <stdexcept>
#include <string>

namespace mobipred {

// Base for all data-level failures. CLI maps these to exit code 2.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MalformedLine : DataError {
  explicit MalformedLine(const std::string& what, long line_no = -1)
      : DataError(line_no >= 0 ? "line " + std::to_string(line_no) + ": " + what : what),
        line(line_no) {}
  long line;
};

struct EmptyTrace : DataError {
  using DataError::DataError;
};

struct SeriesTooShort : DataError {
  using DataError::DataError;
};

struct EmptyAfterFilter : DataError {
  using DataError::DataError;
};

struct NumericalDivergence : DataError {
  using DataError::DataError;
};

struct DegenerateInput : DataError {
  using DataError::DataError;
};

struct EmptyInput : DataError {
  using DataError::DataError;
};

struct MissingCoordinates : DataError {
  using DataError::DataError;
};

struct ConfigInvalid : DataError {
  using DataError::DataError;
};

struct IoFailure : DataError {
  using DataError::DataError;
};

}  // namespace mobipred
