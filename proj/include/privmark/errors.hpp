#pragma once

#include <stdexcept>
#include <string>

namespace privmark {

// Error taxonomy shared by the engine and the CLI. Catch sites mostly care
// about the category, so each one is its own type on top of runtime_error.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RangeError : Error {
  using Error::Error;
};
struct ShapeError : Error {
  using Error::Error;
};
struct ConsistencyError : Error {
  using Error::Error;
};
struct TransportError : Error {
  using Error::Error;
};
struct DesyncError : Error {
  using Error::Error;
};
struct TimeoutError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct FormatError : Error {
  using Error::Error;
};
struct ZeroRowError : FormatError {
  using FormatError::FormatError;
};
struct DuplicateWordError : FormatError {
  using FormatError::FormatError;
};
struct SizeError : Error {
  using Error::Error;
};
struct EmptyTextError : Error {
  using Error::Error;
};
struct InserterError : Error {
  using Error::Error;
};

}  // namespace privmark
