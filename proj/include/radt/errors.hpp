#pragma once

#include <stdexcept>
#include <string>

namespace radt {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Bad argument to an operation (dimension mismatch, negative width, ...).
struct ArgumentError : Error {
  using Error::Error;
};

/// Malformed record in a dataset or rules file; carries the 1-based line.
struct ParseError : Error {
  ParseError(const std::string& msg, int line)
      : Error(msg + " (line " + std::to_string(line) + ")"), line_number(line) {}
  int line_number;
};

/// Structurally valid input whose contents violate the declared schema.
struct SchemaError : Error {
  using Error::Error;
};

/// Invalid run configuration; message names the offending key path.
struct ConfigError : Error {
  using Error::Error;
};

/// Rejection sampler could not find an admissible point.
struct SamplerError : Error {
  using Error::Error;
};

/// Training diverged or an operation was called in an invalid state.
struct StateError : Error {
  using Error::Error;
};

}  // namespace radt
