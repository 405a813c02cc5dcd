#pragma once

#include <stdexcept>
#include <string>

namespace relex {

// Base class for everything the library throws.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Operand shapes do not conform, or a graph contract was violated.
struct ShapeError : Error {
  using Error::Error;
};

// Bad flag value or inconsistent flag combination.
struct ConfigError : Error {
  using Error::Error;
};

// Corpus, embedding or checkpoint file problems.
struct DataError : Error {
  using Error::Error;
};

// Non-finite loss during training.
struct DivergenceError : Error {
  using Error::Error;
};

}  // namespace relex
