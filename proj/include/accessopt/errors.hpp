#pragma once

#include <stdexcept>
#include <string>

namespace accessopt {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid input values or violated preconditions.
struct ValidationError : Error {
  using Error::Error;
};

// File access, parsing and serialization failures.
struct IoError : Error {
  using Error::Error;
};

// A pipeline stage was invoked before the stage it depends on.
struct PredecessorError : Error {
  using Error::Error;
};

}  // namespace accessopt
