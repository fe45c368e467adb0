#pragma once

#include <stdexcept>
#include <string>

namespace biaseval {

// Base of every error the library throws. Input errors (bad files, bad
// arguments) map to CLI exit code 2; everything else to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InputError : public Error {
 public:
  using Error::Error;
};

class ComputationError : public Error {
 public:
  using Error::Error;
};

}  // namespace biaseval
