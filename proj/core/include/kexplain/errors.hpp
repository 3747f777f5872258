#pragma once

#include <stdexcept>
#include <string>

namespace kexplain {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a caller violates a documented precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

}  // namespace kexplain
