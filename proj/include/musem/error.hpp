#pragma once

#include <stdexcept>
#include <string>

namespace musem {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unreadable or malformed files, bad flags, inconsistent configuration.
class InputError : public Error {
 public:
  using Error::Error;
};

// Tensor or sequence dimensions that do not line up.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A computation whose result is undefined for the given data
// (empty softmax support, single-class AUC, non-finite loss).
class DomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace musem
