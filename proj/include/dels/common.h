#pragma once

#include <stdexcept>
#include <string>

namespace dels {

// Base class for whole-call failures. Per-pixel failures are reported through
// status values and flags instead, so one bad pixel never aborts a map.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class TooSmall : public Error {
 public:
  using Error::Error;
};

class WeightsMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidConfig : public Error {
 public:
  using Error::Error;
};

#define DELS_CHECK(cond, ExceptionType, message)  \
  do {                                            \
    if (!(cond)) {                                \
      throw ExceptionType(std::string(message));  \
    }                                             \
  } while (false)

}  // namespace dels
