#pragma once

#include <stdexcept>
#include <string>

namespace rfts {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

// A drift or gain evaluator produced a non-finite value from a finite input.
class EvaluatorError : public Error {
 public:
  using Error::Error;
};

class QuadratureError : public Error {
 public:
  using Error::Error;
};

// c1 <= 2 c2 sqrt(K): the certificate's standing constant condition fails.
class ConstantConditionError : public Error {
 public:
  using Error::Error;
};

// The integral of 1/r diverges at 0, so theta is not defined.
class RateConditionError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

// Malformed experiment configuration (CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace rfts
