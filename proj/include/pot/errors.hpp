#pragma once

#include <stdexcept>
#include <string>

namespace pot {

/// A parameter is outside its documented range.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A signal or grid does not cover the region an operation needs.
class LengthError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Quadrature or another numerical procedure failed to converge.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed scenario file, CSV input or command line.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pot
