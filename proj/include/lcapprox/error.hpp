#pragma once

#include <stdexcept>
#include <string>

namespace lcapprox {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A point, radius or region is invalid for the group it is used with.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A test function is not negligible on the boundary of the integration region.
class SupportEscape : public Error {
 public:
  using Error::Error;
};

/// Non-finite integrand value at a quadrature node.
class QuadratureError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace lcapprox
