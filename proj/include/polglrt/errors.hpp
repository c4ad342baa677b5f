#pragma once

#include <stdexcept>
#include <string>

namespace polglrt {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  virtual const char* kind() const noexcept { return "error"; }
};

/// Coincident points, zero-length look directions and similar.
class GeometryError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "degenerate_geometry"; }
};

/// Inputs outside the regime where the narrowband/slow-target model holds.
class ModelValidityError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "model_validity"; }
};

/// Invalid or inconsistent configuration (bad variances, too few trials, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "config"; }
};

/// Detector asked for a mode the data cannot support, or shapes disagree.
class ModeError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "mode"; }
};

class NumericalError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "numerical"; }
};

}  // namespace polglrt
