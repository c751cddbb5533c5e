#pragma once

#include <stdexcept>
#include <string>

namespace tnc {

// Base for every error raised by the model and solvers.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the domain of a model function (e.g. inverse logit of a
// share outside (0, 1)).
class DomainError : public ModelError {
 public:
  using ModelError::ModelError;
};

// Fleet so large that the Greenshield speed is non-positive.
class InfeasibleFleetError : public ModelError {
 public:
  using ModelError::ModelError;
};

// No idle vehicles left: pickup time is unbounded.
class WildGooseChaseError : public ModelError {
 public:
  using ModelError::ModelError;
};

// Root finder or calibration failed to meet its tolerance.
class ConvergenceError : public ModelError {
 public:
  using ModelError::ModelError;
};

// Requested target (tax revenue, threshold) is outside what the model can
// produce.
class NotFoundError : public ModelError {
 public:
  using ModelError::ModelError;
};

// Invalid configuration or run spec.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Output file or directory could not be written, or an input file read.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tnc
