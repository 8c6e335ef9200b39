#pragma once

#include <stdexcept>
#include <string>

namespace ptspec {

// Base of every error the library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

// LogValue magnitude does not fit a double.
class RangeError : public Error {
 public:
  using Error::Error;
};

class SeedError : public Error {
 public:
  using Error::Error;
};

class StepFailure : public Error {
 public:
  StepFailure(const std::string& what, double ray_angle = 0.0)
      : Error(what), ray_angle_(ray_angle) {}
  double ray_angle() const { return ray_angle_; }

 private:
  double ray_angle_;
};

// The Riccati variable diverged: the path passed too close to a zero of w.
class PoleEncountered : public StepFailure {
 public:
  using StepFailure::StepFailure;
};

class InversionFailure : public Error {
 public:
  using Error::Error;
};

class NotContractive : public Error {
 public:
  using Error::Error;
};

class CalibrationAmbiguous : public Error {
 public:
  using Error::Error;
};

class BoundaryZeroSuspected : public Error {
 public:
  using Error::Error;
};

class SubdivisionBudgetExceeded : public Error {
 public:
  using Error::Error;
};

class InsufficientZeros : public Error {
 public:
  using Error::Error;
};

class UnresolvedTransition : public Error {
 public:
  using Error::Error;
};

}  // namespace ptspec
