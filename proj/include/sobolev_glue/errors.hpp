#pragma once

#include <stdexcept>
#include <string>

namespace sobolev_glue {

// Every error carries the CLI exit code it maps to.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept = 0;
};

class ParameterError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
};

// Out-of-domain points, invalid faces, mismatched grids.
class DomainError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 3; }
};

class PreconditionError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 3; }
};

class ResolutionError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 4; }
};

class OptimizationError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 4; }
};

// Nearest-point projection evaluated at its singular set.
class SingularityError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 4; }
};

class LiftingError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 4; }
};

class IoError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 5; }
};

}  // namespace sobolev_glue
