#pragma once

#include <stdexcept>
#include <string>

namespace shapeopt {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Curve constructor rejected the sample sequence.
class InvalidCurve : public Error {
 public:
  using Error::Error;
};

class MeshError : public Error {
 public:
  using Error::Error;
};

/// apply_deformation produced a non-positive triangle area.
class TangledMeshError : public MeshError {
 public:
  TangledMeshError(const std::string& what, double admissible_scale)
      : MeshError(what), admissible_scale_(admissible_scale) {}

  /// Largest scale (found by bisection) for which every triangle keeps positive area.
  double admissible_scale() const { return admissible_scale_; }

 private:
  double admissible_scale_;
};

class SolverError : public Error {
 public:
  SolverError(const std::string& what, double achieved_residual = -1.0)
      : Error(what), achieved_residual_(achieved_residual) {}

  double achieved_residual() const { return achieved_residual_; }

 private:
  double achieved_residual_;
};

class LineSearchError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, int line = 0) : Error(what), line_(line) {}

  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace shapeopt
