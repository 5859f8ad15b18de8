#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace mcf {

using Vec2 = Eigen::Vector2d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A finite-difference stencil has coincident or missing samples.
class StencilError : public Error {
 public:
  StencilError(const std::string& what, std::size_t sample)
      : Error(what), sample_(sample) {}
  std::size_t sample() const { return sample_; }

 private:
  std::size_t sample_;
};

/// Requested time step exceeds the stability bound.
class StepSizeError : public Error {
 public:
  StepSizeError(double dt, double bound)
      : Error("time step " + std::to_string(dt) + " exceeds CFL bound " + std::to_string(bound)),
        dt_(dt), bound_(bound) {}
  double dt() const { return dt_; }
  double bound() const { return bound_; }

 private:
  double dt_;
  double bound_;
};

/// Curvature blew up past the stencil-validity threshold.
class SingularityDetected : public Error {
 public:
  SingularityDetected(Vec2 location, double time, std::size_t sample)
      : Error("singularity detected"), location_(std::move(location)), time_(time), sample_(sample) {}
  const Vec2& location() const { return location_; }
  double time() const { return time_; }
  std::size_t sample() const { return sample_; }

 private:
  Vec2 location_;
  double time_;
  std::size_t sample_;
};

/// The surface is not a normal graph over the requested cylinder.
class GraphFailure : public Error {
 public:
  GraphFailure(const std::string& what, std::size_t sample) : Error(what), sample_(sample) {}
  std::size_t first_failing_sample() const { return sample_; }

 private:
  std::size_t sample_;
};

/// An operation needs an input that was not produced.
class DependencyError : public Error {
 public:
  using Error::Error;
};

/// Arrival-time sweep stopped before covering the requested domain.
class PartialFieldError : public Error {
 public:
  PartialFieldError(const std::string& what, std::vector<unsigned char> unswept)
      : Error(what), unswept_(std::move(unswept)) {}
  const std::vector<unsigned char>& unswept_mask() const { return unswept_; }

 private:
  std::vector<unsigned char> unswept_;
};

/// A finite-difference stencil left the domain mask.
class BoundaryError : public Error {
 public:
  using Error::Error;
};

/// Log-log regression lacks dynamic range or samples.
class IllConditionedFit : public Error {
 public:
  using Error::Error;
};

/// A traced trajectory left the evaluator's domain.
class DomainExitError : public Error {
 public:
  DomainExitError(const std::string& what, VecX last) : Error(what), last_(std::move(last)) {}
  const VecX& last_point() const { return last_; }

 private:
  VecX last_;
};

/// Step or iteration budget exhausted.
class BudgetError : public Error {
 public:
  using Error::Error;
};

/// Input lies outside the region where an operation is defined.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Quantity that must be positive vanished (for example I(r) = 0).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

/// Not enough resolved samples for an asymptotic estimate.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

}  // namespace mcf
