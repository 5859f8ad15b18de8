#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "mcflab/common.hpp"
#include "mcflab/geometry.hpp"

namespace mcf {

/// Round cylinder S^{n-k} x R^k of radius sqrt(2(n-k)) in R^{n+1}.
class ShrinkerCylinder {
 public:
  ShrinkerCylinder() = default;
  /// `axis` holds k column vectors; they are orthonormalized (QR) on construction.
  ShrinkerCylinder(int n, int k, VecX center, MatX axis);
  /// Cylinder centred at the origin with axis e_1, ..., e_k.
  static ShrinkerCylinder standard(int n, int k);

  int n() const { return n_; }
  int k() const { return k_; }
  const VecX& center() const { return center_; }
  const MatX& axis_frame() const { return axis_; }
  double radius() const { return std::sqrt(2.0 * (n_ - k_)); }
  double radius_squared() const { return 2.0 * (n_ - k_); }

  /// Projection onto the axis directions.
  MatX pi_axis() const { return axis_ * axis_.transpose(); }
  /// Projection orthogonal to the axis.
  MatX pi() const;
  VecX project_axis(const VecX& v) const { return axis_ * (axis_.transpose() * v); }
  VecX project_perp(const VecX& v) const { return v - project_axis(v); }

  /// Graph height of a point over the cylinder: |Pi(x - c)| - radius.
  double height(const VecX& x) const;
  /// Orthonormality defect of the axis frame.
  double frame_defect() const;

 private:
  int n_ = 1;
  int k_ = 0;
  VecX center_;
  MatX axis_;
};

struct CylinderFitOptions {
  bool optimize_center = true;
  bool optimize_axis = true;
  /// Initial axis; empty means the Gaussian inertia tensor guess.
  MatX initial_axis;
  /// Initial center; empty means the origin.
  VecX initial_center;
  /// Samples outside this ball are ignored by the fit and by the graph test.
  double graph_radius = 8.0;
  /// The outward normal must satisfy <n, radial> >= this inside the graph ball.
  double min_radial_cosine = 0.2;
  int angular_resolution = 8;
  int max_iterations = 60;
};

struct GraphNorms {
  double sup = 0;
  double l2 = 0;
  /// Gaussian L2 norms of the first three derivatives along the cylinder
  /// coordinate of curve-based surfaces; NaN when not available.
  double d1 = std::numeric_limits<double>::quiet_NaN();
  double d2 = std::numeric_limits<double>::quiet_NaN();
  double d3 = std::numeric_limits<double>::quiet_NaN();
  double w32() const { return std::sqrt(l2 * l2 + d1 * d1 + d2 * d2 + d3 * d3); }
};

struct CylinderFit {
  ShrinkerCylinder cylinder;
  std::vector<AmbientSample> samples;  // samples used for the fit
  std::vector<double> w;               // graph height per sample (NaN outside the graph ball)
  GraphNorms norms;
  double objective = 0;                // sum of W (|Pi(x-c)| - rho)^2
  double measured_radius = 0;          // Gaussian-weighted mean of |Pi(x-c)|
  double graphical_radius = 0;         // largest ball in which the graph test passed
  int iterations = 0;
};

CylinderFit fit_cylinder(const Surface& surface, int k, const CylinderFitOptions& opts = {});
/// Same fit for raw ambient samples (no derivative norms).
CylinderFit fit_cylinder(int n, std::vector<AmbientSample> samples, int k, const CylinderFitOptions& opts = {});

/// Operator norm of the difference of two projections.
double projection_distance(const MatX& a, const MatX& b);

}  // namespace mcf
