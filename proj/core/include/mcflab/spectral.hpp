#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "mcflab/common.hpp"
#include "mcflab/cylinder.hpp"
#include "mcflab/polynomial.hpp"

namespace mcf {

/// A function on R^n (k < 0) or on the standard cylinder S^{n-k}_rho x R^k in R^{n+1}
/// (k >= 0), given through a smooth ambient extension. Cylinder points are written
/// (y_1, ..., y_k, z_1, ..., z_{n-k+1}) with |z| = rho = sqrt(2(n-k)).
struct DriftFunction {
  int n = 1;
  int k = -1;
  std::function<double(const VecX&)> value;
  std::function<VecX(const VecX&)> gradient;
  std::function<MatX(const VecX&)> hessian;
  /// Ambient radius inside which the function is defined.
  double radius = std::numeric_limits<double>::infinity();

  bool on_cylinder() const { return k >= 0; }
  int ambient_dim() const { return k < 0 ? n : n + 1; }

  static DriftFunction flat(const Polynomial& p);
  static DriftFunction cylinder(int n, int k, const Polynomial& ambient);
};

/// L v = Delta v - <x, grad v> / 2 on R^n; on cylinders Delta_theta + Delta_y - <y, grad_y v> / 2.
double drift_apply(const DriftFunction& v, const VecX& x);

/// Gaussian-orthogonal polynomial eigenfunctions of degree 2 lambda on R^n with L v = -lambda v
/// (Hermite products of total degree two_lambda).
std::vector<Polynomial> hermite_eigen(int n, int two_lambda);

/// Element of ker(L + 1) on S^{n-k} x R^k:
/// sum a_i (y_i^2 - 2) + sum_{i<j} a_ij y_i y_j + sum c_im y_i z_m.
struct KernelElement {
  int n = 1, k = 0;
  VecX a;   // k
  MatX aij; // k x k, strictly upper triangle used
  MatX c;   // k x (n - k + 1)
  /// The element as a polynomial in the n + 1 cylinder coordinates (y, z).
  Polynomial polynomial() const;
  std::string label;
  std::string to_json() const;
};

/// Dimension k + k(k-1)/2 + k(n-k+1).
int kernel_dimension(int n, int k);
/// Unit basis of ker(L + 1) in the order {y_i^2 - 2}, {y_i y_j}, {y_i z_m}.
std::vector<KernelElement> kernel_basis(int n, int k);

/// Cylinder H_C = sqrt((n - k) / 2).
double cylinder_mean_curvature(int n, int k);

struct ProjectionOptions {
  int axis_nodes = 64;         // Gauss-Legendre nodes per axis variable
  int sphere_resolution = 10;  // see quad::unit_sphere
  double axis_cutoff = 20.0;   // |y_i| cap for the Gaussian integrals
  int sup_samples = 121;       // per axis variable, for the remainder sup
};

struct KernelProjection {
  KernelElement w_tilde;
  VecX coefficients;  // in kernel_basis order
  double remainder_sup = 0;  // sup over |x| <= 3n of |w - w_tilde|
  double gaussian_norm = 0;  // Gaussian L2 norm of w over the integration region
  double axis_extent = 0;    // |y_i| range actually integrated
};

/// Gaussian-L2 orthogonal projection onto kernel_basis. `w` is evaluated at ambient points
/// c + A y + Q z of `cyl` (A its axis frame, Q a frame of the orthogonal complement).
/// DomainError when w is defined on a ball smaller than 3n + 1.
KernelProjection kernel_project(const DriftFunction& w, const ShrinkerCylinder& cyl, const ProjectionOptions& opts = {});

struct GraphLinearization {
  double H_C = 0;
  std::vector<double> coordinate;  // y (profiles) or theta (curves) of each sample
  std::vector<double> H;           // exact mean curvature of the graph
  std::vector<double> linear;      // H_C - (Delta_theta + Delta_y + 1/2) w
  std::vector<double> remainder;   // H - linear
  std::vector<double> phi;         // shrinker residual of the graph
  std::vector<double> phi_remainder;  // phi + (L + 1) w
  double remainder_sup = 0;        // over samples with |y| <= 3n
  double phi_remainder_sup = 0;
};

struct LinearizationOptions {
  std::size_t samples = 6000;
  /// Profiles are laid out periodically over |y| <= half_period; only |y| <= 3n is reported.
  double half_period = 0;  // 0 means 3n + 3
};

/// Exact mean curvature of the outward normal graph of w over the cylinder (computed by the
/// discrete geometry on the graphed curve or profile) against its linearization. Supports
/// (n, k) = (1, 0) with w(theta) and k = 1 with w depending on y only. GraphFailure when
/// 1 + w / rho <= 0.
GraphLinearization graph_H_linearize(const DriftFunction& w, const ShrinkerCylinder& cyl,
                                     const LinearizationOptions& opts = {});

}  // namespace mcf
