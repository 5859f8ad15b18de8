#pragma once

#include <vector>

#include "mcflab/common.hpp"

namespace mcf::quad {

/// One-dimensional rule: nodes and weights.
struct Rule1D {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Jacobi rule for the weight (1 - t)^alpha (1 + t)^beta on [-1, 1] (Golub-Welsch).
Rule1D gauss_jacobi(int count, double alpha, double beta);

/// Gauss-Legendre rule on [-1, 1].
Rule1D gauss_legendre(int count);

/// Gauss-Legendre rule mapped to [a, b].
Rule1D gauss_legendre(int count, double a, double b);

/// Gauss rule for the weight exp(-y^2 / 4) on the real line.
Rule1D gauss_hermite_gaussian(int count);

/// Quadrature on the unit sphere S^{d-1} in R^d. Product rule: trapezoid in the
/// last angle, Gauss-Jacobi in the polar coordinates.
struct SphereRule {
  int ambient_dim = 0;
  std::vector<VecX> nodes;
  std::vector<double> weights;
};

/// `resolution` Gauss nodes per polar angle, 2 * resolution nodes around circles.
/// Exact for polynomials of degree < 2 * resolution.
SphereRule unit_sphere(int ambient_dim, int resolution);

/// |S^{d-1}|.
double unit_sphere_area(int ambient_dim);

}  // namespace mcf::quad
