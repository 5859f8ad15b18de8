#include "mcflab/quadrature.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

namespace mcf::quad {

namespace {

Rule1D golub_welsch(const std::vector<double>& diag, const std::vector<double>& offdiag, double mu0) {
  const int count = static_cast<int>(diag.size());
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(count, count);
  for (int i = 0; i < count; ++i) {
    jacobi(i, i) = diag[i];
    if (i + 1 < count) {
      jacobi(i, i + 1) = offdiag[i];
      jacobi(i + 1, i) = offdiag[i];
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  Rule1D rule;
  rule.nodes.resize(count);
  rule.weights.resize(count);
  for (int i = 0; i < count; ++i) {
    rule.nodes[i] = solver.eigenvalues()(i);
    const double v0 = solver.eigenvectors()(0, i);
    rule.weights[i] = mu0 * v0 * v0;
  }
  return rule;
}

}  // namespace

Rule1D gauss_jacobi(int count, double alpha, double beta) {
  if (count < 1) throw DomainError("gauss_jacobi: count must be positive");
  std::vector<double> diag(count), off(count > 1 ? count - 1 : 0);
  const double ab = alpha + beta;
  for (int k = 0; k < count; ++k) {
    const double denom = (2.0 * k + ab) * (2.0 * k + ab + 2.0);
    diag[k] = (std::abs(denom) < 1e-300) ? (beta - alpha) / (ab + 2.0)
                                         : (beta * beta - alpha * alpha) / denom;
  }
  for (int k = 1; k < count; ++k) {
    const double kk = k;
    const double s = 2.0 * kk + ab;
    const double num = 4.0 * kk * (kk + alpha) * (kk + beta) * (kk + ab);
    const double den = s * s * (s + 1.0) * (s - 1.0);
    off[k - 1] = std::sqrt(num / den);
  }
  const double mu0 = std::pow(2.0, ab + 1.0) * std::exp(std::lgamma(alpha + 1.0) + std::lgamma(beta + 1.0) -
                                                        std::lgamma(ab + 2.0));
  return golub_welsch(diag, off, mu0);
}

Rule1D gauss_legendre(int count) { return gauss_jacobi(count, 0.0, 0.0); }

Rule1D gauss_legendre(int count, double a, double b) {
  Rule1D rule = gauss_legendre(count);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (b + a);
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    rule.nodes[i] = mid + half * rule.nodes[i];
    rule.weights[i] *= half;
  }
  return rule;
}

Rule1D gauss_hermite_gaussian(int count) {
  if (count < 1) throw DomainError("gauss_hermite_gaussian: count must be positive");
  // exp(-t^2) rule, then y = 2 t.
  std::vector<double> diag(count, 0.0), off(count > 1 ? count - 1 : 0);
  for (int k = 1; k < count; ++k) off[k - 1] = std::sqrt(0.5 * k);
  Rule1D rule = golub_welsch(diag, off, std::sqrt(std::numbers::pi));
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    rule.nodes[i] *= 2.0;
    rule.weights[i] *= 2.0;
  }
  return rule;
}

double unit_sphere_area(int ambient_dim) {
  const double d = ambient_dim;
  return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

SphereRule unit_sphere(int ambient_dim, int resolution) {
  if (ambient_dim < 1) throw DomainError("unit_sphere: ambient dimension must be >= 1");
  if (resolution < 1) throw DomainError("unit_sphere: resolution must be positive");
  SphereRule rule;
  rule.ambient_dim = ambient_dim;
  if (ambient_dim == 1) {
    rule.nodes = {VecX::Constant(1, 1.0), VecX::Constant(1, -1.0)};
    rule.weights = {1.0, 1.0};
    return rule;
  }
  if (ambient_dim == 2) {
    const int count = 2 * resolution;
    for (int j = 0; j < count; ++j) {
      const double angle = 2.0 * std::numbers::pi * (j + 0.5) / count;
      VecX p(2);
      p << std::cos(angle), std::sin(angle);
      rule.nodes.push_back(p);
      rule.weights.push_back(2.0 * std::numbers::pi / count);
    }
    return rule;
  }
  // S^{m}, m = d - 1: x = (t, sqrt(1 - t^2) xi), measure (1 - t^2)^{(m-2)/2} dt dxi.
  const double expo = 0.5 * (ambient_dim - 3);
  const Rule1D polar = gauss_jacobi(resolution, expo, expo);
  const SphereRule inner = unit_sphere(ambient_dim - 1, resolution);
  for (std::size_t a = 0; a < polar.nodes.size(); ++a) {
    const double t = polar.nodes[a];
    const double s = std::sqrt(std::max(0.0, 1.0 - t * t));
    for (std::size_t b = 0; b < inner.nodes.size(); ++b) {
      VecX p(ambient_dim);
      p(0) = t;
      p.tail(ambient_dim - 1) = s * inner.nodes[b];
      rule.nodes.push_back(std::move(p));
      rule.weights.push_back(polar.weights[a] * inner.weights[b]);
    }
  }
  return rule;
}

}  // namespace mcf::quad
