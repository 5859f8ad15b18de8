#include <cmath>
#include <random>

#include "doctest.h"
#include "mcflab/spectral.hpp"

using namespace mcf;

TEST_SUITE("spectral") {
  TEST_CASE("Hermite recursion") {
    const auto h2 = hermite_1d(2);
    CHECK(h2.coefficient({2}) == 1.0);
    CHECK(h2.coefficient({0}) == -2.0);
    const auto h3 = hermite_1d(3);
    CHECK(h3.coefficient({1}) == -6.0);
  }

  TEST_CASE("Hermite products are eigenfunctions of L") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g;
    for (int n = 1; n <= 3; ++n)
      for (int tl = 0; tl <= 4; ++tl)
        for (const auto& p : hermite_eigen(n, tl)) {
          const auto v = DriftFunction::flat(p);
          for (int s = 0; s < 10; ++s) {
            VecX x(n);
            for (int i = 0; i < n; ++i) x[i] = 2 * g(rng);
            CHECK(std::abs(drift_apply(v, x) + 0.5 * tl * p(x)) <= 1e-9 * (1 + std::abs(p(x))));
          }
        }
  }

  TEST_CASE("kernel of L + 1 on cylinders") {
    CHECK(kernel_dimension(2, 1) == 3);
    CHECK(kernel_dimension(3, 1) == 4);
    CHECK(kernel_dimension(3, 2) == 7);
    for (auto [n, k] : {std::pair{2, 1}, {3, 1}, {3, 2}}) {
      const auto basis = kernel_basis(n, k);
      CHECK(static_cast<int>(basis.size()) == kernel_dimension(n, k));
      const double rho = std::sqrt(2.0 * (n - k));
      for (const auto& e : basis) {
        const auto v = DriftFunction::cylinder(n, k, e.polynomial());
        VecX x = VecX::Zero(n + 1);
        x[0] = 0.7;
        x[k] = rho;
        CHECK(std::abs(drift_apply(v, x) + v.value(x)) < 1e-9);
      }
    }
  }

  TEST_CASE("cylinder mean curvature") {
    CHECK(cylinder_mean_curvature(2, 1) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
    CHECK(cylinder_mean_curvature(3, 1) == doctest::Approx(1.0).epsilon(1e-15));
  }

  TEST_CASE("projection recovers a kernel element") {
    const auto basis = kernel_basis(2, 1);
    const Polynomial w = basis[0].polynomial() * 0.3 + basis[2].polynomial() * -0.2;
    const auto pr = kernel_project(DriftFunction::cylinder(2, 1, w), ShrinkerCylinder::standard(2, 1));
    CHECK(pr.coefficients[0] == doctest::Approx(0.3).epsilon(1e-8));
    CHECK(std::abs(pr.coefficients[1]) < 1e-8);
    CHECK(pr.coefficients[2] == doctest::Approx(-0.2).epsilon(1e-8));
    CHECK(pr.remainder_sup < 1e-8);
  }

  TEST_CASE("graph over the cylinder at w = 0 has H = H_C") {
    LinearizationOptions lo;
    lo.samples = 512;
    const auto g = graph_H_linearize(DriftFunction::cylinder(2, 1, Polynomial(3)), ShrinkerCylinder::standard(2, 1), lo);
    for (double h : g.H) CHECK(std::abs(h - std::sqrt(0.5)) < 1e-10);
  }
}
