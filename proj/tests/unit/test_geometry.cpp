#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "mcflab/geometry.hpp"
#include "mcflab/quadrature.hpp"

using namespace mcf;
using std::numbers::pi;

TEST_SUITE("geometry") {
  TEST_CASE("round circle and spheres have H = n / R") {
    const auto c = make_circle(1.5, 256);
    for (std::size_t i = 0; i < c.size(); i += 17) CHECK(mean_curvature(c, i) == doctest::Approx(1 / 1.5).epsilon(1e-4));
    for (int n : {2, 3}) {
      const auto s = make_sphere(n, 2.0, 256);
      for (std::size_t i = 0; i < s.size(); i += 31)
        CHECK(mean_curvature(s, i) == doctest::Approx(n / 2.0).epsilon(1e-3));
    }
  }

  TEST_CASE("shrinker sphere of radius sqrt(2n) has zero residual") {
    for (int n : {1, 2, 3}) {
      const auto s = n == 1 ? make_circle(std::sqrt(2.0), 512) : make_sphere(n, std::sqrt(2.0 * n), 512);
      CHECK(shrinker_residual(s).max_abs < 1e-4);
    }
    CHECK(shrinker_residual(make_circle(1.0, 256)).max_abs > 0.4);
  }

  TEST_CASE("Gaussian area of round shrinkers") {
    // F(S^1_sqrt2) = 2 pi sqrt2 e^{-1/2}; F(S^2_2) = 16 pi / e.
    CHECK(gaussian_area(make_circle(std::sqrt(2.0), 512)).value == doctest::Approx(2 * pi * std::sqrt(2.0) * std::exp(-0.5)).epsilon(1e-6));
    CHECK(gaussian_area(make_sphere(2, 2.0, 512)).value == doctest::Approx(16 * pi / std::exp(1.0)).epsilon(1e-5));
  }

  TEST_CASE("resampling keeps the length") {
    const auto e = make_ellipse(1.0, 0.6, 400);
    const auto r = resample_arclength(e, 300);
    CHECK(r.size() == 300);
    CHECK(total_length(r) == doctest::Approx(total_length(e)).epsilon(1e-5));
    CHECK(max_spacing(r) / min_spacing(r) < 1.01);
  }

  TEST_CASE("surface CSV round trip") {
    const auto s = make_sphere(2, 1.0, 64);
    std::stringstream io;
    write_surface_csv(io, s);
    const auto back = read_surface_csv(io, 2);
    REQUIRE(back.size() == s.size());
    for (std::size_t i = 0; i < s.size(); ++i) CHECK((back.samples()[i] - s.samples()[i]).norm() < 1e-12);
  }

  TEST_CASE("dumbbell is symmetric with the requested neck") {
    const auto d = make_dumbbell(2, 1.0, 3.0, 0.3, 1.5, 1024);
    double min_r = 1e9;
    for (const auto& p : d.samples())
      if (std::abs(p.x()) < 0.5) min_r = std::min(min_r, p.y());
    CHECK(min_r == doctest::Approx(0.3).epsilon(1e-2));
  }

  TEST_CASE("quadrature rules") {
    const auto g = quad::gauss_legendre(8, 0.0, 2.0);
    double s = 0;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) s += g.weights[i] * std::pow(g.nodes[i], 7);
    CHECK(s == doctest::Approx(32.0).epsilon(1e-12));
    CHECK(quad::unit_sphere_area(3) == doctest::Approx(4 * pi));
    const auto sp = quad::unit_sphere(3, 6);
    double z2 = 0;
    for (std::size_t i = 0; i < sp.nodes.size(); ++i) z2 += sp.weights[i] * sp.nodes[i][2] * sp.nodes[i][2];
    CHECK(z2 == doctest::Approx(4 * pi / 3).epsilon(1e-12));
  }
}
