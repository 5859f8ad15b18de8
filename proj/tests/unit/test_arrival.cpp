#include <cmath>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "mcflab/arrival.hpp"

using namespace mcf;

namespace {

// Sphere field -|x|^2 / (2n) in R^{n+1}.
ArrivalField paraboloid(int dim, double h) {
  const VecX lo = VecX::Constant(dim, -1.0), hi = VecX::Constant(dim, 1.0);
  return sample_field(
      lo, hi, h, [dim](const VecX& x) { return -x.squaredNorm() / (2.0 * (dim - 1)); },
      [](const VecX& x) { return x.norm() < 0.95; });
}

}  // namespace

TEST_SUITE("arrival") {
  TEST_CASE("circle arrival time matches -|x|^2 / 2") {
    ArrivalConfig cfg;
    cfg.h = 1.0 / 32;
    const auto f = compute_arrival(make_circle(1.0, 512), cfg);
    double err = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (!f.in_domain(i)) continue;
      const VecX x = f.point(i);
      if (x.norm() < 0.8) err = std::max(err, std::abs(f.value(i) + x.squaredNorm() / 2));
    }
    CHECK(err / 0.32 < 0.02);
    CHECK(f.stats.extinction_time == doctest::Approx(0.5).epsilon(1e-2));
  }

  TEST_CASE("closed-form field: Hessian, Laplacian and ratio") {
    const auto f = paraboloid(3, 1.0 / 32);
    const auto crit = critical_analysis(f);
    REQUIRE(!crit.points.empty());
    CHECK(crit.k == 0);
    const auto& p = crit.points.front();
    for (int i = 0; i < 3; ++i) CHECK(p.eigenvalues[i] == doctest::Approx(-0.5).epsilon(1e-6));
    CHECK(p.laplacian == doctest::Approx(-1.5).epsilon(1e-6));
    const auto rc = lojasiewicz_ratio(f);
    CHECK(rc.limit == doctest::Approx(1.0).epsilon(1e-6));
  }

  TEST_CASE("PDE residual vanishes on the sphere field") {
    const auto r = pde_residual(paraboloid(2, 1.0 / 64));
    CHECK(r.evaluated > 0);
    CHECK(r.l2 < 1e-2);
  }

  TEST_CASE("exponent fit: p = 2 on C^2 samples, 3/2 on x^3, error on short ranges") {
    CHECK(exponent_fit(gradient_pairs(paraboloid(2, 1.0 / 128))).p == doctest::Approx(2.0).epsilon(0.05));
    std::vector<std::pair<double, double>> cubic;
    for (int i = 0; i < 60; ++i) {
      const double x = std::pow(10.0, -3.0 + 3.0 * i / 59);
      cubic.emplace_back(x * x * x, 3 * x * x);
    }
    CHECK(exponent_fit(cubic).p == doctest::Approx(1.5).epsilon(1e-9));
    std::vector<std::pair<double, double>> short_range(cubic.begin() + 40, cubic.end());
    CHECK_THROWS_AS(exponent_fit(short_range), IllConditionedFit);
  }

  TEST_CASE("field files round trip") {
    const auto f = paraboloid(2, 1.0 / 16);
    const auto base = (std::filesystem::temp_directory_path() / "mcflab_unit_field").string();
    write_field(base, f);
    const auto g = read_field(base);
    CHECK(g.shape() == f.shape());
    CHECK(g.values() == f.values());
    CHECK(g.mask() == f.mask());
  }
}
