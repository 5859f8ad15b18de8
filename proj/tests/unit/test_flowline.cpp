#include <cmath>

#include "doctest.h"
#include "mcflab/flowline.hpp"

using namespace mcf;

TEST_SUITE("flowline") {
  TEST_CASE("lines of -|x|^2/4 run straight into the origin") {
    const auto u = closed_form(
        2, [](const VecX& x) { return -x.squaredNorm() / 4; }, [](const VecX& x) { return VecX(-x / 2); });
    VecX x0(2);
    x0 << 0.6, 0.8;
    const auto line = trace(u, x0);
    CHECK(line.limit.norm() < 1e-6);
    CHECK(line.limit_critical);
    CHECK(line.length == doctest::Approx(1.0).epsilon(1e-5));
    const auto lim = limit_estimators(line);
    CHECK(lim.verdict == "limit");
    CHECK(lim.tangent_osc < 1e-6);
    const auto asym = asymptotics(line, u, 2, 0);
    CHECK(asym.u_deviation < 1e-3);
    CHECK(asym.grad_deviation < 1e-3);
  }

  TEST_CASE("cylinder model: tangent is orthogonal to the axis") {
    // Critical line along x1, weakly coupled: u = -(1 + x1^2 / 10) (x2^2 + x3^2) / 2.
    const auto u = closed_form(
        3, [](const VecX& x) { return -(1 + 0.1 * x[0] * x[0]) * (x[1] * x[1] + x[2] * x[2]) / 2; },
        [](const VecX& x) {
          const double r2 = x[1] * x[1] + x[2] * x[2], a = 1 + 0.1 * x[0] * x[0];
          VecX g(3);
          g << -0.1 * x[0] * r2, -a * x[1], -a * x[2];
          return g;
        });
    VecX x0(3);
    x0 << 0.5, 0.3, 0.1;
    const auto line = trace(u, x0);
    CHECK(std::abs(line.limit[0]) > 0.4);
    const auto lim = limit_estimators(line, MatX::Identity(3, 1));
    CHECK(lim.axis_part < 0.05);
  }

  TEST_CASE("a spiral field reports no limit") {
    const auto v = vector_field(2, [](const VecX& x) {
      VecX d(2);
      d << -x[1] - 0.1 * x[0], x[0] - 0.1 * x[1];
      return d;
    });
    CHECK(limit_estimators(trace(v, VecX::Unit(2, 0))).verdict == "no limit detected");
  }

  TEST_CASE("leaving the domain raises") {
    auto u = closed_form(
        2, [](const VecX& x) { return x[0]; }, [](const VecX&) { return VecX(VecX::Unit(2, 0)); });
    u.inside = [](const VecX& x) { return x.norm() < 1; };
    CHECK_THROWS_AS(trace(u, VecX::Zero(2)), DomainExitError);
  }
}
