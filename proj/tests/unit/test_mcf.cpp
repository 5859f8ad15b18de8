#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "mcflab/mcf.hpp"

using namespace mcf;

TEST_SUITE("mcf") {
  TEST_CASE("round spheres become extinct at R^2 / (2n)") {
    const auto c = detect_pinch(make_circle(1.0, 128), 0.0);
    CHECK(c.time == doctest::Approx(0.5).epsilon(1e-2));
    const auto s = detect_pinch(make_sphere(2, 1.0, 128), 0.0);
    CHECK(s.time == doctest::Approx(0.25).epsilon(1e-2));
    CHECK(s.point.norm() < 1e-3);
  }

  TEST_CASE("MCF shrinks a circle like sqrt(R^2 - 2 tau)") {
    const auto run = run_mcf(make_circle(1.0, 256), 0.0, 0.3);
    REQUIRE(run.termination == "t_end");
    const double r = total_length(run.final) / (2 * std::numbers::pi);
    CHECK(r == doctest::Approx(std::sqrt(0.4)).epsilon(2e-3));
  }

  TEST_CASE("explicit step refuses steps above the CFL bound") {
    const auto c = make_circle(1.0, 128);
    CHECK_THROWS_AS(step_mcf(c, 10 * cfl_bound(c)), StepSizeError);
  }

  TEST_CASE("the shrinker circle is stationary under the rescaled flow") {
    auto c = make_circle(std::sqrt(2.0), 128);
    const double dt = 0.5 * cfl_bound(c);
    for (int i = 0; i < 200; ++i) c = step_rescaled(c, dt);
    CHECK(total_length(c) / (2 * std::numbers::pi) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-3));
  }

  TEST_CASE("rescaled round sphere: F non-increasing, delta and A vanish") {
    const auto tr = run_rescaled(make_sphere(2, 2.0, 96), 4.0);
    CHECK(tr.termination == "t_end");
    CHECK(tr.max_area_increase <= 1e-9);
    for (const auto& row : tr.rows) {
      if (std::isfinite(row.delta)) CHECK(row.delta < 1e-8);
      if (std::isfinite(row.A)) CHECK(row.A < 1e-10);
    }
  }

  TEST_CASE("trace CSV and JSON are produced") {
    const auto tr = run_rescaled(make_circle(std::sqrt(2.0), 64), 2.0);
    std::ostringstream csv;
    write_trace_csv(csv, tr);
    CHECK(csv.str().find('\n') != std::string::npos);
    CHECK(trace_json(tr).find("termination") != std::string::npos);
  }
}
