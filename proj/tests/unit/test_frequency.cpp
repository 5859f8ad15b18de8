#include <cmath>

#include "doctest.h"
#include "mcflab/frequency.hpp"

using namespace mcf;

TEST_SUITE("frequency") {
  TEST_CASE("homogeneous functions have constant frequency") {
    for (int d = 1; d <= 3; ++d) {
      FrequencyProblem p;
      p.n = 2;
      p.u.n = 2;
      p.u.value = [d](const VecX& x) { return std::pow(x.norm(), d); };
      p.u.gradient = [d](const VecX& x) { return VecX(d * std::pow(x.norm(), d - 2) * x); };
      for (const auto& s : frequency_curve(p, 5, false)) CHECK(s.U == doctest::Approx(d).epsilon(1e-9));
    }
  }

  TEST_CASE("surface and bulk forms agree for eigenfunctions") {
    FrequencyProblem p;
    p.n = 2;
    p.u = DriftFunction::flat(hermite_eigen(2, 2)[0]);
    p.lambda = 1.0;
    p.r_max = 4.0;
    for (const auto& s : frequency_curve(p, 4)) CHECK(s.discrepancy < 1e-7);
    CHECK(log_derivative_check(p, 2.0).gap < 1e-5);
  }

  TEST_CASE("radii outside the range are rejected") {
    FrequencyProblem p;
    p.u = DriftFunction::flat(hermite_1d(1));
    CHECK_THROWS_AS(frequency(p, 20.0), DomainError);
  }

  TEST_CASE("dichotomy verdicts") {
    CHECK(dichotomy_probe(2, 0.0, 1.0, 1.0, 5.0).verdict == "exponential");
    DichotomyOptions o;
    o.r_max = 8.0;
    CHECK(dichotomy_probe(2, 1.0, 4.0, 12.0, 8.0, o).verdict == "polynomial");
  }
}
