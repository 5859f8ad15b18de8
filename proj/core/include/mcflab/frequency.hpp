#pragma once

#include <functional>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "mcflab/common.hpp"
#include "mcflab/spectral.hpp"

namespace mcf {

/// u on R^n with the Gaussian weight e^{-f}, f = |x|^2 / 4, and potential V (the bulk form of D
/// integrates |grad u|^2 - V u^2). For eigenfunctions L u = -lambda u take V = lambda.
struct FrequencyProblem {
  int n = 1;
  DriftFunction u;
  double lambda = 0;
  std::function<double(const VecX&)> potential;  // overrides lambda when set
  double r_min = 0.5, r_max = 10.0;
  int sphere_resolution = 12;  // see quad::unit_sphere
  int radial_nodes = 96;       // Gauss-Legendre nodes on [0, r] for the ball integral

  double V(const VecX& x) const { return potential ? potential(x) : lambda; }
};

struct FrequencySample {
  double r = 0;
  double I = 0;          // r^{1-n} int_{dB_r} u^2
  double D_surface = 0;  // r^{2-n} int_{dB_r} u u_r
  double D_bulk = 0;     // r^{2-n} e^{f(r)} int_{B_r} (|grad u|^2 - V u^2) e^{-f}
  double U = 0;          // D_surface / I
  double discrepancy = 0;  // |D_surface - D_bulk| / I, in units of U
};

/// DegenerateError when I(r) <= 0, DomainError when r is outside [r_min, r_max].
FrequencySample frequency(const FrequencyProblem& prob, double r);

/// Surface-only variant (no bulk integral), for u that are not smooth at the origin.
FrequencySample frequency_surface(const FrequencyProblem& prob, double r);

/// Samples on `count` evenly spaced radii spanning [r_min, r_max].
std::vector<FrequencySample> frequency_curve(const FrequencyProblem& prob, std::size_t count, bool bulk = true);

/// Centered difference of log I against 2 U / r at r (relative step h). The gap is relative to
/// max(1, |2 U / r|) since U is unbounded near zeros of u.
struct LogDerivativeCheck {
  double r = 0, dlogI = 0, two_U_over_r = 0, gap = 0;
};
LogDerivativeCheck log_derivative_check(const FrequencyProblem& prob, double r, double h = 1e-5);

/// Columns r, I, D_surface, D_bulk, U.
void write_frequency_csv(std::ostream& out, const std::vector<FrequencySample>& curve);

struct DichotomyOptions {
  double r_max = 20.0;
  double delta = 0.5;    // crossing threshold is delta + 2 max(0, lambda)
  double epsilon = 0.5;  // lower bound U > r^2 / 2 - n - 2 lambda - epsilon
  std::size_t samples = 2000;
  double rtol = 1e-12, atol = 1e-14;
  double renormalize_above = 1e150;
  /// The bound must hold from R1 <= bound_fraction * r_max on.
  double bound_fraction = 0.75;
};

struct DichotomyResult {
  int n = 1;
  double lambda = 0;
  std::vector<double> r, U, bound;  // bound = r^2 / 2 - n - 2 lambda - epsilon
  double threshold = 0;
  double crossing_r = std::numeric_limits<double>::quiet_NaN();  // first r with U >= threshold
  /// Smallest sample radius from which U > bound holds through r_max (NaN when it fails at r_max).
  double R1 = std::numeric_limits<double>::quiet_NaN();
  bool bound_holds = false;  // R1 <= bound_fraction * r_max
  std::size_t renormalizations = 0;
  std::string verdict;  // "exponential", "polynomial" or "undetermined"
};

/// Integrates u'' + ((n - 1) / r - r / 2) u' = -lambda u from (r0, u0, u0p) to r_max and follows
/// U = r u' / u. Verdict "exponential" when the quadratic lower bound holds on [R1, r_max] with
/// R1 <= bound_fraction * r_max, "polynomial" when U stays below the threshold at r_max. DegenerateError when
/// u vanishes at a sample.
DichotomyResult dichotomy_probe(int n, double lambda, double r0, double u0, double u0p,
                                const DichotomyOptions& opts = {});

/// Columns r, U, bound.
void write_dichotomy_csv(std::ostream& out, const DichotomyResult& res);

}  // namespace mcf
