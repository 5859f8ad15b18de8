#include "mcflab/frequency.hpp"

#include <array>
#include <cmath>
#include <ostream>

#include <boost/numeric/odeint.hpp>

#include "mcflab/quadrature.hpp"

namespace mcf {

namespace {

struct SphereSums {
  double uu = 0, uur = 0;
};

SphereSums sphere_sums(const FrequencyProblem& prob, const quad::SphereRule& rule, double r) {
  SphereSums s;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const VecX x = r * rule.nodes[i];
    const double u = prob.u.value(x);
    const double ur = prob.u.gradient(x).dot(rule.nodes[i]);
    s.uu += rule.weights[i] * u * u;
    s.uur += rule.weights[i] * u * ur;
  }
  return s;
}

FrequencySample evaluate(const FrequencyProblem& prob, double r, bool bulk) {
  if (prob.u.on_cylinder() || prob.u.n != prob.n) throw DomainError("frequency needs a function on R^n");
  if (!(r >= prob.r_min && r <= prob.r_max)) throw DomainError("radius outside the frequency range");
  const int n = prob.n;
  const auto rule = quad::unit_sphere(n, prob.sphere_resolution);
  // r^{1-n} int_{dB_r} = r^{1-n} r^{n-1} int_{S^{n-1}}, so only the extra powers of r survive.
  const SphereSums s = sphere_sums(prob, rule, r);
  FrequencySample out;
  out.r = r;
  out.I = s.uu;
  if (!(out.I > 0)) throw DegenerateError("I(r) <= 0 at r = " + std::to_string(r));
  out.D_surface = r * s.uur;
  out.U = out.D_surface / out.I;
  out.D_bulk = std::numeric_limits<double>::quiet_NaN();
  out.discrepancy = std::numeric_limits<double>::quiet_NaN();
  if (bulk) {
    // r^{2-n} e^{f(r)} int_0^r rho^{n-1} e^{-f(rho)} int_{S^{n-1}} (...) with the exponentials combined.
    const auto radial = quad::gauss_legendre(prob.radial_nodes, 0.0, r);
    double total = 0;
    for (std::size_t a = 0; a < radial.nodes.size(); ++a) {
      const double rho = radial.nodes[a];
      double shell = 0;
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const VecX x = rho * rule.nodes[i];
        const double u = prob.u.value(x);
        shell += rule.weights[i] * (prob.u.gradient(x).squaredNorm() - prob.V(x) * u * u);
      }
      total += radial.weights[a] * std::pow(rho, n - 1) * std::exp(0.25 * (r * r - rho * rho)) * shell;
    }
    out.D_bulk = std::pow(r, 2 - n) * total;
    out.discrepancy = std::abs(out.D_surface - out.D_bulk) / out.I;
  }
  return out;
}

}  // namespace

FrequencySample frequency(const FrequencyProblem& prob, double r) { return evaluate(prob, r, true); }

FrequencySample frequency_surface(const FrequencyProblem& prob, double r) { return evaluate(prob, r, false); }

std::vector<FrequencySample> frequency_curve(const FrequencyProblem& prob, std::size_t count, bool bulk) {
  if (count < 2) throw DomainError("frequency curve needs at least two radii");
  std::vector<FrequencySample> out;
  for (std::size_t i = 0; i < count; ++i) {
    const double r = prob.r_min + (prob.r_max - prob.r_min) * static_cast<double>(i) / static_cast<double>(count - 1);
    out.push_back(evaluate(prob, r, bulk));
  }
  return out;
}

LogDerivativeCheck log_derivative_check(const FrequencyProblem& prob, double r, double h) {
  FrequencyProblem wide = prob;
  const double dr = h * r;
  wide.r_min = std::min(prob.r_min, r - dr);
  wide.r_max = std::max(prob.r_max, r + dr);
  const double ip = frequency_surface(wide, r + dr).I;
  const double im = frequency_surface(wide, r - dr).I;
  LogDerivativeCheck c;
  c.r = r;
  c.dlogI = (std::log(ip) - std::log(im)) / (2 * dr);
  c.two_U_over_r = 2 * frequency_surface(wide, r).U / r;
  c.gap = std::abs(c.dlogI - c.two_U_over_r) / std::max(1.0, std::abs(c.two_U_over_r));
  return c;
}

void write_frequency_csv(std::ostream& out, const std::vector<FrequencySample>& curve) {
  out << "r,I,D_surface,D_bulk,U\n";
  out.precision(17);
  for (const auto& s : curve) out << s.r << ',' << s.I << ',' << s.D_surface << ',' << s.D_bulk << ',' << s.U << '\n';
}

DichotomyResult dichotomy_probe(int n, double lambda, double r0, double u0, double u0p, const DichotomyOptions& opts) {
  namespace ode = boost::numeric::odeint;
  if (n < 1) throw DomainError("dimension must be positive");
  if (!(r0 > 0 && r0 < opts.r_max)) throw DomainError("need 0 < r0 < r_max");
  if (opts.samples < 2) throw DomainError("dichotomy probe needs at least two samples");
  using State = std::array<double, 2>;
  const auto rhs = [n, lambda](const State& y, State& dy, double r) {
    dy[0] = y[1];
    dy[1] = -lambda * y[0] - ((n - 1) / r - r / 2) * y[1];
  };
  DichotomyResult res;
  res.n = n;
  res.lambda = lambda;
  res.threshold = opts.delta + 2 * std::max(0.0, lambda);
  State y{u0, u0p};
  auto stepper = ode::make_controlled(opts.atol, opts.rtol, ode::runge_kutta_dopri5<State>());
  const double span = opts.r_max - r0;
  double r = r0;
  for (std::size_t i = 0; i < opts.samples; ++i) {
    const double target = r0 + span * static_cast<double>(i) / static_cast<double>(opts.samples - 1);
    if (target > r) ode::integrate_adaptive(stepper, rhs, y, r, target, span / static_cast<double>(opts.samples));
    r = target;
    const double norm = std::hypot(y[0], y[1]);
    if (norm > opts.renormalize_above) {
      y[0] /= norm;
      y[1] /= norm;
      ++res.renormalizations;
    }
    if (y[0] == 0) throw DegenerateError("u vanishes at r = " + std::to_string(r));
    res.r.push_back(r);
    res.U.push_back(r * y[1] / y[0]);
    res.bound.push_back(r * r / 2 - n - 2 * lambda - opts.epsilon);
  }
  for (std::size_t i = 0; i < res.r.size(); ++i)
    if (res.U[i] >= res.threshold) {
      res.crossing_r = res.r[i];
      break;
    }
  for (std::size_t i = res.r.size(); i-- > 0;) {
    if (!(res.U[i] > res.bound[i])) break;
    res.R1 = res.r[i];
  }
  res.bound_holds = std::isfinite(res.R1) && res.R1 <= opts.bound_fraction * opts.r_max;
  if (res.bound_holds)
    res.verdict = "exponential";
  else if (res.U.back() < res.threshold)
    res.verdict = "polynomial";
  else
    res.verdict = "undetermined";
  return res;
}

void write_dichotomy_csv(std::ostream& out, const DichotomyResult& res) {
  out << "r,U,bound\n";
  out.precision(17);
  for (std::size_t i = 0; i < res.r.size(); ++i) out << res.r[i] << ',' << res.U[i] << ',' << res.bound[i] << '\n';
}

}  // namespace mcf
