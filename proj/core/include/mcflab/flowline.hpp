#pragma once

#include <functional>
#include <iosfwd>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "mcflab/arrival.hpp"
#include "mcflab/common.hpp"

namespace mcf {

/// Smooth access to u and its derivatives. Non-gradient vector fields can be traced by
/// supplying `gradient` alone (value then reports NaN and monotonicity is not checked).
struct Evaluator {
  int dim = 0;
  double h = 0;  // resolution of the underlying grid, 0 for closed forms
  std::function<double(const VecX&)> value;
  std::function<VecX(const VecX&)> gradient;
  std::function<MatX(const VecX&)> hessian;  // central differences of `gradient` when empty
  std::function<bool(const VecX&)> inside;   // whole space when empty

  bool contains(const VecX& x) const { return !inside || inside(x); }
  MatX jacobian(const VecX& x) const;
};

/// Tensor-product Catmull-Rom interpolation of a field (C^1, exact on cubics along axes).
/// Points whose 4^dim stencil leaves the domain are outside.
Evaluator interpolate(std::shared_ptr<const ArrivalField> field);

/// Gradient vector field of a closed-form u.
Evaluator closed_form(int dim, std::function<double(const VecX&)> u, std::function<VecX(const VecX&)> grad,
                      std::function<MatX(const VecX&)> hess = {});

/// Integral curves of an arbitrary vector field (no potential).
Evaluator vector_field(int dim, std::function<VecX(const VecX&)> v);

struct TraceOptions {
  double rtol = 1e-9, atol = 1e-11;
  /// Stop once |grad u| falls below this; NaN means stop_factor h |Hess u| on grids and
  /// 1e-7 |grad u(x0)| on closed forms.
  double stop_tol = std::numeric_limits<double>::quiet_NaN();
  double stop_factor = 2.0;
  std::size_t max_steps = 20000;
  double dt_max = 10.0;
  /// Dense-output samples per accepted step, used for arclength.
  int substeps = 8;
  /// Spacing of the arclength resampling; NaN means h / 2 on grids and length / 20000 otherwise.
  double ds = std::numeric_limits<double>::quiet_NaN();
  /// Eigen-directions of the Jacobian below this fraction of the largest are left out of the
  /// linearized tail extrapolation.
  double kernel_ratio = 0.2;
};

struct FlowLine {
  int dim = 0;
  // Time parametrization x' = grad u(x), one entry per dense sample.
  std::vector<double> t;
  std::vector<VecX> x;
  std::vector<double> u;
  std::size_t steps = 0;
  bool monotone = true;
  double max_u_decrease = 0;  // largest drop of u between consecutive samples
  double stop_tol = 0;

  VecX limit;                 // x_infinity
  double limit_grad_norm = 0;
  bool limit_critical = false;  // |grad u(x_inf)| <= stop_tol
  double traced_length = 0;
  double length = 0;            // traced length plus the extrapolated gap to x_inf

  // Arclength parametrization measured from the limit, ascending in s (s[0] is the stop point).
  std::vector<double> s;
  std::vector<VecX> gamma;
  std::vector<VecX> gamma_s;   // unit tangent pointing away from the limit
  std::vector<double> gamma_u;
  std::vector<double> gamma_grad;  // |grad u(gamma(s))|
};

/// Integrates x' = grad u (adaptive Dormand-Prince 5(4)) from x0 until |grad u| < stop_tol, then
/// extrapolates the exponential tail through the linearized flow. DomainExitError when the
/// trajectory leaves the domain, BudgetError when the step cap is hit.
FlowLine trace(const Evaluator& u, const VecX& x0, const TraceOptions& opts = {});

struct AsymptoticsOptions {
  /// Tail: samples with s <= max(tail_factor * s[0], tail_length * length).
  double tail_factor = 3.0;
  double tail_length = 0.05;
  /// Measure u relative to its value at the limit rather than assuming u(x_inf) = 0.
  bool relative_to_limit = true;
  std::size_t min_tail = 5;
};

struct AsymptoticsReport {
  int n = 0, k = 0;
  double s_lo = 0, s_hi = 0;
  std::size_t tail_count = 0;
  double u_deviation = 0;     // tail max |u / (-s^2 / (2(n-k))) - 1|
  double grad_deviation = 0;  // tail max ||grad u|^2 / (s^2 / (n-k)^2) - 1|
  double axis_tail_max = std::numeric_limits<double>::quiet_NaN();  // |Pi_axis gamma_s|
  double containment = 0;     // tail max |gamma(s) - gamma(0)| / (2n sqrt(-u)), at most 1 when contained
  double time_spread = 0;     // spread of t(s) + 2 log s over the tail with t = -log(-u)
  std::vector<double> axis_projection;  // per sample, empty without an axis
};

/// Compares a traced line against the model profile around an (n,k) critical point. `axis`
/// holds the kernel directions as columns (empty when k = 0). ResolutionError when the tail has
/// fewer than min_tail samples.
AsymptoticsReport asymptotics(const FlowLine& line, const Evaluator& u, int n, int k, const MatX& axis = {},
                              const AsymptoticsOptions& opts = {});

struct CurvatureReport {
  std::vector<double> s_gss;        // s |gamma_ss| per sample
  std::vector<double> window_s;     // W(s) = int_s^{Lambda s} |gamma_ss|
  std::vector<double> window;
  double total = 0;                 // int |gamma_ss| over the traced line
  double consistency = std::numeric_limits<double>::quiet_NaN();  // relative L2 gap
  double consistency_abs = 0;       // L2 gap between the two gamma_ss estimates
  std::vector<double> gss_fd;       // |gamma_ss| from differences of gamma_s
  std::vector<double> gss_field;    // |grad^T log|grad u||
};

/// gamma_ss = grad^T log |grad u| compared with finite differences of gamma_s, and the windowed
/// integrals over [s, Lambda s] (trapezoid in arclength).
CurvatureReport curvature_diagnostics(const FlowLine& line, const Evaluator& u, double lambda = 2.0);

struct LimitOptions {
  double threshold = 1e-2;  // radians
  /// Tail used for the verdict: s <= max(tail_factor * s[0], tail_length * length).
  double tail_factor = 2.0;
  double tail_length = 1e-3;
  std::size_t max_pairs = 400;  // samples entering the pairwise angle
};

struct LimitReport {
  VecX secant_limit;   // (x - x_inf) / |x - x_inf| on the tail
  VecX tangent_limit;  // direction of motion x' / |x'| on the tail
  double secant_osc = 0, tangent_osc = 0;
  double agreement = 0;  // angle between secant_limit and -tangent_limit
  std::vector<double> tail_s, secant_osc_seq, tangent_osc_seq;  // nested dyadic tails
  bool limit_detected = false;
  std::string verdict;  // "limit" or "no limit detected"
  // Tangent decomposition against an axis: |Pi_axis gamma_s| on the tail and the partial sums
  // of |Pi gamma_{s_j} - Pi gamma_{s_j+1}| over dyadic s_j.
  double axis_part = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> pi_partial_sums;
};

LimitReport limit_estimators(const FlowLine& line, const MatX& axis = {}, const LimitOptions& opts = {});

/// Columns s, x..., u, |grad u|, gamma_s..., |gamma_ss|, Pi_axis(gamma_s).
void write_flowline_csv(std::ostream& out, const FlowLine& line, const CurvatureReport* curvature = nullptr,
                        const AsymptoticsReport* asym = nullptr);

}  // namespace mcf
