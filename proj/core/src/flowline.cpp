#include "mcflab/flowline.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>

#include <boost/numeric/odeint.hpp>

namespace mcf {

namespace {

using State = std::vector<double>;

VecX to_vec(const State& s) { return Eigen::Map<const VecX>(s.data(), static_cast<Eigen::Index>(s.size())); }

double angle(const VecX& a, const VecX& b) { return 2.0 * std::asin(std::min(1.0, 0.5 * (a - b).norm())); }

// Catmull-Rom weights and their first two derivatives in the local coordinate t in [0, 1].
struct Weights {
  std::array<double, 4> w, d, dd;
};

Weights catmull_rom(double t) {
  const double t2 = t * t, t3 = t2 * t;
  Weights k;
  k.w = {0.5 * (-t3 + 2 * t2 - t), 0.5 * (3 * t3 - 5 * t2 + 2), 0.5 * (-3 * t3 + 4 * t2 + t), 0.5 * (t3 - t2)};
  k.d = {0.5 * (-3 * t2 + 4 * t - 1), 0.5 * (9 * t2 - 10 * t), 0.5 * (-9 * t2 + 8 * t + 1), 0.5 * (3 * t2 - 2 * t)};
  k.dd = {0.5 * (-6 * t + 4), 0.5 * (18 * t - 10), 0.5 * (-18 * t + 8), 0.5 * (6 * t - 2)};
  return k;
}

struct Interpolant {
  std::shared_ptr<const ArrivalField> f;

  // Base cell (stencil corner) and local coordinates; false when the stencil leaves the domain.
  bool locate(const VecX& x, std::array<int, 3>& base, std::array<double, 3>& t) const {
    const int d = f->dim();
    if (x.size() != d) return false;
    for (int a = 0; a < 3; ++a) {
      base[a] = 0;
      t[a] = 0;
    }
    for (int a = 0; a < d; ++a) {
      const double c = (x[a] - f->origin()[a]) / f->h();
      if (!std::isfinite(c)) return false;
      const int i0 = static_cast<int>(std::floor(c));
      if (i0 - 1 < 0 || i0 + 2 >= f->shape()[a]) return false;
      base[a] = i0 - 1;
      t[a] = c - i0;
    }
    const int nz = d == 3 ? 4 : 1;
    for (int k = 0; k < nz; ++k)
      for (int j = 0; j < 4; ++j)
        for (int i = 0; i < 4; ++i)
          if (!f->in_domain(f->index({base[0] + i, base[1] + j, base[2] + k}))) return false;
    return true;
  }

  // Value, gradient and Hessian of the tensor-product interpolant.
  void eval(const VecX& x, double* value, VecX* grad, MatX* hess) const {
    std::array<int, 3> base;
    std::array<double, 3> t;
    if (!locate(x, base, t)) throw DomainExitError("point outside the interpolation domain", x);
    const int d = f->dim();
    std::array<Weights, 3> wt;
    for (int a = 0; a < 3; ++a) wt[a] = catmull_rom(t[a]);
    const double ih = 1.0 / f->h();
    double v = 0;
    VecX g = VecX::Zero(d);
    MatX hs = MatX::Zero(d, d);
    const int nz = d == 3 ? 4 : 1;
    for (int k = 0; k < nz; ++k)
      for (int j = 0; j < 4; ++j)
        for (int i = 0; i < 4; ++i) {
          const double fv = f->value(f->index({base[0] + i, base[1] + j, base[2] + k}));
          const std::array<int, 3> id{i, j, k};
          auto factor = [&](int a, int order) {
            if (a >= d) return 1.0;
            const auto& w = wt[a];
            return order == 0 ? w.w[id[a]] : order == 1 ? w.d[id[a]] : w.dd[id[a]];
          };
          std::array<int, 3> ord{0, 0, 0};
          auto product = [&]() { return factor(0, ord[0]) * factor(1, ord[1]) * factor(2, ord[2]); };
          v += fv * product();
          for (int a = 0; a < d; ++a) {
            ord = {0, 0, 0};
            ord[a] = 1;
            g[a] += fv * product() * ih;
            for (int b = a; b < d; ++b) {
              ord = {0, 0, 0};
              ord[a] += 1;
              ord[b] += 1;
              hs(a, b) += fv * product() * ih * ih;
            }
          }
        }
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < a; ++b) hs(a, b) = hs(b, a);
    if (value) *value = v;
    if (grad) *grad = g;
    if (hess) *hess = hs;
  }
};

}  // namespace

MatX Evaluator::jacobian(const VecX& x) const {
  if (hessian) return hessian(x);
  const double eps = h > 0 ? 0.5 * h : 1e-6 * std::max(1.0, x.norm());
  MatX j(dim, dim);
  for (int a = 0; a < dim; ++a) {
    VecX p = x, m = x;
    p[a] += eps;
    m[a] -= eps;
    j.col(a) = (gradient(p) - gradient(m)) / (2 * eps);
  }
  return j;
}

Evaluator interpolate(std::shared_ptr<const ArrivalField> field) {
  auto ip = std::make_shared<Interpolant>(Interpolant{std::move(field)});
  Evaluator e;
  e.dim = ip->f->dim();
  e.h = ip->f->h();
  e.value = [ip](const VecX& x) {
    double v;
    ip->eval(x, &v, nullptr, nullptr);
    return v;
  };
  e.gradient = [ip](const VecX& x) {
    VecX g;
    ip->eval(x, nullptr, &g, nullptr);
    return g;
  };
  e.hessian = [ip](const VecX& x) {
    MatX hs;
    ip->eval(x, nullptr, nullptr, &hs);
    return hs;
  };
  e.inside = [ip](const VecX& x) {
    std::array<int, 3> base;
    std::array<double, 3> t;
    return ip->locate(x, base, t);
  };
  return e;
}

Evaluator closed_form(int dim, std::function<double(const VecX&)> u, std::function<VecX(const VecX&)> grad,
                      std::function<MatX(const VecX&)> hess) {
  Evaluator e;
  e.dim = dim;
  e.value = std::move(u);
  e.gradient = std::move(grad);
  e.hessian = std::move(hess);
  return e;
}

Evaluator vector_field(int dim, std::function<VecX(const VecX&)> v) {
  Evaluator e;
  e.dim = dim;
  e.value = [](const VecX&) { return std::numeric_limits<double>::quiet_NaN(); };
  e.gradient = std::move(v);
  return e;
}

FlowLine trace(const Evaluator& u, const VecX& x0, const TraceOptions& opts) {
  namespace ode = boost::numeric::odeint;
  if (x0.size() != u.dim) throw DomainError("start point has the wrong dimension");
  if (!u.contains(x0)) throw DomainExitError("start point outside the domain", x0);
  const VecX g0 = u.gradient(x0);
  if (!(g0.norm() > 0)) throw DomainError("start point is critical");

  FlowLine line;
  line.dim = u.dim;
  auto stop_tol_at = [&](const VecX& x) {
    if (!std::isnan(opts.stop_tol)) return opts.stop_tol;
    if (u.h > 0) return opts.stop_factor * u.h * u.jacobian(x).operatorNorm();
    return 1e-7 * g0.norm();
  };

  VecX last = x0;
  auto rhs = [&](const State& s, State& ds, double) {
    const VecX x = to_vec(s);
    if (!x.allFinite() || !u.contains(x)) throw DomainExitError("flow line left the domain", last);
    const VecX g = u.gradient(x);
    ds.assign(g.data(), g.data() + g.size());
  };
  auto record = [&](double t, const VecX& x) {
    const double v = u.value(x);
    if (!line.u.empty() && std::isfinite(v)) line.max_u_decrease = std::max(line.max_u_decrease, line.u.back() - v);
    line.t.push_back(t);
    line.x.push_back(x);
    line.u.push_back(v);
    last = x;
  };

  auto stepper = ode::make_dense_output(opts.atol, opts.rtol, opts.dt_max, ode::runge_kutta_dopri5<State>());
  const double scale = u.h > 0 ? u.h : 1e-2 * (1.0 + x0.norm());
  stepper.initialize(State(x0.data(), x0.data() + x0.size()), 0.0, std::min(opts.dt_max, scale / g0.norm()));
  record(0.0, x0);
  State xs(static_cast<std::size_t>(u.dim));
  while (true) {
    if (line.steps >= opts.max_steps)
      throw BudgetError("flow line did not reach a critical point within " + std::to_string(opts.max_steps) + " steps");
    const auto [t0, t1] = stepper.do_step(rhs);
    ++line.steps;
    for (int m = 1; m <= opts.substeps; ++m) {
      const double tm = t0 + (t1 - t0) * m / opts.substeps;
      stepper.calc_state(tm, xs);
      record(tm, to_vec(xs));
    }
    const VecX& xe = line.x.back();
    line.stop_tol = stop_tol_at(xe);
    if (u.gradient(xe).norm() < line.stop_tol) break;
  }
  const double urange = std::abs(line.u.back() - line.u.front());
  line.monotone = !(line.max_u_decrease > 1e-8 * (urange + 1e-300)) || std::isnan(urange);

  // Aitken extrapolation of the exponential tail from three states spaced by half an e-fold;
  // the linearized flow x_inf = x - J^+ grad u(x) is the fallback.
  const VecX& xe = line.x.back();
  const MatX jac = u.jacobian(xe);
  Eigen::JacobiSVD<MatX> svd(jac, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const VecX sv = svd.singularValues();
  VecX inv = VecX::Zero(sv.size());
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] > opts.kernel_ratio * sv[0]) inv[i] = 1.0 / sv[i];
  line.limit = xe - svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose() * u.gradient(xe);
  const double gap_dt = sv[0] > 0 ? 0.5 / sv[0] : 0.0;
  const double te = line.t.back();
  if (gap_dt > 0 && te - 2 * gap_dt > 0) {
    auto state_at = [&](double t) {
      const auto it = std::lower_bound(line.t.begin(), line.t.end(), t);
      const std::size_t j = std::max<std::size_t>(1, static_cast<std::size_t>(it - line.t.begin()));
      const double w = (t - line.t[j - 1]) / (line.t[j] - line.t[j - 1]);
      return VecX((1 - w) * line.x[j - 1] + w * line.x[j]);
    };
    const VecX x0a = state_at(te - 2 * gap_dt), x1a = state_at(te - gap_dt);
    const VecX d0 = x1a - x0a, d1 = xe - x1a;
    const double q = d0.squaredNorm() > 0 ? d1.dot(d0) / d0.squaredNorm() : 0.0;
    const VecX aitken = xe + d1 * (q / (1 - q));
    if (q > 0 && q < 0.95 && u.contains(aitken) &&
        (!u.contains(line.limit) || u.gradient(aitken).norm() < u.gradient(line.limit).norm()))
      line.limit = aitken;
  }
  if (u.contains(line.limit)) {
    line.limit_grad_norm = u.gradient(line.limit).norm();
    line.limit_critical = line.limit_grad_norm <= line.stop_tol;
  } else {
    line.limit_grad_norm = std::numeric_limits<double>::quiet_NaN();
  }

  std::vector<double> cum(line.x.size(), 0.0);
  for (std::size_t i = 1; i < line.x.size(); ++i) cum[i] = cum[i - 1] + (line.x[i] - line.x[i - 1]).norm();
  line.traced_length = cum.back();
  const double gap = (xe - line.limit).norm();
  line.length = line.traced_length + gap;

  // Arclength from the limit: S_i = gap + traced_length - cum_i, decreasing along the trace.
  const double ds = std::isnan(opts.ds) ? (u.h > 0 ? 0.5 * u.h : line.length / 20000) : opts.ds;
  const std::size_t count = static_cast<std::size_t>(std::floor(line.traced_length / ds)) + 1;
  std::size_t seg = line.x.size() - 1;  // walk backwards over segments [seg - 1, seg]
  for (std::size_t j = 0; j < count; ++j) {
    const double target = line.traced_length - static_cast<double>(j) * ds;  // position in cum
    while (seg > 1 && cum[seg - 1] > target) --seg;
    const double len = cum[seg] - cum[seg - 1];
    const double w = len > 0 ? std::clamp((target - cum[seg - 1]) / len, 0.0, 1.0) : 0.0;
    const VecX p = (1 - w) * line.x[seg - 1] + w * line.x[seg];
    const VecX g = u.gradient(p);
    line.s.push_back(gap + static_cast<double>(j) * ds);
    line.gamma.push_back(p);
    line.gamma_s.push_back(g.norm() > 0 ? VecX(-g / g.norm()) : VecX(VecX::Zero(u.dim)));
    line.gamma_u.push_back(u.value(p));
    line.gamma_grad.push_back(g.norm());
  }
  return line;
}

AsymptoticsReport asymptotics(const FlowLine& line, const Evaluator& u, int n, int k, const MatX& axis,
                              const AsymptoticsOptions& opts) {
  if (line.s.empty()) throw ResolutionError("flow line has no arclength samples");
  if (k >= n) throw DomainError("asymptotics need k < n");
  AsymptoticsReport rep;
  rep.n = n;
  rep.k = k;
  const double q = n - k;
  const double u_lim = opts.relative_to_limit && u.contains(line.limit) ? u.value(line.limit) : 0.0;
  const bool has_axis = axis.cols() > 0;
  if (has_axis) {
    rep.axis_projection.reserve(line.s.size());
    for (const auto& gs : line.gamma_s) rep.axis_projection.push_back((axis.transpose() * gs).norm());
    rep.axis_tail_max = 0;
  }
  rep.s_lo = line.s.front();
  rep.s_hi = std::max(opts.tail_factor * line.s.front(), opts.tail_length * line.length);
  double tmin = std::numeric_limits<double>::infinity(), tmax = -tmin;
  for (std::size_t i = 0; i < line.s.size() && line.s[i] <= rep.s_hi; ++i) {
    const double s = line.s[i];
    const double du = line.gamma_u[i] - u_lim;
    rep.u_deviation = std::max(rep.u_deviation, std::abs(du / (-s * s / (2 * q)) - 1));
    const double g2 = line.gamma_grad[i] * line.gamma_grad[i];
    rep.grad_deviation = std::max(rep.grad_deviation, std::abs(g2 / (s * s / (q * q)) - 1));
    if (has_axis) rep.axis_tail_max = std::max(rep.axis_tail_max, rep.axis_projection[i]);
    if (du < 0) {
      rep.containment = std::max(rep.containment, (line.gamma[i] - line.limit).norm() / (2 * n * std::sqrt(-du)));
      const double tv = -std::log(-du) + 2 * std::log(s);
      tmin = std::min(tmin, tv);
      tmax = std::max(tmax, tv);
    } else {
      rep.containment = std::numeric_limits<double>::infinity();
    }
    ++rep.tail_count;
  }
  if (rep.tail_count < opts.min_tail)
    throw ResolutionError("only " + std::to_string(rep.tail_count) + " samples in the flow-line tail");
  rep.time_spread = tmax >= tmin ? tmax - tmin : std::numeric_limits<double>::quiet_NaN();
  return rep;
}

CurvatureReport curvature_diagnostics(const FlowLine& line, const Evaluator& u, double lambda) {
  if (!(lambda > 1)) throw DomainError("window factor must exceed 1");
  const std::size_t m = line.s.size();
  if (m < 3) throw ResolutionError("flow line too short for curvature diagnostics");
  CurvatureReport rep;
  rep.gss_fd.resize(m);
  rep.gss_field.resize(m);
  rep.s_gss.resize(m);
  std::vector<VecX> field(m, VecX::Zero(line.dim));
  for (std::size_t i = 0; i < m; ++i) {
    const VecX g = u.gradient(line.gamma[i]);
    const double gn = g.norm();
    if (gn > 0) {
      const VecX nu = g / gn;
      const VecX hn = u.jacobian(line.gamma[i]) * nu;
      field[i] = (hn - nu * nu.dot(hn)) / gn;
    }
    rep.gss_field[i] = field[i].norm();
  }
  // Differences over a window of about 2h on grids, where grid-scale noise in u would otherwise
  // dominate second derivatives; the field side is averaged over the same window.
  const double ds = line.s[1] - line.s[0];
  const std::size_t half = u.h > 0 ? std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(2 * u.h / ds))) : 1;
  double diff2 = 0, ref2 = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t a = i >= half ? i - half : 0, b = std::min(m - 1, i + half);
    const double span = line.s[b] - line.s[a];
    const VecX fd = (line.gamma_s[b] - line.gamma_s[a]) / span;
    VecX avg = VecX::Zero(line.dim);
    for (std::size_t j = a; j < b; ++j) avg += 0.5 * (field[j] + field[j + 1]) * (line.s[j + 1] - line.s[j]);
    avg /= span;
    rep.gss_fd[i] = fd.norm();
    rep.s_gss[i] = line.s[i] * rep.gss_fd[i];
    diff2 += (fd - avg).squaredNorm();
    ref2 += avg.squaredNorm();
  }
  rep.consistency_abs = std::sqrt(diff2 / static_cast<double>(m));
  if (ref2 > 1e-24 * static_cast<double>(m)) rep.consistency = std::sqrt(diff2 / ref2);

  std::vector<double> cum(m, 0.0);
  for (std::size_t i = 1; i < m; ++i)
    cum[i] = cum[i - 1] + 0.5 * (rep.gss_fd[i] + rep.gss_fd[i - 1]) * (line.s[i] - line.s[i - 1]);
  rep.total = cum.back();
  auto cum_at = [&](double s) {
    const auto it = std::upper_bound(line.s.begin(), line.s.end(), s);
    if (it == line.s.begin()) return 0.0;
    if (it == line.s.end()) return cum.back();
    const std::size_t j = static_cast<std::size_t>(it - line.s.begin());
    const double w = (s - line.s[j - 1]) / (line.s[j] - line.s[j - 1]);
    return (1 - w) * cum[j - 1] + w * cum[j];
  };
  for (std::size_t i = 0; i < m && lambda * line.s[i] <= line.s.back(); ++i) {
    rep.window_s.push_back(line.s[i]);
    rep.window.push_back(cum_at(lambda * line.s[i]) - cum[i]);
  }
  return rep;
}

namespace {

double max_pairwise_angle(const std::vector<VecX>& v, std::size_t max_pairs) {
  const std::size_t stride = std::max<std::size_t>(1, v.size() / std::max<std::size_t>(1, max_pairs));
  double best = 0;
  for (std::size_t i = 0; i < v.size(); i += stride)
    for (std::size_t j = i + stride; j < v.size(); j += stride) best = std::max(best, angle(v[i], v[j]));
  return best;
}

}  // namespace

LimitReport limit_estimators(const FlowLine& line, const MatX& axis, const LimitOptions& opts) {
  if (line.s.empty()) throw ResolutionError("flow line has no arclength samples");
  LimitReport rep;
  const std::size_t m = line.s.size();
  std::vector<VecX> sec(m), tan(m);
  for (std::size_t i = 0; i < m; ++i) {
    const VecX d = line.gamma[i] - line.limit;
    sec[i] = d.norm() > 0 ? VecX(d / d.norm()) : VecX(VecX::Zero(line.dim));
    tan[i] = -line.gamma_s[i];
  }
  auto osc_upto = [&](double s_hi, double& so, double& to) {
    std::size_t c = 0;
    while (c < m && line.s[c] <= s_hi) ++c;
    const std::vector<VecX> a(sec.begin(), sec.begin() + static_cast<long>(c)), b(tan.begin(), tan.begin() + static_cast<long>(c));
    so = max_pairwise_angle(a, opts.max_pairs);
    to = max_pairwise_angle(b, opts.max_pairs);
  };
  const double s0 = line.s.front();
  for (double sh = 2 * s0; sh <= line.s.back() && s0 > 0; sh *= 2) {
    double so, to;
    osc_upto(sh, so, to);
    rep.tail_s.push_back(sh);
    rep.secant_osc_seq.push_back(so);
    rep.tangent_osc_seq.push_back(to);
  }
  osc_upto(std::max(opts.tail_factor * s0, opts.tail_length * line.length), rep.secant_osc, rep.tangent_osc);
  rep.secant_limit = sec.front();
  rep.tangent_limit = tan.front();
  rep.agreement = angle(rep.secant_limit, -rep.tangent_limit);
  rep.limit_detected = rep.secant_osc < opts.threshold && rep.tangent_osc < opts.threshold;
  rep.verdict = rep.limit_detected ? "limit" : "no limit detected";

  if (axis.cols() > 0) {
    rep.axis_part = 0;
    const double s_hi = std::max(opts.tail_factor * s0, opts.tail_length * line.length);
    for (std::size_t i = 0; i < m && line.s[i] <= s_hi; ++i)
      rep.axis_part = std::max(rep.axis_part, (axis.transpose() * line.gamma_s[i]).norm());
    const MatX proj = MatX::Identity(line.dim, line.dim) - axis * axis.transpose();
    auto nearest = [&](double s) {
      const auto it = std::lower_bound(line.s.begin(), line.s.end(), s);
      return static_cast<std::size_t>(std::min<long>(it - line.s.begin(), static_cast<long>(m) - 1));
    };
    double sum = 0;
    for (double sj = s0; 2 * sj <= line.s.back(); sj *= 2) {
      sum += (proj * (line.gamma_s[nearest(sj)] - line.gamma_s[nearest(2 * sj)])).norm();
      rep.pi_partial_sums.push_back(sum);
    }
  }
  return rep;
}

void write_flowline_csv(std::ostream& out, const FlowLine& line, const CurvatureReport* curvature,
                        const AsymptoticsReport* asym) {
  static const char* names = "xyz";
  out << "s";
  for (int a = 0; a < line.dim; ++a) out << ',' << names[a];
  out << ",u,grad_norm";
  for (int a = 0; a < line.dim; ++a) out << ",gamma_s_" << names[a];
  out << ",gamma_ss_norm,axis_projection\n";
  const auto nan = std::numeric_limits<double>::quiet_NaN();
  out.precision(12);
  for (std::size_t i = 0; i < line.s.size(); ++i) {
    out << line.s[i];
    for (int a = 0; a < line.dim; ++a) out << ',' << line.gamma[i][a];
    out << ',' << line.gamma_u[i] << ',' << line.gamma_grad[i];
    for (int a = 0; a < line.dim; ++a) out << ',' << line.gamma_s[i][a];
    out << ',' << (curvature ? curvature->gss_fd[i] : nan);
    out << ',' << (asym && !asym->axis_projection.empty() ? asym->axis_projection[i] : nan) << '\n';
  }
}

}  // namespace mcf
