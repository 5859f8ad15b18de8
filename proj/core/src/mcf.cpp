#include "mcflab/mcf.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include <json.hpp>

#include "mcflab/quadrature.hpp"

namespace mcf {

namespace {

void require_curve(const Surface& s) {
  if (s.kind() == SurfaceKind::levelset_isosurface) throw DomainError("flow steppers need a curve or profile surface");
}

double speed_of(const Surface& s, std::size_t i, const CurveFrame& f, bool rescaled) {
  return rescaled ? shrinker_speed(s.samples()[i], f) : f.H;
}

void check_singular(const Surface& s, const std::vector<CurveFrame>& frames, double threshold, double time) {
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const double h = 0.5 * (frames[i].spacing_minus + frames[i].spacing_plus);
    if (std::abs(frames[i].H) * h > threshold) throw SingularityDetected(s.samples()[i], time, i);
  }
}

double cfl_from_frames(const Surface& s, const std::vector<CurveFrame>& frames) {
  double max_h = 0;
  double h = std::numeric_limits<double>::infinity();
  const bool capped = s.kind() == SurfaceKind::profile_of_revolution && s.ends() == ProfileEnds::capped;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    max_h = std::max(max_h, std::abs(frames[i].H));
    if (!capped || i + 1 < frames.size()) h = std::min(h, frames[i].spacing_plus);
  }
  return 0.4 * h * h / (max_h * h + 1.0);
}

Surface advance(const Surface& s, const std::vector<CurveFrame>& frames, double dt, bool rescaled) {
  std::vector<Vec2> next(s.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    next[i] = s.samples()[i] - dt * speed_of(s, i, frames[i], rescaled) * frames[i].normal;
  return s.with_samples(std::move(next));
}

void check_mean_convex(const Surface& s) {
  if (!s.mean_convex_flag()) return;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (!(curve_frame(s, i).H > 0)) throw DomainError("step lost mean convexity at sample " + std::to_string(i));
}

Surface step_impl(const Surface& s, double dt, const StepOptions& opts, bool rescaled) {
  require_curve(s);
  const auto frames = curve_frames(s);
  const double bound = cfl_from_frames(s, frames);
  if (opts.enforce_cfl && dt > bound) throw StepSizeError(dt, bound);
  check_singular(s, frames, opts.singularity_threshold, opts.time);
  Surface next = advance(s, frames, dt, rescaled);
  check_mean_convex(next);
  return next;
}

// Grading density 1/r. On capped profiles r is floored at a quarter of the largest radius
// near the two cap tips, which would otherwise collect samples.
struct GradingDensity {
  explicit GradingDensity(const Surface& s) {
    if (s.ends() == ProfileEnds::periodic) return;
    double hi = 0;
    for (const auto& p : s.samples()) hi = std::max(hi, p.y());
    floor = 0.25 * hi;
    left = s.samples().front();
    right = s.samples().back();
  }
  double weight_radius(const Vec2& q) const {
    if (floor > 0 && std::min((q - left).norm(), (q - right).norm()) < 4 * floor) return std::max(q.y(), floor);
    return q.y();
  }
  double operator()(const Vec2& q) const { return 1.0 / weight_radius(q); }

  double floor = 0;
  Vec2 left = Vec2::Zero(), right = Vec2::Zero();
};

}  // namespace

Surface graded_resample(const Surface& s, std::size_t count) {
  if (s.kind() != SurfaceKind::profile_of_revolution) return resample_arclength(s, count);
  return resample_density(s, count, GradingDensity(s));
}

namespace {

bool graded_profile(const Surface& s, const FlowOptions& opts) {
  return opts.graded && s.kind() == SurfaceKind::profile_of_revolution;
}

Surface maybe_resample(const Surface& s, const FlowOptions& opts) {
  if (opts.coarsen_spacing > 0 && s.size() > 32) {
    const double length = total_length(s);
    const double target =
        opts.coarsen_spacing * (opts.coarsen_length > 0 ? std::sqrt(std::min(1.0, length / opts.coarsen_length)) : 1.0);
    if (length < 0.5 * target * static_cast<double>(s.size())) {
      const auto count = std::max<std::size_t>(32, static_cast<std::size_t>(length / target));
      return graded_profile(s, opts) ? graded_resample(s, count) : resample_arclength(s, count);
    }
  }
  if (!graded_profile(s, opts)) {
    if (max_spacing(s) > opts.resample_ratio * min_spacing(s)) return resample_arclength(s, s.size());
    return s;
  }
  const GradingDensity density(s);
  const auto& p = s.samples();
  const bool capped = s.ends() == ProfileEnds::capped;
  double lo = std::numeric_limits<double>::infinity(), hi = 0;
  for (std::size_t i = 0; i + (capped ? 1 : 0) < p.size(); ++i) {
    const Vec2 a = p[i];
    const Vec2 b = s.extended(static_cast<std::ptrdiff_t>(i) + 1);
    const double w = (b - a).norm() / density.weight_radius(0.5 * (a + b));
    lo = std::min(lo, w);
    hi = std::max(hi, w);
  }
  if (hi > opts.resample_ratio * lo) return graded_resample(s, s.size());
  return s;
}

// Interior neck of a capped profile: the smallest radius between the first and last local
// maxima of r. Returns size() when the profile has a single bulge.
std::size_t capped_neck(const Surface& s) {
  const auto& p = s.samples();
  const std::size_t m = p.size();
  std::size_t first = m, last = m;
  for (std::size_t i = 1; i + 1 < m; ++i) {
    if (p[i].y() >= p[i - 1].y() && p[i].y() > p[i + 1].y()) {
      if (first == m) first = i;
      last = i;
    }
  }
  if (first == m || first == last) return m;
  std::size_t arg = first;
  for (std::size_t i = first; i <= last; ++i)
    if (p[i].y() < p[arg].y()) arg = i;
  return arg;
}

Vec2 centroid(const Surface& s) {
  Vec2 c = Vec2::Zero();
  for (const auto& p : s.samples()) c += p;
  c /= static_cast<double>(s.size());
  if (s.kind() == SurfaceKind::profile_of_revolution) c.y() = 0;
  return c;
}

// Size proxy whose square decays linearly near the pinch: neck radius for periodic profiles
// and necked capped profiles, largest distance to the centroid otherwise.
double size_proxy(const Surface& s, Vec2* where) {
  if (s.kind() == SurfaceKind::profile_of_revolution) {
    std::size_t arg = s.size();
    if (s.ends() == ProfileEnds::periodic) {
      arg = 0;
      for (std::size_t i = 1; i < s.size(); ++i)
        if (s.samples()[i].y() < s.samples()[arg].y()) arg = i;
    } else {
      arg = capped_neck(s);
    }
    if (arg < s.size()) {
      if (where) *where = Vec2(s.samples()[arg].x(), 0.0);
      return s.samples()[arg].y();
    }
  }
  const Vec2 c = centroid(s);
  double r = 0;
  for (const auto& p : s.samples()) r = std::max(r, (p - c).norm());
  if (where) *where = c;
  return r;
}

// Range of period shifts whose copies can meet the ball of the given radius.
std::pair<long, long> tile_range(const Surface& s, double radius) {
  if (s.kind() != SurfaceKind::profile_of_revolution || s.ends() != ProfileEnds::periodic) return {0, 0};
  double lo = s.samples().front().x(), hi = lo;
  for (const auto& p : s.samples()) {
    lo = std::min(lo, p.x());
    hi = std::max(hi, p.x());
  }
  return {static_cast<long>(std::floor((-radius - hi) / s.period())),
          static_cast<long>(std::ceil((radius - lo) / s.period()))};
}

Surface rescale_about(const Surface& s, double factor, double x0) {
  std::vector<Vec2> pts(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const Vec2& p = s.samples()[i];
    pts[i] = Vec2(factor * (p.x() - x0), factor * p.y());
  }
  if (s.kind() == SurfaceKind::profile_of_revolution)
    return Surface::profile(s.n(), std::move(pts), s.ends(), factor * s.period());
  return Surface::plane_curve(std::move(pts));
}

// Meridian gradients of H inside B_{2n}.
GradientStep gradient_step(const Surface& s, const std::vector<CurveFrame>& frames, double t) {
  GradientStep g;
  g.t = t;
  const auto n = static_cast<std::ptrdiff_t>(s.size());
  const double ball = 2.0 * s.n();
  const bool capped = s.kind() == SurfaceKind::profile_of_revolution && s.ends() == ProfileEnds::capped;
  const auto [m_lo, m_hi] = tile_range(s, ball);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const Vec2& p = s.samples()[static_cast<std::size_t>(i)];
    const auto& f = frames[static_cast<std::size_t>(i)];
    double hm, hp;
    if (capped && (i == 0 || i == n - 1)) {
      // Mirror symmetry makes H even across the axis.
      const std::size_t in = static_cast<std::size_t>(i == 0 ? 1 : n - 2);
      hm = (i == 0) ? frames[0].H : frames[in].H;
      hp = (i == 0) ? frames[in].H : frames[static_cast<std::size_t>(n - 1)].H;
    } else {
      hm = frames[static_cast<std::size_t>((i - 1 + n) % n)].H;
      hp = frames[static_cast<std::size_t>((i + 1) % n)].H;
    }
    const double a = f.spacing_minus, b = f.spacing_plus;
    const double dh = (a * a * hp - b * b * hm + (b * b - a * a) * f.H) / (a * b * (a + b));
    for (long m = m_lo; m <= m_hi; ++m) {
      const Vec2 q = p + Vec2(static_cast<double>(m) * s.period(), 0.0);
      if (q.norm() <= ball) g.grad.push_back(dh * f.tangent);
    }
  }
  return g;
}

double max_abs_with(const MatX& pi, const Vec2& g, const quad::SphereRule* rot) {
  const auto dim = pi.rows();
  if (!rot) {
    VecX v(2);
    v << g.x(), g.y();
    return (pi * v).norm();
  }
  double best = 0;
  VecX v(dim);
  for (const auto& w : rot->nodes) {
    v(0) = g.x();
    v.tail(dim - 1) = g.y() * w;
    best = std::max(best, (pi * v).norm());
  }
  return best;
}

}  // namespace

double cfl_bound(const Surface& s) {
  require_curve(s);
  return cfl_from_frames(s, curve_frames(s));
}

Surface step_mcf(const Surface& s, double dt, const StepOptions& opts) { return step_impl(s, dt, opts, false); }

Surface step_rescaled(const Surface& s, double dt, const StepOptions& opts) { return step_impl(s, dt, opts, true); }

std::vector<double> rescaled_speed(const Surface& s) { return shrinker_residual(s).phi; }

double gaussian_l2_squared(const Surface& s, const std::vector<double>& values) {
  require_curve(s);
  if (values.size() != s.size()) throw DomainError("value count differs from sample count");
  const auto [m_lo, m_hi] = tile_range(s, 12.0);
  const auto n = static_cast<std::ptrdiff_t>(s.size());
  const bool profile = s.kind() == SurfaceKind::profile_of_revolution;
  const double sphere = profile ? quad::unit_sphere_area(s.n()) : 1.0;
  double sum = 0;
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const double ds = 0.5 * ((s.extended(i) - s.extended(i - 1)).norm() + (s.extended(i + 1) - s.extended(i)).norm());
    const Vec2& p = s.samples()[static_cast<std::size_t>(i)];
    const double rw = profile ? sphere * std::pow(p.y(), s.n() - 1) : 1.0;
    const double v2 = values[static_cast<std::size_t>(i)] * values[static_cast<std::size_t>(i)];
    for (long m = m_lo; m <= m_hi; ++m) {
      const Vec2 q = p + Vec2(static_cast<double>(m) * s.period(), 0.0);
      sum += v2 * std::exp(-0.25 * q.squaredNorm()) * ds * rw;
    }
  }
  return sum;
}

namespace {

McfRun run_mcf_impl(const Surface& initial, double tau_start, double tau_end, const FlowOptions& opts,
                    std::vector<Surface>* keep, const StepObserver& observer = {}) {
  require_curve(initial);
  McfRun run;
  Surface s = initial;
  double tau = tau_start;
  run.termination = "t_end";
  const double stop_size = std::max(opts.stop_fraction * size_proxy(initial, nullptr), opts.stop_size);
  while (tau < tau_end) {
    if (stop_size > 0 && !run.history_min_r.empty() && run.history_min_r.back() < stop_size) {
      run.termination = "size";
      size_proxy(s, &run.singular_point);
      break;
    }
    const auto frames = curve_frames(s);
    try {
      check_singular(s, frames, opts.singularity_threshold, tau);
    } catch (const SingularityDetected& e) {
      run.termination = "singularity";
      run.singular_point = e.location();
      break;
    }
    const double dt = std::min({opts.cfl_safety * cfl_from_frames(s, frames), opts.dt_max, tau_end - tau});
    Surface next = advance(s, frames, dt, false);
    const double tau_next = (dt == tau_end - tau) ? tau_end : tau + dt;
    if (observer) observer(tau, s, tau_next, next);
    s = maybe_resample(next, opts);
    tau = tau_next;
    ++run.steps;
    run.history_tau.push_back(tau);
    run.history_min_r.push_back(size_proxy(s, nullptr));
    if (keep) keep->push_back(s);
  }
  run.final = std::move(s);
  run.tau = tau;
  return run;
}

FlowOptions pinch_options(const FlowOptions& opts) {
  FlowOptions local = opts;
  if (local.stop_fraction <= 0 && local.stop_size <= 0) local.stop_fraction = 2e-3;
  return local;
}

}  // namespace

PinchEstimate estimate_pinch(const McfRun& run) {
  if (run.termination == "t_end" || run.history_tau.size() < 10)
    throw DomainError("MCF run did not reach a singularity");
  PinchEstimate est;
  size_proxy(run.final, &est.point);
  const double r_last = run.history_min_r.back();
  // Linear fit of r^2 against tau over the final stretch (r within 30% of the last value).
  double sw = 0, st = 0, sr = 0, stt = 0, str = 0;
  std::size_t used = 0;
  for (std::size_t i = run.history_tau.size(); i-- > 0;) {
    const double r = run.history_min_r[i];
    if (r > 1.3 * r_last && used >= 10) break;
    const double t = run.history_tau[i] - run.history_tau.back(), r2 = r * r;
    sw += 1;
    st += t;
    sr += r2;
    stt += t * t;
    str += t * r2;
    ++used;
  }
  const double slope = (sw * str - st * sr) / (sw * stt - st * st);
  const double icpt = (sr - slope * st) / sw;
  est.fit_slope = slope;
  est.time = run.history_tau.back() - icpt / slope;
  return est;
}

McfRun run_mcf(const Surface& initial, double tau_start, double tau_end, const FlowOptions& opts,
               const StepObserver& observer) {
  return run_mcf_impl(initial, tau_start, tau_end, opts, nullptr, observer);
}

PinchEstimate detect_pinch(const Surface& initial, double tau_start, const FlowOptions& opts) {
  return estimate_pinch(run_mcf_impl(initial, tau_start, std::numeric_limits<double>::max(), pinch_options(opts), nullptr));
}

double axis_grad_H(const RescaledFlowTrace& trace, int j, int rotation_resolution) {
  if (trace.rows.empty()) throw DependencyError("empty trace");
  const int idx = j - trace.rows.front().j;
  if (idx < 0 || static_cast<std::size_t>(idx + 1) >= trace.rows.size() ||
      static_cast<std::size_t>(idx) >= trace.intervals.size())
    throw DependencyError("interval [" + std::to_string(j) + ", " + std::to_string(j + 1) + "] not in the trace");
  const TraceRow& next = trace.rows[static_cast<std::size_t>(idx + 1)];
  if (!next.has_cylinder) throw DependencyError("missing cylinder fit at j = " + std::to_string(j + 1));
  const MatX pi = next.cylinder.pi();
  quad::SphereRule rule;
  const quad::SphereRule* rot = nullptr;
  if (trace.n >= 2) {
    rule = quad::unit_sphere(trace.n, rotation_resolution);
    rot = &rule;
  }
  const auto& steps = trace.intervals[static_cast<std::size_t>(idx)];
  double total = 0;
  double prev_t = 0, prev_sup = 0;
  for (std::size_t s = 0; s < steps.size(); ++s) {
    double sup = 0;
    for (const auto& g : steps[s].grad) sup = std::max(sup, max_abs_with(pi, g, rot));
    if (s > 0) total += 0.5 * (steps[s].t - prev_t) * (sup + prev_sup);
    prev_t = steps[s].t;
    prev_sup = sup;
  }
  return total;
}

namespace {

// Fills rows, intervals and per-step diagnostics from the sequence (t_i, Sigma_{t_i}).
void process_sequence(RescaledFlowTrace& trace, const std::vector<double>& ts, const std::vector<Surface>& sigs,
                      const RescaledConfig& cfg) {
  // Row for integer j: the step nearest to j, if it lies within half a step of it.
  std::vector<int> row_of(ts.size(), std::numeric_limits<int>::min());
  for (int j = static_cast<int>(std::ceil(ts.front() - 1e-9)); j <= static_cast<int>(std::floor(ts.back() + 1e-9)); ++j) {
    const auto it = std::lower_bound(ts.begin(), ts.end(), static_cast<double>(j));
    std::size_t best = static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - ts.begin(), ts.size() - 1));
    if (best > 0 && std::abs(ts[best - 1] - j) < std::abs(ts[best] - j)) --best;
    const double gap = std::max(best > 0 ? ts[best] - ts[best - 1] : 0.0, best + 1 < ts.size() ? ts[best + 1] - ts[best] : 0.0);
    if (std::abs(ts[best] - j) <= 0.5 * gap + 1e-9) row_of[best] = j;
  }
  std::size_t first = ts.size();
  for (std::size_t i = 0; i < ts.size(); ++i)
    if (row_of[i] != std::numeric_limits<int>::min()) {
      first = i;
      break;
    }
  if (first == ts.size()) return;

  double displacement = 0;
  double prev_F = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = first; i < ts.size(); ++i) {
    const Surface& sig = sigs[i];
    const auto frames = curve_frames(sig);
    const double F = gaussian_area(sig, cfg.quad).value;
    if (!std::isnan(prev_F)) trace.max_area_increase = std::max(trace.max_area_increase, F - prev_F);
    prev_F = F;
    if (row_of[i] != std::numeric_limits<int>::min()) {
      TraceRow row;
      row.j = row_of[i];
      row.t = ts[i];
      row.F = F;
      for (const auto& p : sig.samples()) row.max_radius = std::max(row.max_radius, p.norm());
      if (cfg.fit_cylinders) {
        try {
          const CylinderFit fit = fit_cylinder(sig, cfg.k, cfg.fit);
          row.has_cylinder = true;
          row.cylinder = fit.cylinder;
          row.norms = fit.norms;
          row.measured_radius = fit.measured_radius;
          row.graphical_radius = fit.graphical_radius;
        } catch (const GraphFailure&) {
          trace.termination = "graph_failure";
          trace.t_final = ts[i];
          break;
        } catch (const DomainError&) {
          // Nothing left inside the graph ball; the row keeps no cylinder.
          ++trace.fit_unavailable;
        }
      }
      const GradientStep g = gradient_step(sig, frames, ts[i]);
      if (!trace.rows.empty()) {
        trace.rows.back().displacement = displacement;
        trace.intervals.back().push_back(g);
      }
      displacement = 0;
      trace.rows.push_back(row);
      trace.snapshots.push_back(sig);
      trace.intervals.emplace_back();
      trace.intervals.back().push_back(g);
    } else {
      trace.intervals.back().push_back(gradient_step(sig, frames, ts[i]));
    }
    trace.t_final = ts[i];
    if (i + 1 < ts.size()) {
      std::vector<double> phi(sig.size());
      for (std::size_t q = 0; q < sig.size(); ++q) phi[q] = shrinker_speed(sig.samples()[q], frames[q]);
      displacement += (ts[i + 1] - ts[i]) * std::sqrt(gaussian_l2_squared(sig, phi));
    }
  }
  // The last interval never closed.
  if (!trace.intervals.empty()) trace.intervals.pop_back();
}

}  // namespace

RescaledFlowTrace run_rescaled(const Surface& initial, double t_end, const RescaledConfig& cfg) {
  require_curve(initial);
  for (std::size_t i = 0; i < initial.size(); ++i)
    if (!(mean_curvature(initial, i) > 0)) throw DomainError("run_rescaled needs a mean convex surface");

  RescaledFlowTrace trace;
  trace.n = initial.n();
  trace.k = cfg.k;
  trace.mode = cfg.mode;
  std::vector<double> ts;
  std::vector<Surface> sigs;
  std::string reason = "t_end";

  if (cfg.mode == "direct") {
    Surface s = initial;
    double t = 0;
    ts.push_back(t);
    sigs.push_back(s);
    int next = 1;
    while (t < t_end - 1e-12) {
      const auto frames = curve_frames(s);
      try {
        check_singular(s, frames, cfg.flow.singularity_threshold, t);
      } catch (const SingularityDetected&) {
        reason = "singularity";
        break;
      }
      const double target = std::min(static_cast<double>(next), t_end);
      double dt = std::min(cfg.flow.cfl_safety * cfl_from_frames(s, frames), cfg.flow.dt_max);
      const bool land = dt >= target - t;
      if (land) dt = target - t;
      s = maybe_resample(advance(s, frames, dt, true), cfg.flow);
      t = land ? target : t + dt;
      if (land) ++next;
      ++trace.accepted_steps;
      ts.push_back(t);
      sigs.push_back(s);
    }
  } else if (cfg.mode == "mcf_rescaling") {
    std::vector<Surface> kept;
    const FlowOptions flow = pinch_options(cfg.flow);
    const McfRun run = run_mcf_impl(initial, 0.0, std::numeric_limits<double>::max(), flow, &kept);
    trace.accepted_steps = run.steps;
    if (std::isnan(cfg.pinch_time) || std::isnan(cfg.pinch_x)) {
      trace.pinch = estimate_pinch(run);
    } else {
      trace.pinch.time = cfg.pinch_time;
      trace.pinch.point = Vec2(cfg.pinch_x, 0.0);
    }
    const double T = trace.pinch.time;
    if (!(T > 0)) throw DomainError("pinch time must be positive");
    reason = run.termination;
    auto push = [&](double tau, const Surface& m) {
      if (!(tau < T)) return false;
      const double t = -std::log(T - tau);
      if (t > t_end + 1e-12) return false;
      ts.push_back(t);
      sigs.push_back(rescale_about(m, std::exp(0.5 * t), trace.pinch.point.x()));
      return true;
    };
    push(0.0, initial);
    for (std::size_t i = 0; i < kept.size(); ++i) {
      if (!push(run.history_tau[i], kept[i])) {
        reason = "t_end";
        break;
      }
    }
    if (!ts.empty() && ts.back() >= t_end - 1e-3) reason = "t_end";
  } else {
    throw DomainError("unknown rescaled mode: " + cfg.mode);
  }

  trace.termination = reason;
  process_sequence(trace, ts, sigs, cfg);

  const std::size_t rows = trace.rows.size();
  for (std::size_t i = 1; i + 2 < rows; ++i) {
    const double rad = trace.rows[i - 1].F - trace.rows[i + 2].F;
    if (rad < 0) {
      trace.rows[i].delta_clamped = true;
      ++trace.clamp_count;
    }
    trace.rows[i].delta = std::sqrt(std::max(rad, 0.0));
  }
  for (std::size_t i = 0; i + 1 < rows; ++i) {
    if (trace.rows[i].has_cylinder && trace.rows[i + 1].has_cylinder) {
      trace.rows[i].projection_jump = projection_distance(trace.rows[i].cylinder.pi(), trace.rows[i + 1].cylinder.pi());
      trace.rows[i].A = axis_grad_H(trace, trace.rows[i].j, cfg.rotation_resolution);
    }
  }
  return trace;
}

void write_trace_csv(std::ostream& out, const RescaledFlowTrace& trace) {
  out << std::setprecision(17);
  out << "j,F,delta,delta_clamped,A,projection_jump,displacement,measured_radius,graphical_radius,max_radius,w_l2,"
         "w_w32\n";
  for (const auto& r : trace.rows) {
    out << r.j << ',' << r.F << ',' << r.delta << ',' << (r.delta_clamped ? 1 : 0) << ',' << r.A << ','
        << r.projection_jump << ',' << r.displacement << ',' << r.measured_radius << ',' << r.graphical_radius << ','
        << r.max_radius << ',' << r.norms.l2 << ',' << r.norms.w32() << '\n';
  }
}

std::string trace_json(const RescaledFlowTrace& trace) {
  nlohmann::ordered_json j;
  j["mode"] = trace.mode;
  j["termination"] = trace.termination;
  j["n"] = trace.n;
  j["k"] = trace.k;
  j["t_final"] = trace.t_final;
  j["accepted_steps"] = trace.accepted_steps;
  j["clamp_count"] = trace.clamp_count;
  j["fit_unavailable"] = trace.fit_unavailable;
  j["max_area_increase"] = trace.max_area_increase;
  if (trace.mode == "mcf_rescaling") j["pinch"] = {{"time", trace.pinch.time}, {"x", trace.pinch.point.x()}};
  auto& rows = j["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : trace.rows) {
    rows.push_back({{"j", r.j},
                    {"F", r.F},
                    {"delta", r.delta},
                    {"A", r.A},
                    {"projection_jump", r.projection_jump},
                    {"measured_radius", r.measured_radius},
                    {"max_radius", r.max_radius}});
  }
  return j.dump(2);
}

}  // namespace mcf
