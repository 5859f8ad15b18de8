#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <numbers>

#include "mcflab/arrival.hpp"
#include "mcflab/flowline.hpp"
#include "mcflab/mcf.hpp"
#include "pipeline.hpp"

namespace mcf {

ScenarioGeometry build_geometry(const Scenario& sc) {
  ScenarioGeometry s;
  s.shape = sc.text("geometry", "shape", "");
  const auto samples = static_cast<std::size_t>(sc.integer("geometry", "samples", 1024));
  if (s.shape == "circle") {
    s.surface = make_circle(sc.number("geometry", "radius", 1.0), samples);
  } else if (s.shape == "ellipse") {
    s.surface = make_ellipse(sc.number("geometry", "a", 1.0), sc.number("geometry", "b", 0.6), samples);
  } else if (s.shape == "sphere") {
    s.n = sc.integer("geometry", "n", 2);
    s.surface = make_sphere(s.n, sc.number("geometry", "radius", 1.0), samples);
  } else if (s.shape == "dumbbell") {
    s.n = sc.integer("geometry", "n", 2);
    s.k = 1;
    s.surface = make_dumbbell(s.n, sc.number("geometry", "bulb_radius", 1.0), sc.number("geometry", "bulb_center", 3.0),
                              sc.number("geometry", "neck_radius", 0.3), sc.number("geometry", "fillet_radius", 1.5),
                              samples);
  } else if (s.shape == "neck") {
    s.n = sc.integer("geometry", "n", 2);
    s.k = 1;
    const double amp = sc.number("geometry", "amplitude", 0.1);
    const double period = sc.number("geometry", "period", 4.0);
    const double rho = std::sqrt(2.0 * (s.n - 1));
    s.surface = make_periodic_profile(
        s.n, [=](double x) { return rho * (1 - amp * std::cos(2 * std::numbers::pi * x / period)); }, -period / 2,
        period, samples);
  } else {
    throw ConfigError("unknown shape '" + s.shape + "'", "geometry.shape");
  }
  if (s.n < 1 || s.n > 3) throw ConfigError("dimension must be 1, 2 or 3", "geometry.n");
  return s;
}

ArrivalConfig arrival_config(const Scenario& sc, const ScenarioGeometry& g) {
  ArrivalConfig cfg;
  cfg.h = sc.number("arrival", "h", cfg.h);
  cfg.flow.graded = sc.flag("arrival", "graded", g.k > 0);
  cfg.allow_partial = sc.flag("arrival", "allow_partial", g.k > 0);
  cfg.extinction_radius = sc.number("arrival", "extinction_radius", cfg.extinction_radius);
  return cfg;
}

RescaledConfig rescaled_config(const Scenario& sc, int k) {
  RescaledConfig cfg;
  cfg.k = sc.integer("rescaled", "k", k);
  cfg.mode = sc.text("rescaled", "mode", k > 0 ? "mcf_rescaling" : "direct");
  cfg.flow.graded = sc.flag("rescaled", "graded", k > 0);
  cfg.flow.resample_ratio = sc.number("rescaled", "resample_ratio", cfg.flow.resample_ratio);
  return cfg;
}

}  // namespace mcf

namespace mcf::detail {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Geometric ratio q of a sequence fitted on log values; 0 when every value is zero.
double geometric_ratio(const std::vector<double>& v) {
  std::vector<std::pair<double, double>> pts;
  bool all_zero = true;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) continue;
    if (v[i] != 0) all_zero = false;
    if (v[i] > 0) pts.emplace_back(static_cast<double>(i), std::log(v[i]));
  }
  if (all_zero) return 0.0;
  if (pts.size() < 3) return kInf;
  double mx = 0, my = 0;
  for (const auto& [x, y] : pts) mx += x, my += y;
  mx /= static_cast<double>(pts.size());
  my /= static_cast<double>(pts.size());
  double sxy = 0, sxx = 0;
  for (const auto& [x, y] : pts) sxy += (x - mx) * (y - my), sxx += (x - mx) * (x - mx);
  return std::exp(sxy / sxx);
}

std::vector<double> finite_tail(const std::vector<double>& v) {
  std::vector<double> out;
  for (double x : v)
    if (std::isfinite(x)) out.push_back(x);
  return out;
}

double last_finite_radius(const RescaledFlowTrace& tr) {
  for (auto it = tr.rows.rbegin(); it != tr.rows.rend(); ++it)
    if (std::isfinite(it->measured_radius)) return it->measured_radius;
  return kNaN;
}

void fitted_radius(RunContext& ctx, const ScenarioGeometry& shape) {
  const double t_end = ctx.scenario.number("rescaled", "t_end", 8.0);
  const auto tr = run_rescaled(shape.surface, t_end, rescaled_config(ctx.scenario, shape.k));
  const double r = last_finite_radius(tr);
  ctx.measurements["fitted_cylinder_radius"] = r;
  ctx.measurements["pinch_time"] = tr.pinch.time;
  ctx.values["cylinder_radius"] = std::isfinite(r) ? std::abs(r - std::sqrt(2.0 * (tr.n - tr.k))) : kInf;
  std::ofstream out;
  if (ctx.artifact("trace.csv", out)) write_trace_csv(out, tr);
}

void flow_lines(RunContext& ctx, const ScenarioGeometry& shape, std::shared_ptr<const ArrivalField> field, const MatX& axis) {
  const Scenario& sc = ctx.scenario;
  const auto ev = interpolate(field);
  const int dim = field->dim();
  const int count = sc.integer("flowlines", "count", 4);
  TraceOptions to;
  to.stop_factor = sc.number("flowlines", "stop_factor", to.stop_factor);
  double udev = 0, gdev = 0, axis_max = 0, osc = 0, gap = 0;
  std::size_t failures = 0;
  std::ofstream limits;
  const bool write = ctx.artifact("limits.csv", limits);
  if (write) limits << "line,tail_s,secant_osc,tangent_osc\n";
  for (int i = 0; i < count; ++i) {
    const double th = 0.3 + 2 * std::numbers::pi * i / count;
    VecX x0 = VecX::Zero(dim);
    if (shape.shape == "dumbbell") {
      const double r = sc.number("flowlines", "start_radius", 0.22);
      x0[0] = sc.number("flowlines", "axis_offset", 0.0) * (i - 0.5 * (count - 1));
      x0[1] = r * std::cos(th);
      x0[2] = r * std::sin(th);
    } else if (shape.shape == "ellipse") {
      const double f = sc.number("flowlines", "start_radius", 0.7);
      x0[0] = f * sc.number("geometry", "a", 1.0) * std::cos(th);
      x0[1] = f * sc.number("geometry", "b", 0.6) * std::sin(th);
    } else {
      const double r = sc.number("flowlines", "start_radius", 0.8 * sc.number("geometry", "radius", 1.0));
      if (dim == 2) {
        x0 << r * std::cos(th), r * std::sin(th);
      } else {
        const double phi = 0.6 + 0.5 * i / count;
        x0 << r * std::cos(th) * std::sin(phi), r * std::sin(th) * std::sin(phi), r * std::cos(phi);
      }
    }
    try {
      const FlowLine line = trace(ev, x0, to);
      const auto asym = asymptotics(line, ev, shape.n, shape.k, axis);
      const auto curv = curvature_diagnostics(line, ev);
      const auto lim = limit_estimators(line, axis);
      udev = std::max(udev, asym.u_deviation);
      gdev = std::max(gdev, asym.grad_deviation);
      if (shape.k > 0) axis_max = std::max(axis_max, asym.axis_tail_max);
      osc = std::max(osc, lim.tangent_osc);
      gap = std::max(gap, (line.length - line.traced_length) / line.length);
      std::ofstream out;
      if (ctx.artifact("flowline_" + std::to_string(i) + ".csv", out)) write_flowline_csv(out, line, &curv, &asym);
      if (write)
        for (std::size_t j = 0; j < lim.tail_s.size(); ++j)
          limits << i << ',' << lim.tail_s[j] << ',' << lim.secant_osc_seq[j] << ',' << lim.tangent_osc_seq[j] << '\n';
    } catch (const Error&) {
      ++failures;
    }
  }
  ctx.measurements["flowline_failures"] = static_cast<double>(failures);
  const double bad = failures > 0 ? kInf : 0.0;
  ctx.values["flow_u"] = std::max(udev, bad);
  ctx.values["flow_grad"] = std::max(gdev, bad);
  ctx.values["flow_axis"] = shape.k > 0 ? std::max(axis_max, bad) : kNaN;
  ctx.values["flow_oscillation"] = std::max(osc, bad);
  ctx.values["flow_length"] = std::max(gap, bad);
}

void spiral_control(RunContext& ctx) {
  const double eps = 0.1;
  const auto sp = vector_field(2, [eps](const VecX& x) {
    VecX v(2);
    v << -x[1] - eps * x[0], x[0] - eps * x[1];
    return v;
  });
  const auto lim = limit_estimators(trace(sp, VecX::Unit(2, 0)));
  ctx.measurements["spiral_tangent_osc"] = lim.tangent_osc;
  ctx.values["spiral_control"] = lim.verdict == "no limit detected" ? 1.0 : 0.0;
}

}  // namespace

const std::map<std::string, CheckInfo>& check_registry() {
  static const std::map<std::string, CheckInfo> r = {
      {"sphere_error", {"arrival", Rule::le}},
      {"ratio_tail", {"arrival", Rule::le}},
      {"hessian_eigenvalues", {"arrival", Rule::le}},
      {"hessian_laplacian", {"arrival", Rule::le}},
      {"kernel_dimension", {"arrival", Rule::eq}},
      {"gradient_exponent", {"arrival", Rule::le}},
      {"pde_residual", {"arrival", Rule::le}},
      {"flow_u", {"arrival", Rule::le}},
      {"flow_grad", {"arrival", Rule::le}},
      {"flow_axis", {"arrival", Rule::le}},
      {"flow_oscillation", {"arrival", Rule::le}},
      {"flow_length", {"arrival", Rule::le}},
      {"spiral_control", {"arrival", Rule::eq}},
      {"cylinder_radius", {"arrival", Rule::le}},
      {"area_monotone", {"rescaled", Rule::le}},
      {"radius_convergence", {"rescaled", Rule::le}},
      {"delta_decay", {"rescaled", Rule::le}},
      {"delta_sum_tail", {"rescaled", Rule::le}},
      {"a_round", {"rescaled", Rule::le}},
      {"a_cauchy", {"rescaled", Rule::le}},
      {"rescaled_cylinder_radius", {"rescaled", Rule::le}},
      {"eigen_identity", {"spectral", Rule::le}},
      {"kernel_dimension_formula", {"spectral", Rule::eq}},
      {"projection_recovery", {"spectral", Rule::le}},
      {"projection_slope", {"spectral", Rule::ge}},
      {"linearization_slope", {"spectral", Rule::le}},
      {"cylinder_h", {"spectral", Rule::le}},
      {"frequency_power", {"frequency", Rule::le}},
      {"frequency_cross_form", {"frequency", Rule::le}},
      {"log_derivative", {"frequency", Rule::le}},
      {"dichotomy", {"frequency", Rule::eq}},
  };
  return r;
}

void run_arrival_pipeline(RunContext& ctx) {
  const Scenario& sc = ctx.scenario;
  const ScenarioGeometry shape = build_geometry(sc);
  const ArrivalConfig cfg = arrival_config(sc, shape);
  auto field = std::make_shared<ArrivalField>(compute_arrival(shape.surface, cfg));
  ctx.provenance["h"] = cfg.h;
  ctx.provenance["cells"] = static_cast<double>(field->size());
  ctx.provenance["surface_samples"] = static_cast<double>(shape.surface.size());
  ctx.measurements["extinction_time"] = field->stats.extinction_time;
  ctx.measurements["sweep_steps"] = static_cast<double>(field->stats.steps);
  ctx.measurements["unswept_cells"] = static_cast<double>(field->stats.unswept);
  if (!ctx.dir.empty() && field->size() <= (std::size_t{1} << 21)) write_field((ctx.dir / "field").string(), *field);

  const int m = shape.n - shape.k;
  const double target_ratio = 2.0 / m;
  const double target_eig = -1.0 / m;
  const double target_lap = -(m + 1.0) / m;

  if (ctx.wants("sphere_error")) {
    if (shape.shape != "circle" && shape.shape != "sphere")
      throw ConfigError("sphere_error needs a circle or sphere", "checks.sphere_error");
    const double radius = sc.number("geometry", "radius", 1.0);
    const double inner = sc.number("arrival", "inner_fraction", 0.8) * radius;
    double err = 0, top = 0;
    for (std::size_t i = 0; i < field->size(); ++i) {
      if (!field->in_domain(i)) continue;
      const VecX x = field->point(i);
      if (x.norm() > inner) continue;
      const double exact = -x.squaredNorm() / (2.0 * shape.n);
      err = std::max(err, std::abs(field->value(i) - exact));
      top = std::max(top, -exact);
    }
    ctx.values["sphere_error"] = err / top;
  }

  const bool need_critical = ctx.wants("hessian_eigenvalues") || ctx.wants("hessian_laplacian") ||
                             ctx.wants("kernel_dimension") || ctx.wants("ratio_tail") ||
                             ctx.wants("gradient_exponent") || ctx.wants("flow_axis") || ctx.wants("flow_u");
  CriticalReport crit;
  VecX center = field->stats.extinction_point;
  MatX axis;
  if (need_critical) {
    crit = critical_analysis(*field);
    if (crit.points.empty()) throw Error("no critical point found");
    const auto best = std::min_element(crit.points.begin(), crit.points.end(), [&](const auto& a, const auto& b) {
      return (a.x - center).norm() < (b.x - center).norm();
    });
    center = best->x;
    if (shape.k > 0) axis = best->kernel;
    double eig_dev = 0;
    // The m + 1 most negative eigenvalues are the nonzero ones.
    for (int i = 0; i <= m && i < best->eigenvalues.size(); ++i)
      eig_dev = std::max(eig_dev, std::abs(best->eigenvalues[i] / target_eig - 1));
    ctx.values["hessian_eigenvalues"] = eig_dev;
    ctx.values["hessian_laplacian"] = std::abs(best->laplacian / target_lap - 1);
    ctx.values["kernel_dimension"] = crit.k;
    ctx.measurements["critical_points"] = static_cast<double>(crit.points.size());
    ctx.measurements["critical_components"] = static_cast<double>(crit.components.size());
    ctx.measurements["laplacian"] = best->laplacian;
    for (int i = 0; i < best->eigenvalues.size(); ++i)
      ctx.measurements["eigenvalue_" + std::to_string(i)] = best->eigenvalues[i];
  }

  RatioOptions ro;
  ro.center = center;
  ro.radius = sc.number("arrival", "ratio_radius", kInf);
  if (ctx.wants("ratio_tail")) {
    const auto rc = lojasiewicz_ratio(*field, ro);
    ctx.values["ratio_tail"] = std::abs(rc.limit / target_ratio - 1);
    ctx.measurements["ratio_limit"] = rc.limit;
    ctx.measurements["ratio_implied_k"] = rc.implied_k;
    std::ofstream out;
    if (ctx.artifact("ratio.csv", out)) {
      out << "lo,hi,mean,min,max,count\n";
      for (const auto& b : rc.bins)
        out << b.lo << ',' << b.hi << ',' << b.mean << ',' << b.min << ',' << b.max << ',' << b.count << '\n';
    }
  }
  if (ctx.wants("gradient_exponent")) {
    try {
      const auto fit = exponent_fit(gradient_pairs(*field, ro));
      ctx.values["gradient_exponent"] = std::abs(fit.p - 2.0);
      ctx.measurements["gradient_exponent_p"] = fit.p;
      ctx.measurements["gradient_exponent_decades"] = fit.decades;
    } catch (const IllConditionedFit&) {
      ctx.values["gradient_exponent"] = kInf;
    }
  }
  if (ctx.wants("pde_residual")) ctx.values["pde_residual"] = pde_residual(*field).l2;
  if (ctx.wants("flow_u") || ctx.wants("flow_grad") || ctx.wants("flow_axis") || ctx.wants("flow_oscillation") ||
      ctx.wants("flow_length"))
    flow_lines(ctx, shape, field, axis);
  if (ctx.wants("spiral_control")) spiral_control(ctx);
  if (ctx.wants("cylinder_radius")) {
    if (shape.k == 0) throw ConfigError("cylinder_radius needs a neck geometry", "checks.cylinder_radius");
    fitted_radius(ctx, shape);
  }
}

void run_rescaled_pipeline(RunContext& ctx) {
  const Scenario& sc = ctx.scenario;
  const ScenarioGeometry shape = build_geometry(sc);
  const double t_end = sc.number("rescaled", "t_end", 20.0);
  const auto tr = run_rescaled(shape.surface, t_end, rescaled_config(sc, shape.k));
  ctx.provenance["surface_samples"] = static_cast<double>(shape.surface.size());
  ctx.provenance["t_end"] = t_end;
  ctx.measurements["accepted_steps"] = static_cast<double>(tr.accepted_steps);
  ctx.measurements["t_final"] = tr.t_final;
  ctx.measurements["rows"] = static_cast<double>(tr.rows.size());
  std::ofstream out;
  if (ctx.artifact("trace.csv", out)) write_trace_csv(out, tr);
  std::ofstream js;
  if (ctx.artifact("trace.json", js)) js << trace_json(tr);

  const double rho = std::sqrt(2.0 * (tr.n - tr.k));
  std::vector<double> delta, a;
  for (const auto& r : tr.rows) {
    delta.push_back(r.delta);
    a.push_back(r.A);
  }
  ctx.values["area_monotone"] = tr.max_area_increase;
  const bool reached = tr.termination == "t_end";
  const double r_last = last_finite_radius(tr);
  ctx.measurements["final_radius"] = r_last;
  ctx.values["radius_convergence"] = reached && std::isfinite(r_last) ? std::abs(r_last - rho) : kInf;
  ctx.values["rescaled_cylinder_radius"] = std::isfinite(r_last) ? std::abs(r_last - rho) : kInf;

  const auto d = finite_tail(delta);
  ctx.values["delta_decay"] = geometric_ratio(d);
  ctx.values["delta_sum_tail"] = d.empty() ? kInf : std::pow(d.back(), 0.9);
  double sum = 0;
  for (double x : d) sum += std::pow(x, 0.9);
  ctx.measurements["delta_power_sum"] = sum;

  const auto af = finite_tail(a);
  ctx.values["a_round"] = af.empty() ? kInf : *std::max_element(af.begin(), af.end());
  // Remainder of sum A_j estimated from the geometric ratio of the later half.
  const std::vector<double> late(af.begin() + static_cast<std::ptrdiff_t>(af.size() / 2), af.end());
  const double q = geometric_ratio(late);
  ctx.measurements["a_ratio"] = q;
  ctx.values["a_cauchy"] = late.empty() ? kInf : q == 0 ? 0.0 : q < 1 ? late.back() * q / (1 - q) : kInf;
}

}  // namespace mcf::detail
