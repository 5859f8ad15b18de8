#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "mcflab/frequency.hpp"
#include "mcflab/spectral.hpp"
#include "pipeline.hpp"

namespace mcf::detail {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// "2x1 3x1" -> {(2,1), (3,1)}.
std::vector<std::pair<int, int>> parse_cases(const Scenario& sc, const std::string& key, const std::string& fallback) {
  std::istringstream in(sc.text("spectral", key, fallback));
  std::vector<std::pair<int, int>> out;
  std::string item;
  while (in >> item) {
    const auto x = item.find('x');
    try {
      if (x == std::string::npos) throw std::invalid_argument(item);
      const int n = std::stoi(item.substr(0, x)), k = std::stoi(item.substr(x + 1));
      if (n < 1 || k < 0 || k >= n) throw std::invalid_argument(item);
      out.emplace_back(n, k);
    } catch (const std::logic_error&) {
      throw ConfigError("expected cases like 2x1, got '" + item + "'", "spectral." + key);
    }
  }
  return out;
}

std::vector<double> parse_list(const Scenario& sc, const std::string& section, const std::string& key,
                               const std::string& fallback) {
  std::istringstream in(sc.text(section, key, fallback));
  std::vector<double> out;
  std::string item;
  while (in >> item) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::logic_error&) {
      throw ConfigError("expected a list of numbers", section + "." + key);
    }
  }
  if (out.empty()) throw ConfigError("empty list", section + "." + key);
  return out;
}

/// Random point of the standard cylinder S^{n-k}_rho x R^k.
VecX cylinder_point(int n, int k, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.5);
  VecX x(n + 1);
  for (int i = 0; i <= n; ++i) x[i] = g(rng);
  VecX z = x.tail(n - k + 1);
  x.tail(n - k + 1) = std::sqrt(2.0 * (n - k)) * z / z.norm();
  return x;
}

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += std::log(x[i]), my += std::log(y[i]);
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

/// h_4 in the first of `vars` variables.
Polynomial axis_hermite4(int vars) {
  Polynomial p(vars);
  const Polynomial h = hermite_1d(4);
  for (const auto& [e, c] : h.terms()) {
    Polynomial::Exponent le(static_cast<std::size_t>(vars), 0);
    le[0] = e[0];
    p.add_term(le, c);
  }
  return p;
}

Polynomial random_kernel_element(int n, int k, std::mt19937_64& rng, std::vector<double>& coeffs) {
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  Polynomial p(n + 1);
  coeffs.clear();
  for (const auto& e : kernel_basis(n, k)) {
    coeffs.push_back(u(rng));
    p = p + e.polynomial() * coeffs.back();
  }
  return p;
}

}  // namespace

void run_spectral_pipeline(RunContext& ctx) {
  const Scenario& sc = ctx.scenario;
  const auto cases = parse_cases(sc, "cases", "2x1 3x1 3x2");
  const int points = sc.integer("spectral", "points", 100);
  ctx.provenance["random_points"] = points;

  if (ctx.wants("eigen_identity")) {
    double worst = 0;
    std::normal_distribution<double> g(0.0, 1.5);
    for (int n = 1; n <= 3; ++n)
      for (int tl = 0; tl <= 4; ++tl)
        for (const auto& p : hermite_eigen(n, tl)) {
          const auto f = DriftFunction::flat(p);
          for (int t = 0; t < points; ++t) {
            VecX x(n);
            for (int i = 0; i < n; ++i) x[i] = g(ctx.rng);
            worst = std::max(worst, std::abs(drift_apply(f, x) + 0.5 * tl * p(x)));
          }
        }
    for (const auto& [n, k] : cases)
      for (const auto& e : kernel_basis(n, k)) {
        const auto f = DriftFunction::cylinder(n, k, e.polynomial());
        for (int t = 0; t < points; ++t) {
          const VecX x = cylinder_point(n, k, ctx.rng);
          worst = std::max(worst, std::abs(drift_apply(f, x) + f.value(x)));
        }
      }
    ctx.values["eigen_identity"] = worst;
  }

  if (ctx.wants("kernel_dimension_formula")) {
    int mismatches = 0;
    std::ofstream out;
    const bool write = ctx.artifact("kernel.json", out);
    if (write) out << "[\n";
    bool first = true;
    for (const auto& [n, k] : cases) {
      const auto basis = kernel_basis(n, k);
      const int formula = k + k * (k - 1) / 2 + k * (n - k + 1);
      // Rank of the basis evaluated at random cylinder points.
      const int rows = 4 * formula + 8;
      MatX m(rows, static_cast<Eigen::Index>(basis.size()));
      for (int r = 0; r < rows; ++r) {
        const VecX x = cylinder_point(n, k, ctx.rng);
        for (std::size_t c = 0; c < basis.size(); ++c) m(r, static_cast<Eigen::Index>(c)) = basis[c].polynomial()(x);
      }
      Eigen::JacobiSVD<MatX> svd(m);
      const auto sv = svd.singularValues();
      int rank = 0;
      for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv[i] > 1e-9 * sv[0]) ++rank;
      if (rank != formula || static_cast<int>(basis.size()) != formula || kernel_dimension(n, k) != formula)
        ++mismatches;
      ctx.measurements["kernel_rank_" + std::to_string(n) + "x" + std::to_string(k)] = rank;
      if (write)
        for (const auto& e : basis) {
          out << (first ? "  " : ",\n  ") << e.to_json();
          first = false;
        }
    }
    if (write) out << "\n]\n";
    ctx.values["kernel_dimension_formula"] = mismatches;
  }

  ProjectionOptions popt;
  if (ctx.wants("projection_recovery")) {
    double worst = 0;
    for (const auto& [n, k] : cases) {
      const auto cyl = ShrinkerCylinder::standard(n, k);
      std::vector<double> coeffs;
      const Polynomial kpart = random_kernel_element(n, k, ctx.rng, coeffs);
      const auto pr = kernel_project(DriftFunction::cylinder(n, k, kpart + axis_hermite4(n + 1) * 1e-3), cyl, popt);
      for (std::size_t i = 0; i < coeffs.size(); ++i)
        worst = std::max(worst, std::abs(pr.coefficients[static_cast<Eigen::Index>(i)] - coeffs[i]));
    }
    ctx.values["projection_recovery"] = worst;
  }

  if (ctx.wants("projection_slope")) {
    const auto sweep = parse_list(sc, "spectral", "sweep", "0.1 0.03 0.01 0.003 0.001");
    double nu = kInf;
    std::ofstream out;
    const bool write = ctx.artifact("projection_sweep.csv", out);
    if (write) out << "case,delta,remainder_sup\n";
    for (const auto& [n, k] : cases) {
      const auto cyl = ShrinkerCylinder::standard(n, k);
      std::vector<double> coeffs;
      const Polynomial kpart = random_kernel_element(n, k, ctx.rng, coeffs);
      // (L + 1) of h4(y_1) / 24 is -h4 / 24 and of z_1 is z_1 / 2, so |phi| is of order delta.
      const Polynomial z1 = Polynomial::coordinate(n + 1, k);
      std::vector<double> rem;
      for (double d : sweep) {
        const Polynomial w = kpart + axis_hermite4(n + 1) * (d / 24) + z1 * std::pow(d, 1.5);
        rem.push_back(kernel_project(DriftFunction::cylinder(n, k, w), cyl, popt).remainder_sup);
        if (write) out << n << 'x' << k << ',' << d << ',' << rem.back() << '\n';
      }
      const double slope = loglog_slope(sweep, rem);
      ctx.measurements["projection_nu_" + std::to_string(n) + "x" + std::to_string(k)] = slope;
      nu = std::min(nu, slope);
    }
    ctx.values["projection_slope"] = nu;
  }

  const auto lin_cases = parse_cases(sc, "linearization_cases", "1x0 2x1 3x1");
  if (ctx.wants("linearization_slope")) {
    const auto eps = parse_list(sc, "spectral", "linearization_eps", "0.005 0.0025 0.00125 0.000625");
    double worst = 0;
    std::ofstream out;
    const bool write = ctx.artifact("linearization_sweep.csv", out);
    if (write) out << "case,eps,remainder_sup,phi_remainder_sup\n";
    for (const auto& [n, k] : lin_cases) {
      const auto cyl = ShrinkerCylinder::standard(n, k);
      const Polynomial y1 = Polynomial::coordinate(n + 1, 0);
      // x_1^2 - 2 is a kernel element on k = 1 cylinders; on the circle it is a plain smooth bump.
      const Polynomial base = y1 * y1 - (k == 1 ? Polynomial::constant(n + 1, 2.0) : Polynomial(n + 1));
      std::vector<double> rem;
      for (double e : eps) {
        const auto g = graph_H_linearize(DriftFunction::cylinder(n, k, base * e), cyl);
        rem.push_back(g.remainder_sup);
        if (write) out << n << 'x' << k << ',' << e << ',' << g.remainder_sup << ',' << g.phi_remainder_sup << '\n';
      }
      const double slope = loglog_slope(eps, rem);
      ctx.measurements["linearization_slope_" + std::to_string(n) + "x" + std::to_string(k)] = slope;
      worst = std::max(worst, std::abs(slope - 2.0));
    }
    ctx.values["linearization_slope"] = worst;
  }

  if (ctx.wants("cylinder_h")) {
    double worst = 0;
    LinearizationOptions lo;
    lo.samples = static_cast<std::size_t>(sc.integer("spectral", "h_c_samples", 512));
    for (const auto& [n, k] : cases)
      worst = std::max(worst, std::abs(cylinder_mean_curvature(n, k) - std::sqrt((n - k) / 2.0)));
    for (const auto& [n, k] : lin_cases) {
      const auto g = graph_H_linearize(DriftFunction::cylinder(n, k, Polynomial(n + 1)), ShrinkerCylinder::standard(n, k), lo);
      const double exact = std::sqrt((n - k) / 2.0);
      for (double h : g.H) worst = std::max(worst, std::abs(h - exact));
    }
    ctx.values["cylinder_h"] = worst;
  }
}

void run_frequency_pipeline(RunContext& ctx) {
  const Scenario& sc = ctx.scenario;
  std::vector<int> dims;
  for (double d : parse_list(sc, "frequency", "dims", "1 2 3")) dims.push_back(static_cast<int>(d));
  const double r_min = sc.number("frequency", "r_min", 0.5);
  const double r_max = sc.number("frequency", "r_max", 10.0);
  const auto radii = static_cast<std::size_t>(sc.integer("frequency", "radii", 12));
  const double cross_r_max = sc.number("frequency", "cross_r_max", 6.0);
  ctx.provenance["radii"] = static_cast<double>(radii);

  std::ofstream freq;
  const bool write = ctx.artifact("frequency.csv", freq);
  if (write) freq << "series,r,I,D_surface,D_bulk,U\n";
  const auto dump = [&](const std::string& series, const std::vector<FrequencySample>& curve) {
    if (!write) return;
    for (const auto& s : curve)
      freq << series << ',' << s.r << ',' << s.I << ',' << s.D_surface << ',' << s.D_bulk << ',' << s.U << '\n';
  };

  if (ctx.wants("frequency_power")) {
    double worst = 0;
    for (int n : dims)
      for (int d = 1; d <= 3; ++d) {
        FrequencyProblem p;
        p.n = n;
        p.r_min = r_min;
        p.r_max = r_max;
        p.u.n = n;
        p.u.value = [d](const VecX& x) { return std::pow(x.norm(), d); };
        p.u.gradient = [d](const VecX& x) { return VecX(d * std::pow(x.norm(), d - 2) * x); };
        const auto curve = frequency_curve(p, radii, false);
        for (const auto& s : curve) worst = std::max(worst, std::abs(s.U - d));
        dump("power_n" + std::to_string(n) + "_d" + std::to_string(d), curve);
      }
    ctx.values["frequency_power"] = worst;
  }

  if (ctx.wants("frequency_cross_form") || ctx.wants("log_derivative")) {
    double cross = 0, gap = 0;
    for (int n : dims)
      for (int tl = 1; tl <= 4; ++tl) {
        const auto basis = hermite_eigen(n, tl);
        for (std::size_t b = 0; b < basis.size(); ++b) {
          FrequencyProblem p;
          p.n = n;
          p.u = DriftFunction::flat(basis[b]);
          p.lambda = 0.5 * tl;
          p.r_min = r_min;
          p.r_max = cross_r_max;
          const auto curve = frequency_curve(p, radii);
          for (const auto& s : curve) cross = std::max(cross, s.discrepancy);
          for (double r : {0.5 * (r_min + cross_r_max), 0.9 * cross_r_max})
            gap = std::max(gap, log_derivative_check(p, r).gap);
          dump("eigen_n" + std::to_string(n) + "_2l" + std::to_string(tl) + "_" + std::to_string(b), curve);
        }
      }
    ctx.values["frequency_cross_form"] = cross;
    ctx.values["log_derivative"] = gap;
  }

  if (ctx.wants("dichotomy")) {
    struct Run {
      std::string label, expected;
      int n;
      double lambda, r0, u0, u0p, r_max;
    };
    std::vector<Run> runs;
    const double poly_r_max = sc.number("frequency", "polynomial_r_max", 8.0);
    const double exp_r_max = sc.number("frequency", "dichotomy_r_max", 20.0);
    for (int n : dims) {
      const std::string ns = std::to_string(n);
      runs.push_back({"polynomial_n" + ns, "polynomial", n, 1.0, 4.0, 16.0 - 2 * n, 8.0, poly_r_max});
      runs.push_back({"growth_l0_n" + ns, "exponential", n, 0.0, 1.0, 1.0, 5.0, exp_r_max});
      runs.push_back({"mixture_l1_n" + ns, "exponential", n, 1.0, 1.0, 1.0, 1.0, exp_r_max});
    }
    int wrong = 0;
    std::ofstream out;
    const bool w = ctx.artifact("dichotomy.csv", out);
    if (w) out << "series,r,U,bound\n";
    for (const auto& run : runs) {
      DichotomyOptions o;
      o.r_max = run.r_max;
      const auto res = dichotomy_probe(run.n, run.lambda, run.r0, run.u0, run.u0p, o);
      if (res.verdict != run.expected) ++wrong;
      ctx.measurements["dichotomy_R1_" + run.label] = res.R1;
      if (w)
        for (std::size_t i = 0; i < res.r.size(); i += 10)
          out << run.label << ',' << res.r[i] << ',' << res.U[i] << ',' << res.bound[i] << '\n';
    }
    ctx.values["dichotomy"] = wrong;
  }
}

}  // namespace mcf::detail
