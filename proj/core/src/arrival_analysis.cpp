#include <algorithm>
#include <cmath>
#include <numeric>

#include "mcflab/arrival.hpp"

namespace mcf {

namespace {

bool gradient_ok(const ArrivalField& f, std::size_t i) {
  if (!f.in_domain(i)) return false;
  for (int a = 0; a < f.dim(); ++a)
    if (!f.in_domain(f.neighbor(i, a, 1)) || !f.in_domain(f.neighbor(i, a, -1))) return false;
  return true;
}

bool in_ball(const ArrivalField& f, std::size_t i, const RatioOptions& opts) {
  if (opts.center.size() == 0 || !std::isfinite(opts.radius)) return true;
  return (f.point(i) - opts.center).norm() <= opts.radius;
}

}  // namespace

ResidualReport pde_residual(const ArrivalField& field, double gradient_floor) {
  const double floor = std::isnan(gradient_floor) ? 10 * field.h() : gradient_floor;
  ResidualReport rep;
  rep.residual.assign(field.size(), std::numeric_limits<double>::quiet_NaN());
  double sum2 = 0;
  for (std::size_t i = 0; i < field.size(); ++i) {
    if (!field.has_stencil(i)) continue;
    const VecX g = field.gradient(i);
    const double g2 = g.squaredNorm();
    if (!(std::sqrt(g2) > floor)) continue;
    const MatX hs = field.hessian(i);
    // |grad u| div(grad u / |grad u|) = (|grad u|^2 tr Hess - grad u . Hess grad u) / |grad u|^2
    const double r = 1.0 + (g2 * hs.trace() - g.dot(hs * g)) / g2;
    rep.residual[i] = r;
    rep.max_abs = std::max(rep.max_abs, std::abs(r));
    sum2 += r * r;
    ++rep.evaluated;
  }
  if (rep.evaluated > 0) rep.l2 = std::sqrt(sum2 / static_cast<double>(rep.evaluated));
  return rep;
}

std::vector<std::pair<double, double>> gradient_pairs(const ArrivalField& field, const RatioOptions& opts) {
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i < field.size(); ++i) {
    if (!gradient_ok(field, i) || !in_ball(field, i, opts)) continue;
    const double depth = opts.critical_value - field.value(i);
    if (!(depth > 0)) continue;
    out.emplace_back(depth, field.gradient(i).norm());
  }
  return out;
}

RatioCurve lojasiewicz_ratio(const ArrivalField& field, const RatioOptions& opts) {
  struct Sample {
    double depth, ratio, dist;
  };
  std::vector<Sample> samples;
  const VecX center = opts.center.size() ? opts.center : VecX(field.stats.extinction_point);
  for (std::size_t i = 0; i < field.size(); ++i) {
    if (!gradient_ok(field, i) || !in_ball(field, i, opts)) continue;
    const double depth = opts.critical_value - field.value(i);
    if (!(depth > 0)) continue;
    const double dist = center.size() == field.dim() ? (field.point(i) - center).norm() : 0.0;
    samples.push_back({depth, field.gradient(i).squaredNorm() / depth, dist});
  }
  RatioCurve curve;
  if (samples.empty()) {
    curve.warnings.push_back("no cells below the critical value");
    return curve;
  }
  double top = 0;
  for (const auto& s : samples) top = std::max(top, s.depth);
  const int nb = std::max(1, opts.bins);
  curve.bins.resize(static_cast<std::size_t>(nb));
  for (int b = 0; b < nb; ++b) {
    curve.bins[b].lo = top * b / nb;
    curve.bins[b].hi = top * (b + 1) / nb;
    curve.bins[b].min = std::numeric_limits<double>::infinity();
    curve.bins[b].max = -std::numeric_limits<double>::infinity();
  }
  double tail_sum = 0;
  curve.tail_min = std::numeric_limits<double>::infinity();
  curve.tail_max = -std::numeric_limits<double>::infinity();
  const double min_dist = opts.resolution_cells * field.h();
  for (const auto& s : samples) {
    const int b = std::min(nb - 1, static_cast<int>(s.depth / top * nb));
    auto& bin = curve.bins[b];
    bin.mean += s.ratio;
    bin.min = std::min(bin.min, s.ratio);
    bin.max = std::max(bin.max, s.ratio);
    ++bin.count;
    if (s.depth <= opts.tail_fraction * top && s.dist >= min_dist) {
      tail_sum += s.ratio;
      curve.tail_min = std::min(curve.tail_min, s.ratio);
      curve.tail_max = std::max(curve.tail_max, s.ratio);
      ++curve.tail_count;
    }
  }
  for (auto& bin : curve.bins) {
    if (bin.count > 0) {
      bin.mean /= static_cast<double>(bin.count);
    } else {
      bin.min = bin.max = std::numeric_limits<double>::quiet_NaN();
    }
  }
  if (curve.bins.front().count == 0) curve.warnings.push_back("empty bins near the critical value; refine the grid");
  if (curve.tail_count == 0) {
    curve.warnings.push_back("no resolved cells in the tail");
    return curve;
  }
  curve.limit = tail_sum / static_cast<double>(curve.tail_count);
  const int n = field.dim() - 1;
  curve.implied_k = n - 2.0 / curve.limit;
  return curve;
}

CriticalReport critical_analysis(const ArrivalField& field, const CriticalOptions& opts) {
  const double tol = std::isnan(opts.gradient_tol) ? 0.5 * field.h() : opts.gradient_tol;
  CriticalReport rep;
  std::vector<std::size_t> critical;
  double min_ratio = std::numeric_limits<double>::infinity(), max_ratio = 0;
  for (std::size_t i = 0; i < field.size(); ++i) {
    if (!gradient_ok(field, i)) continue;
    const double g = field.gradient(i).norm();
    rep.max_grad = std::max(rep.max_grad, g);
    if (g < tol) critical.push_back(i);
    if (g > 0 && field.value(i) < 0) {
      const double q = -field.value(i) / (g * g);
      min_ratio = std::min(min_ratio, q);
      max_ratio = std::max(max_ratio, q);
    }
  }
  if (max_ratio > 0) rep.two_sided_C = std::max(max_ratio, 1.0 / min_ratio);
  if (critical.empty()) throw DomainError("no critical cells at the grid tolerance");

  const int d = field.dim();
  for (std::size_t i : critical) {
    if (!field.has_stencil(i)) throw BoundaryError("Hessian stencil at a critical cell leaves the domain");
    CriticalPoint cp;
    cp.index = i;
    cp.x = field.point(i);
    cp.u = field.value(i);
    cp.grad_norm = field.gradient(i).norm();
    const MatX hs = field.hessian(i);
    Eigen::SelfAdjointEigenSolver<MatX> es(hs);
    cp.eigenvalues = es.eigenvalues();
    cp.eigenvectors = es.eigenvectors();
    cp.laplacian = hs.trace();
    // Kernel threshold relative to the median of the eigenvalues that are at least half the largest.
    std::vector<double> mags;
    double big = cp.eigenvalues.cwiseAbs().maxCoeff();
    for (int a = 0; a < d; ++a)
      if (std::abs(cp.eigenvalues[a]) >= 0.5 * big) mags.push_back(std::abs(cp.eigenvalues[a]));
    std::sort(mags.begin(), mags.end());
    const double ref = mags.empty() ? 0.0 : mags[mags.size() / 2];
    std::vector<int> kernel_cols;
    double lo = std::numeric_limits<double>::infinity(), hi = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < d; ++a) {
      if (std::abs(cp.eigenvalues[a]) < opts.kernel_ratio * ref) {
        kernel_cols.push_back(a);
      } else {
        lo = std::min(lo, cp.eigenvalues[a]);
        hi = std::max(hi, cp.eigenvalues[a]);
      }
    }
    cp.k = static_cast<int>(kernel_cols.size());
    cp.kernel = MatX(d, cp.k);
    for (int c = 0; c < cp.k; ++c) cp.kernel.col(c) = cp.eigenvectors.col(kernel_cols[c]);
    cp.eigen_spread = (hi >= lo) ? hi - lo : 0.0;
    cp.value_clusters = std::abs(cp.u) <= 3 * field.h() * rep.max_grad;
    rep.points.push_back(std::move(cp));
  }

  // Connected components under face adjacency.
  std::vector<std::size_t> parent(rep.points.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (std::size_t a = 0; a < critical.size(); ++a) {
    for (int ax = 0; ax < d; ++ax) {
      const std::size_t nb = field.neighbor(critical[a], ax, 1);
      const auto it = std::lower_bound(critical.begin(), critical.end(), nb);
      if (nb != ArrivalField::npos && it != critical.end() && *it == nb)
        parent[find(a)] = find(static_cast<std::size_t>(it - critical.begin()));
    }
  }
  std::vector<std::size_t> root_slot(rep.points.size(), static_cast<std::size_t>(-1));
  for (std::size_t a = 0; a < rep.points.size(); ++a) {
    const std::size_t r = find(a);
    if (root_slot[r] == static_cast<std::size_t>(-1)) {
      root_slot[r] = rep.components.size();
      rep.components.emplace_back();
    }
    rep.components[root_slot[r]].push_back(a);
  }

  rep.k = rep.points.front().k;
  for (const auto& cp : rep.points)
    if (cp.k != rep.k) rep.mixed_type = true;
  const int n = d - 1;
  if (rep.k < n) {
    rep.target_eigenvalue = -1.0 / (n - rep.k);
    rep.target_laplacian = -static_cast<double>(n + 1 - rep.k) / (n - rep.k);
  }
  return rep;
}

ExponentFit exponent_fit(const std::vector<std::pair<double, double>>& pairs) {
  std::vector<std::pair<double, double>> logs;
  for (const auto& [a, b] : pairs)
    if (a > 0 && b > 0 && std::isfinite(a) && std::isfinite(b)) logs.emplace_back(std::log(b), std::log(a));
  if (logs.size() < 20) throw IllConditionedFit("exponent fit needs at least 20 positive pairs");
  double lo = logs.front().first, hi = lo;
  for (const auto& [x, y] : logs) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  ExponentFit fit;
  fit.count = logs.size();
  fit.decades = (hi - lo) / std::log(10.0);
  if (fit.decades < 2.0) throw IllConditionedFit("exponent fit needs two decades of dynamic range");
  const double m = static_cast<double>(logs.size());
  double sx = 0, sy = 0;
  for (const auto& [x, y] : logs) {
    sx += x;
    sy += y;
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0;
  for (const auto& [x, y] : logs) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  fit.p = sxy / sxx;
  const double icpt = my - fit.p * mx;
  fit.constant = std::exp(icpt);
  double sse = 0;
  for (const auto& [x, y] : logs) sse += std::pow(y - icpt - fit.p * x, 2);
  fit.stderr_p = std::sqrt(sse / std::max(1.0, m - 2) / sxx);
  fit.ci_low = fit.p - 1.96 * fit.stderr_p;
  fit.ci_high = fit.p + 1.96 * fit.stderr_p;
  return fit;
}

}  // namespace mcf
