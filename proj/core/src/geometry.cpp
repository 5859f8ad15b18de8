#include "mcflab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "mcflab/quadrature.hpp"

namespace mcf {

namespace {

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

double signed_area(const std::vector<Vec2>& pts) {
  double area = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) area += cross2(pts[i], pts[(i + 1) % pts.size()]);
  return 0.5 * area;
}

bool segments_cross(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const double d1 = cross2(b - a, c - a);
  const double d2 = cross2(b - a, d - a);
  const double d3 = cross2(d - c, a - c);
  const double d4 = cross2(d - c, b - c);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0;
}

void check_simple(const std::vector<Vec2>& pts) {
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = pts[i];
    const Vec2& b = pts[(i + 1) % n];
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      if (segments_cross(a, b, pts[j], pts[(j + 1) % n]))
        throw DomainError("plane curve self-intersects near sample " + std::to_string(i));
    }
  }
}

// Outward normal of a chord direction for the surface's orientation convention.
Vec2 outward_of(const Surface& s, const Vec2& unit_tangent) {
  if (s.kind() == SurfaceKind::plane_curve) return {unit_tangent.y(), -unit_tangent.x()};
  return {-unit_tangent.y(), unit_tangent.x()};
}

// Index of the stored sample whose curvature applies at extended index i.
std::size_t mirror_index(const Surface& s, std::ptrdiff_t i) {
  const auto n = static_cast<std::ptrdiff_t>(s.size());
  if (s.kind() == SurfaceKind::profile_of_revolution && s.ends() == ProfileEnds::capped) {
    if (i < 0) return static_cast<std::size_t>(-i - 1);
    if (i >= n) return static_cast<std::size_t>(2 * n - 1 - i);
    return static_cast<std::size_t>(i);
  }
  return static_cast<std::size_t>(((i % n) + n) % n);
}

struct ArcNode {
  Vec2 p;
  Vec2 normal;
  double ds;
};

// Gauss-Legendre nodes on the circular arc of curvature kappa joining a and b.
// [lo, hi] selects a sub-range of the arc parameter in [-1, 1].
void arc_nodes(const Surface& s, const Vec2& a, const Vec2& b, double kappa, const quad::Rule1D& rule,
               std::vector<ArcNode>& out, double lo = -1.0, double hi = 1.0) {
  const double tmid = 0.5 * (lo + hi), tscale = 0.5 * (hi - lo);
  const Vec2 d = b - a;
  const double len = d.norm();
  if (len == 0) return;
  const Vec2 e = d / len;
  const Vec2 nc = outward_of(s, e);
  const Vec2 mid = 0.5 * (a + b);
  const double sine = std::clamp(0.5 * kappa * len, -1.0, 1.0);
  const double theta = 2.0 * std::asin(sine);
  if (std::abs(theta) < 1e-12) {
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double t = tmid + tscale * rule.nodes[q];
      out.push_back({mid + 0.5 * t * d, nc, 0.5 * len * tscale * rule.weights[q]});
    }
    return;
  }
  const double radius = 1.0 / kappa;
  const double half = 0.5 * theta;
  const double c_half = std::cos(half);
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    const double psi = half * (tmid + tscale * rule.nodes[q]);
    const double xi = radius * std::sin(psi);
    const double y = radius * (std::cos(psi) - c_half);
    const Vec2 p = mid + xi * e + y * nc;
    const Vec2 normal = std::sin(psi) * e + std::cos(psi) * nc;
    out.push_back({p, normal, radius * half * tscale * rule.weights[q]});
  }
}

// Quadrature nodes covering one copy of the curve (one period for periodic profiles).
std::vector<ArcNode> curve_nodes(const Surface& s, int per_segment) {
  const auto frames = curve_frames(s);
  const auto rule = quad::gauss_legendre(per_segment);
  const auto n = static_cast<std::ptrdiff_t>(s.size());
  std::vector<ArcNode> nodes;
  nodes.reserve(static_cast<std::size_t>(n + 2) * per_segment);
  auto kappa_at = [&](std::ptrdiff_t i) { return frames[mirror_index(s, i)].kappa; };
  const bool capped = s.kind() == SurfaceKind::profile_of_revolution && s.ends() == ProfileEnds::capped;
  if (capped) {
    // Each end arc is symmetric about the axis; integrate from the crossing outward.
    arc_nodes(s, s.extended(-1), s.extended(0), kappa_at(0), rule, nodes, 0.0, 1.0);
    arc_nodes(s, s.extended(n - 1), s.extended(n), kappa_at(n - 1), rule, nodes, -1.0, 0.0);
    for (std::ptrdiff_t i = 0; i + 1 < n; ++i)
      arc_nodes(s, s.extended(i), s.extended(i + 1), 0.5 * (kappa_at(i) + kappa_at(i + 1)), rule, nodes);
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i)
      arc_nodes(s, s.extended(i), s.extended(i + 1), 0.5 * (kappa_at(i) + kappa_at(i + 1)), rule, nodes);
  }
  return nodes;
}


}  // namespace

// ---------------------------------------------------------------------------
// Surface

Surface Surface::plane_curve(std::vector<Vec2> points) {
  if (points.size() < 16) throw DomainError("plane curve needs at least 16 samples");
  if (signed_area(points) < 0) std::reverse(points.begin(), points.end());
  check_simple(points);
  Surface s;
  s.kind_ = SurfaceKind::plane_curve;
  s.n_ = 1;
  s.samples_ = std::move(points);
  return s;
}

Surface Surface::profile(int n, std::vector<Vec2> meridian, ProfileEnds ends, double period) {
  if (n < 2) throw DomainError("profile of revolution needs n >= 2");
  if (meridian.size() < 8) throw DomainError("profile needs at least 8 samples");
  for (std::size_t i = 0; i < meridian.size(); ++i)
    if (!(meridian[i].y() > 0)) throw DomainError("profile radius must be positive at sample " + std::to_string(i));
  if (ends == ProfileEnds::periodic) {
    if (!(period > 0)) throw DomainError("periodic profile needs a positive period");
    if (meridian.back().x() < meridian.front().x()) throw DomainError("periodic profile must run left to right");
  } else if (meridian.back().x() < meridian.front().x()) {
    std::reverse(meridian.begin(), meridian.end());
  }
  Surface s;
  s.kind_ = SurfaceKind::profile_of_revolution;
  s.n_ = n;
  s.samples_ = std::move(meridian);
  s.ends_ = ends;
  s.period_ = ends == ProfileEnds::periodic ? period : 0.0;
  return s;
}

Surface Surface::levelset(int ambient_dim, std::vector<VecX> points, std::vector<VecX> normals,
                          std::vector<double> mean_curvature, std::vector<double> area_weights) {
  const std::size_t count = points.size();
  if (normals.size() != count || mean_curvature.size() != count || area_weights.size() != count)
    throw DomainError("level-set payload sizes differ");
  Surface s;
  s.kind_ = SurfaceKind::levelset_isosurface;
  s.n_ = ambient_dim - 1;
  s.points_ = std::move(points);
  s.normals_ = std::move(normals);
  s.stored_h_ = std::move(mean_curvature);
  s.weights_ = std::move(area_weights);
  return s;
}

std::size_t Surface::size() const {
  return kind_ == SurfaceKind::levelset_isosurface ? points_.size() : samples_.size();
}

Vec2 Surface::extended(std::ptrdiff_t i) const {
  const auto n = static_cast<std::ptrdiff_t>(samples_.size());
  if (kind_ == SurfaceKind::plane_curve) return samples_[static_cast<std::size_t>(((i % n) + n) % n)];
  if (ends_ == ProfileEnds::periodic) {
    const std::ptrdiff_t q = (i >= 0) ? i / n : -((-i + n - 1) / n);
    const Vec2& p = samples_[static_cast<std::size_t>(i - q * n)];
    return {p.x() + static_cast<double>(q) * period_, p.y()};
  }
  if (i < 0) {
    const Vec2& p = samples_[static_cast<std::size_t>(-i - 1)];
    return {p.x(), -p.y()};
  }
  if (i >= n) {
    const Vec2& p = samples_[static_cast<std::size_t>(2 * n - 1 - i)];
    return {p.x(), -p.y()};
  }
  return samples_[static_cast<std::size_t>(i)];
}

Surface& Surface::require_mean_convex() {
  for (std::size_t i = 0; i < size(); ++i)
    if (!(mean_curvature(*this, i) > 0))
      throw DomainError("surface is not mean convex at sample " + std::to_string(i));
  mean_convex_ = true;
  return *this;
}

Surface Surface::with_samples(std::vector<Vec2> samples) const {
  Surface s = *this;
  s.samples_ = std::move(samples);
  return s;
}

// ---------------------------------------------------------------------------
// Differential quantities

CurveFrame curve_frame(const Surface& s, std::size_t index) {
  if (s.kind() == SurfaceKind::levelset_isosurface) throw DomainError("curve_frame on a level-set surface");
  const auto i = static_cast<std::ptrdiff_t>(index);
  const Vec2 pm = s.extended(i - 1);
  const Vec2 p = s.extended(i);
  const Vec2 pp = s.extended(i + 1);
  const Vec2 a = p - pm;
  const Vec2 b = pp - p;
  const Vec2 c = pp - pm;
  const double la = a.norm();
  const double lb = b.norm();
  const double lc = c.norm();
  const double scale = std::max({la, lb, 1e-300});
  if (la <= 1e-14 * scale || lb <= 1e-14 * scale || lc <= 1e-14 * scale)
    throw StencilError("degenerate stencil (coincident samples)", index);
  CurveFrame f;
  f.spacing_minus = la;
  f.spacing_plus = lb;
  f.tangent = c / lc;
  f.normal = outward_of(s, f.tangent);
  const double menger = 2.0 * cross2(a, b) / (la * lb * lc);
  f.kappa = s.kind() == SurfaceKind::plane_curve ? menger : -menger;
  f.H = f.kappa;
  if (s.kind() == SurfaceKind::profile_of_revolution) f.H += (s.n() - 1) * f.normal.y() / p.y();
  return f;
}

std::vector<CurveFrame> curve_frames(const Surface& s) {
  std::vector<CurveFrame> frames(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) frames[i] = curve_frame(s, i);
  return frames;
}

double mean_curvature(const Surface& s, std::size_t index) {
  if (index >= s.size()) throw DomainError("sample index out of range");
  if (s.kind() == SurfaceKind::levelset_isosurface) return s.stored_curvature()[index];
  return curve_frame(s, index).H;
}

ShrinkerResidual shrinker_residual(const Surface& s) {
  ShrinkerResidual res;
  res.phi.resize(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    double phi;
    if (s.kind() == SurfaceKind::levelset_isosurface) {
      phi = s.stored_curvature()[i] - 0.5 * s.points()[i].dot(s.normals()[i]);
    } else {
      const CurveFrame f = curve_frame(s, i);
      phi = shrinker_speed(s.samples()[i], f);
    }
    res.phi[i] = phi;
    res.max_abs = std::max(res.max_abs, std::abs(phi));
  }
  return res;
}

// ---------------------------------------------------------------------------
// Gaussian integrals

namespace {

template <class Fn>
GaussianArea integrate_gaussian(const Surface& s, const GaussianQuadrature& quad, Fn&& g) {
  GaussianArea out;
  const double big_r = quad.truncation_radius;
  const double big_r2 = big_r * big_r;
  if (s.kind() == SurfaceKind::levelset_isosurface) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      const VecX& x = s.points()[i];
      const double r2 = x.squaredNorm();
      if (r2 > big_r2) {
        out.discarded_area += s.area_weights()[i];
        continue;
      }
      const Vec2 p(x(0), x.size() > 1 ? x.tail(x.size() - 1).norm() : 0.0);
      out.value += g(p, Vec2(0, 0)) * std::exp(-0.25 * r2) * s.area_weights()[i];
    }
  } else {
    const auto nodes = curve_nodes(s, quad.nodes_per_segment);
    const bool profile = s.kind() == SurfaceKind::profile_of_revolution;
    const double sphere = profile ? quad::unit_sphere_area(s.n()) : 1.0;
    auto accumulate_copy = [&](double shift) {
      double copy_area = 0;
      for (const auto& node : nodes) {
        const Vec2 p(node.p.x() + shift, node.p.y());
        const double area = node.ds * (profile ? sphere * std::pow(std::abs(p.y()), s.n() - 1) : 1.0);
        copy_area += area;
        const double r2 = p.squaredNorm();
        if (r2 > big_r2) {
          out.discarded_area += area;
          continue;
        }
        out.value += g(p, node.normal) * std::exp(-0.25 * r2) * area;
      }
      return copy_area;
    };
    if (s.kind() == SurfaceKind::profile_of_revolution && s.ends() == ProfileEnds::periodic) {
      const double period = s.period();
      double min_x = s.samples().front().x();
      for (const auto& p : s.samples()) min_x = std::min(min_x, p.x());
      const double max_x = min_x + period;
      const auto m_lo = static_cast<long>(std::floor((-big_r - max_x) / period)) - 1;
      const auto m_hi = static_cast<long>(std::ceil((big_r - min_x) / period)) + 1;
      double copy_area = 0;
      for (long m = m_lo; m <= m_hi; ++m) copy_area = accumulate_copy(static_cast<double>(m) * period);
      // Copies beyond the scanned range: area per copy times the Gaussian factor at their distance.
      for (long m = 1; m < 10000; ++m) {
        const double dist = big_r + static_cast<double>(m) * period;
        const double term = 2.0 * copy_area * std::exp(-0.25 * dist * dist);
        out.tail_bound += term;
        if (term < 1e-300) break;
      }
    } else {
      accumulate_copy(0.0);
    }
  }
  out.tail_bound += std::exp(-0.25 * big_r2) * out.discarded_area;
  out.tail_warning = out.tail_bound > 1e-10 * std::max(out.value, 1e-300);
  return out;
}

}  // namespace

GaussianArea gaussian_area(const Surface& s, const GaussianQuadrature& quad) {
  return integrate_gaussian(s, quad, [](const Vec2&, const Vec2&) { return 1.0; });
}

double gaussian_integral(const Surface& s, const std::function<double(const Vec2&, const Vec2&)>& g,
                         const GaussianQuadrature& quad) {
  return integrate_gaussian(s, quad, g).value;
}

std::vector<AmbientSample> ambient_samples(const Surface& s, int angular_resolution, double tile_radius) {
  std::vector<AmbientSample> out;
  if (s.kind() == SurfaceKind::levelset_isosurface) {
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i)
      out.push_back({s.points()[i], s.normals()[i], s.stored_curvature()[i], s.area_weights()[i], i});
    return out;
  }
  const auto frames = curve_frames(s);
  if (s.kind() == SurfaceKind::plane_curve) {
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      const auto& f = frames[i];
      out.push_back({VecX(s.samples()[i]), VecX(f.normal), f.H, 0.5 * (f.spacing_minus + f.spacing_plus), i});
    }
    return out;
  }
  const quad::SphereRule rule = quad::unit_sphere(s.n(), angular_resolution);
  out.reserve(s.size() * rule.nodes.size());
  const int dim = s.ambient_dim();
  long m_lo = 0, m_hi = 0;
  const bool tiled = tile_radius > 0 && s.ends() == ProfileEnds::periodic;
  if (tiled) {
    double min_x = s.samples().front().x(), max_x = min_x;
    for (const auto& p : s.samples()) {
      min_x = std::min(min_x, p.x());
      max_x = std::max(max_x, p.x());
    }
    m_lo = static_cast<long>(std::floor((-tile_radius - max_x) / s.period()));
    m_hi = static_cast<long>(std::ceil((tile_radius - min_x) / s.period()));
  }
  for (long m = m_lo; m <= m_hi; ++m)
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto& f = frames[i];
    const Vec2 p = s.samples()[i] + Vec2(static_cast<double>(m) * s.period(), 0.0);
    if (tile_radius > 0 && p.norm() > tile_radius) continue;
    const double ds = 0.5 * (f.spacing_minus + f.spacing_plus);
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      VecX x(dim), nrm(dim);
      x(0) = p.x();
      x.tail(dim - 1) = p.y() * rule.nodes[q];
      nrm(0) = f.normal.x();
      nrm.tail(dim - 1) = f.normal.y() * rule.nodes[q];
      out.push_back({std::move(x), std::move(nrm), f.H, ds * std::pow(p.y(), s.n() - 1) * rule.weights[q], i});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Resampling

namespace {

struct Polyline {
  std::vector<Vec2> pts;     // extended points, including one guard point on each side
  std::vector<double> param; // cumulative chord length at each point
};

Vec2 catmull_rom(const Polyline& poly, std::size_t seg, double s) {
  // Segment seg joins pts[seg] and pts[seg + 1]; guards ensure seg - 1 and seg + 2 exist.
  const Vec2& p0 = poly.pts[seg - 1];
  const Vec2& p1 = poly.pts[seg];
  const Vec2& p2 = poly.pts[seg + 1];
  const Vec2& p3 = poly.pts[seg + 2];
  const double t0 = poly.param[seg - 1], t1 = poly.param[seg], t2 = poly.param[seg + 1], t3 = poly.param[seg + 2];
  const double d0 = t1 - t0, d1 = t2 - t1, d2 = t3 - t2;
  const Vec2 m1 = ((p2 - p1) / d1 * d0 + (p1 - p0) / d0 * d1) / (d0 + d1);
  const Vec2 m2 = ((p3 - p2) / d2 * d1 + (p2 - p1) / d1 * d2) / (d1 + d2);
  const double u = (s - t1) / d1;
  const double u2 = u * u, u3 = u2 * u;
  const double h00 = 2 * u3 - 3 * u2 + 1, h10 = u3 - 2 * u2 + u, h01 = -2 * u3 + 3 * u2, h11 = u3 - u2;
  return h00 * p1 + h10 * d1 * m1 + h01 * p2 + h11 * d1 * m2;
}

// Extended polyline over indices [first, last] (inclusive), with guards.
Polyline build_polyline(const Surface& s, std::ptrdiff_t first, std::ptrdiff_t last) {
  Polyline poly;
  for (std::ptrdiff_t i = first - 1; i <= last + 1; ++i) poly.pts.push_back(s.extended(i));
  poly.param.resize(poly.pts.size());
  poly.param[0] = 0;
  for (std::size_t i = 1; i < poly.pts.size(); ++i)
    poly.param[i] = poly.param[i - 1] + (poly.pts[i] - poly.pts[i - 1]).norm();
  return poly;
}

std::vector<Vec2> sample_polyline(const Polyline& poly, const std::vector<double>& targets) {
  std::vector<Vec2> out;
  out.reserve(targets.size());
  std::size_t seg = 1;
  for (double t : targets) {
    while (seg + 2 < poly.pts.size() - 1 && poly.param[seg + 1] < t) ++seg;
    out.push_back(catmull_rom(poly, seg, t));
  }
  return out;
}

}  // namespace

namespace {

// Map targets given in density-weighted length back to chord parameter values.
std::vector<double> unweight(const Polyline& poly, const std::vector<double>& wparam, std::vector<double> targets) {
  std::size_t seg = 0;
  for (double& t : targets) {
    while (seg + 2 < wparam.size() && wparam[seg + 1] < t) ++seg;
    const double span = wparam[seg + 1] - wparam[seg];
    const double frac = span > 0 ? (t - wparam[seg]) / span : 0.0;
    t = poly.param[seg] + frac * (poly.param[seg + 1] - poly.param[seg]);
  }
  return targets;
}

std::vector<double> weighted_param(const Polyline& poly, const std::function<double(const Vec2&)>& density) {
  std::vector<double> w(poly.pts.size(), 0.0);
  for (std::size_t i = 1; i < poly.pts.size(); ++i) {
    const double rho = density ? density(0.5 * (poly.pts[i] + poly.pts[i - 1])) : 1.0;
    w[i] = w[i - 1] + (poly.param[i] - poly.param[i - 1]) * rho;
  }
  return w;
}

}  // namespace

Surface resample_density(const Surface& s, std::size_t count, const std::function<double(const Vec2&)>& density) {
  if (s.kind() == SurfaceKind::levelset_isosurface) return s;
  const auto n = static_cast<std::ptrdiff_t>(s.size());
  std::vector<double> targets(count);
  if (s.kind() == SurfaceKind::profile_of_revolution && s.ends() == ProfileEnds::capped) {
    const Polyline poly = build_polyline(s, -1, n);
    const auto w = weighted_param(poly, density);
    // poly.pts[1] is the ghost of sample 0; the axis crossings sit half way to the ghosts.
    const double start = w[1] + 0.5 * (w[2] - w[1]);
    const double end = w[n + 1] + 0.5 * (w[n + 2] - w[n + 1]);
    const double step = (end - start) / static_cast<double>(count);
    for (std::size_t j = 0; j < count; ++j) targets[j] = start + (static_cast<double>(j) + 0.5) * step;
    auto pts = sample_polyline(poly, unweight(poly, w, std::move(targets)));
    for (auto& p : pts) p.y() = std::abs(p.y());
    return s.with_samples(std::move(pts));
  }
  const Polyline poly = build_polyline(s, 0, n);
  const auto w = weighted_param(poly, density);
  const double start = w[1];
  const double step = (w[n + 1] - start) / static_cast<double>(count);
  for (std::size_t j = 0; j < count; ++j) targets[j] = start + static_cast<double>(j) * step;
  return s.with_samples(sample_polyline(poly, unweight(poly, w, std::move(targets))));
}

Surface resample_arclength(const Surface& s, std::size_t count) { return resample_density(s, count, nullptr); }

double total_length(const Surface& s) {
  if (s.kind() == SurfaceKind::levelset_isosurface) return 0;
  const auto n = static_cast<std::ptrdiff_t>(s.size());
  double len = 0;
  if (s.kind() == SurfaceKind::profile_of_revolution && s.ends() == ProfileEnds::capped) {
    for (std::ptrdiff_t i = 0; i + 1 < n; ++i) len += (s.extended(i + 1) - s.extended(i)).norm();
    len += 0.5 * (s.extended(0) - s.extended(-1)).norm() + 0.5 * (s.extended(n) - s.extended(n - 1)).norm();
    return len;
  }
  for (std::ptrdiff_t i = 0; i < n; ++i) len += (s.extended(i + 1) - s.extended(i)).norm();
  return len;
}

namespace {

template <class Op>
double fold_spacing(const Surface& s, double init, Op op) {
  const auto& p = s.samples();
  const std::size_t n = p.size();
  double acc = init;
  for (std::size_t i = 0; i + 1 < n; ++i) acc = op(acc, (p[i + 1] - p[i]).norm());
  const bool capped = s.kind() == SurfaceKind::profile_of_revolution && s.ends() == ProfileEnds::capped;
  if (!capped && n > 1) acc = op(acc, (s.extended(static_cast<std::ptrdiff_t>(n)) - p[n - 1]).norm());
  return acc;
}

}  // namespace

double min_spacing(const Surface& s) {
  return fold_spacing(s, std::numeric_limits<double>::infinity(), [](double a, double b) { return std::min(a, b); });
}

double max_spacing(const Surface& s) {
  return fold_spacing(s, 0.0, [](double a, double b) { return std::max(a, b); });
}

// ---------------------------------------------------------------------------
// Constructors

Surface make_circle(double radius, std::size_t count, Vec2 center) {
  std::vector<Vec2> pts(count);
  for (std::size_t j = 0; j < count; ++j) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(count);
    pts[j] = center + radius * Vec2(std::cos(angle), std::sin(angle));
  }
  return Surface::plane_curve(std::move(pts));
}

Surface make_ellipse(double a, double b, std::size_t count) {
  const std::size_t fine = std::max<std::size_t>(8 * count, 256);
  std::vector<Vec2> pts(fine);
  for (std::size_t j = 0; j < fine; ++j) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(fine);
    pts[j] = Vec2(a * std::cos(angle), b * std::sin(angle));
  }
  Surface s = Surface::plane_curve(std::move(pts));
  s = resample_arclength(s, count);
  return resample_arclength(s, count);
}

Surface make_sphere(int n, double radius, std::size_t count) {
  std::vector<Vec2> pts(count);
  for (std::size_t j = 0; j < count; ++j) {
    const double theta = std::numbers::pi * (1.0 - (static_cast<double>(j) + 0.5) / static_cast<double>(count));
    pts[j] = radius * Vec2(std::cos(theta), std::sin(theta));
  }
  return Surface::profile(n, std::move(pts), ProfileEnds::capped);
}

Surface make_periodic_profile(int n, const std::function<double(double)>& radius_fn, double x0, double period,
                              std::size_t count) {
  const std::size_t fine = std::max<std::size_t>(4 * count, 256);
  std::vector<Vec2> pts(fine);
  for (std::size_t j = 0; j < fine; ++j) {
    const double x = x0 + period * static_cast<double>(j) / static_cast<double>(fine);
    pts[j] = Vec2(x, radius_fn(x));
  }
  Surface s = Surface::profile(n, std::move(pts), ProfileEnds::periodic, period);
  s = resample_arclength(s, count);
  return resample_arclength(s, count);
}

Surface make_capped_polar(int n, const std::function<double(double)>& rho, std::size_t count) {
  const std::size_t fine = std::max<std::size_t>(4 * count, 256);
  std::vector<Vec2> pts(fine);
  for (std::size_t j = 0; j < fine; ++j) {
    const double theta = std::numbers::pi * (static_cast<double>(j) + 0.5) / static_cast<double>(fine);
    const double r = rho(theta);
    pts[j] = Vec2(-r * std::cos(theta), r * std::sin(theta));
  }
  Surface s = Surface::profile(n, std::move(pts), ProfileEnds::capped);
  s = resample_arclength(s, count);
  return resample_arclength(s, count);
}

Surface make_dumbbell(int n, double bulb_radius, double bulb_center, double neck_radius, double fillet_radius,
                      std::size_t count) {
  const double R = bulb_radius, c = bulb_center, a = neck_radius, rf = fillet_radius;
  if (!(a > 0 && rf > 0 && R > a)) throw DomainError("dumbbell needs 0 < neck radius < bulb radius");
  const double reach = (R + rf) * (R + rf) - (a + rf) * (a + rf);
  const double xf = -c + std::sqrt(std::max(reach, 0.0));
  if (!(xf < 0)) throw DomainError("dumbbell bulbs overlap the neck");
  // Tangency direction from the left bulb center toward the fillet center.
  const Vec2 v = Vec2(xf + c, a + rf) / (R + rf);
  const double psi = std::atan2(v.y(), v.x());
  const double phi0 = psi - std::numbers::pi;
  const double len_bulb = R * (std::numbers::pi - psi), len_fillet = rf * (-0.5 * std::numbers::pi - phi0);
  const double len_neck = -2 * xf, half = len_bulb + len_fillet;
  const double total = 2 * half + len_neck;
  auto at = [&](double s) -> Vec2 {
    const bool mirror = s > 0.5 * total;
    if (mirror) s = total - s;
    Vec2 p;
    if (s < len_bulb) {
      const double th = std::numbers::pi - s / R;
      p = Vec2(-c + R * std::cos(th), R * std::sin(th));
    } else if (s < half) {
      const double ph = phi0 + (s - len_bulb) / rf;
      p = Vec2(xf + rf * std::cos(ph), a + rf + rf * std::sin(ph));
    } else {
      p = Vec2(xf + (s - half), a);
    }
    if (mirror) p.x() = -p.x();
    return p;
  };
  const std::size_t fine = std::max<std::size_t>(8 * count, 512);
  std::vector<Vec2> pts(fine);
  for (std::size_t j = 0; j < fine; ++j) pts[j] = at(total * (static_cast<double>(j) + 0.5) / static_cast<double>(fine));
  Surface s = Surface::profile(n, std::move(pts), ProfileEnds::capped);
  s = resample_arclength(s, count);
  return resample_arclength(s, count);
}

Surface make_levelset(int ambient_dim, const std::function<double(const VecX&)>& phi, double level,
                      const VecX& box_min, const VecX& box_max, double h) {
  if (ambient_dim != 2 && ambient_dim != 3) throw DomainError("make_levelset supports ambient dimension 2 or 3");
  const double fd = 1e-4 * h;
  auto gradient = [&](const VecX& x) {
    VecX g(ambient_dim);
    for (int a = 0; a < ambient_dim; ++a) {
      VecX xp = x, xm = x;
      xp(a) += fd;
      xm(a) -= fd;
      g(a) = (phi(xp) - phi(xm)) / (2 * fd);
    }
    return g;
  };
  const double hs = 1e-3;
  auto curvature = [&](const VecX& x) {
    // div(grad phi / |grad phi|) by centred differences of the unit normal.
    double div = 0;
    for (int a = 0; a < ambient_dim; ++a) {
      VecX xp = x, xm = x;
      xp(a) += hs;
      xm(a) -= hs;
      const VecX gp = gradient(xp), gm = gradient(xm);
      div += (gp(a) / gp.norm() - gm(a) / gm.norm()) / (2 * hs);
    }
    return div;
  };
  std::vector<int> counts(ambient_dim);
  for (int a = 0; a < ambient_dim; ++a)
    counts[a] = static_cast<int>(std::floor((box_max(a) - box_min(a)) / h + 1e-9)) + 1;
  std::vector<VecX> points, normals;
  std::vector<double> hs_out, weights;
  const double cell = std::pow(h, ambient_dim);
  std::vector<int> idx(ambient_dim, 0);
  while (true) {
    VecX x(ambient_dim);
    for (int a = 0; a < ambient_dim; ++a) x(a) = box_min(a) + idx[a] * h;
    const double value = phi(x) - level;
    const VecX g = gradient(x);
    const double gn = g.norm();
    const double eps = 1.5 * h * gn;
    if (gn > 0 && std::abs(value) < eps) {
      const double delta = (1.0 + std::cos(std::numbers::pi * value / eps)) / (2.0 * eps);
      VecX y = x;
      for (int it = 0; it < 4; ++it) {
        const VecX gy = gradient(y);
        y -= (phi(y) - level) * gy / gy.squaredNorm();
      }
      const VecX gy = gradient(y);
      points.push_back(y);
      normals.push_back(gy / gy.norm());
      hs_out.push_back(curvature(y));
      weights.push_back(cell * delta * gn);
    }
    int a = 0;
    while (a < ambient_dim && ++idx[a] == counts[a]) idx[a++] = 0;
    if (a == ambient_dim) break;
  }
  return Surface::levelset(ambient_dim, std::move(points), std::move(normals), std::move(hs_out), std::move(weights));
}

// ---------------------------------------------------------------------------
// CSV

void write_surface_csv(std::ostream& out, const Surface& s) {
  out << std::setprecision(17);
  switch (s.kind()) {
    case SurfaceKind::plane_curve:
      out << "x0,x1\n";
      for (const auto& p : s.samples()) out << p.x() << ',' << p.y() << '\n';
      break;
    case SurfaceKind::profile_of_revolution:
      out << "x,r\n";
      for (const auto& p : s.samples()) out << p.x() << ',' << p.y() << '\n';
      break;
    case SurfaceKind::levelset_isosurface: {
      for (int a = 0; a < s.ambient_dim(); ++a) out << (a ? "," : "") << 'x' << a;
      out << '\n';
      for (const auto& p : s.points()) {
        for (int a = 0; a < p.size(); ++a) out << (a ? "," : "") << p(a);
        out << '\n';
      }
      break;
    }
  }
}

Surface read_surface_csv(std::istream& in, int n, ProfileEnds ends, double period) {
  std::string header;
  if (!std::getline(in, header)) throw DomainError("surface CSV is empty");
  if (!header.empty() && header.back() == '\r') header.pop_back();
  const bool profile = header == "x,r";
  if (!profile && header != "x0,x1") throw DomainError("unsupported surface CSV header: " + header);
  std::vector<Vec2> pts;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::istringstream row(line);
    double a = 0, b = 0;
    char comma = 0;
    if (!(row >> a >> comma >> b) || comma != ',') throw DomainError("malformed surface CSV row: " + line);
    pts.emplace_back(a, b);
  }
  if (profile) return Surface::profile(n, std::move(pts), ends, period);
  return Surface::plane_curve(std::move(pts));
}

}  // namespace mcf
