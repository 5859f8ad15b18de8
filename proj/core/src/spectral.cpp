#include "mcflab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <json.hpp>

#include "mcflab/geometry.hpp"
#include "mcflab/quadrature.hpp"

namespace mcf {

namespace {

DriftFunction wrap(int n, int k, const Polynomial& p) {
  if (p.vars() != (k < 0 ? n : n + 1)) throw DomainError("polynomial has the wrong number of variables");
  const int d = p.vars();
  std::vector<Polynomial> grad;
  std::vector<std::vector<Polynomial>> hess(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    grad.push_back(p.derivative(i));
    for (int j = 0; j < d; ++j) hess[static_cast<std::size_t>(i)].push_back(grad.back().derivative(j));
  }
  DriftFunction f;
  f.n = n;
  f.k = k;
  f.value = [p](const VecX& x) { return p(x); };
  f.gradient = [grad, d](const VecX& x) {
    VecX g(d);
    for (int i = 0; i < d; ++i) g[i] = grad[static_cast<std::size_t>(i)](x);
    return g;
  };
  f.hessian = [hess, d](const VecX& x) {
    MatX h(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) h(i, j) = hess[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)](x);
    return h;
  };
  return f;
}

void compositions(int total, int parts, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == parts - 1) {
    cur.push_back(total);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (int a = total; a >= 0; --a) {
    cur.push_back(a);
    compositions(total - a, parts, cur, out);
    cur.pop_back();
  }
}

// Orthonormal frame of the complement of the axis directions.
MatX complement_frame(const ShrinkerCylinder& cyl) {
  const int d = cyl.n() + 1, k = cyl.k();
  if (k == 0) return MatX::Identity(d, d);
  Eigen::HouseholderQR<MatX> qr(cyl.axis_frame());
  const MatX q = qr.householderQ() * MatX::Identity(d, d);
  return q.rightCols(d - k);
}

}  // namespace

DriftFunction DriftFunction::flat(const Polynomial& p) { return wrap(p.vars(), -1, p); }

DriftFunction DriftFunction::cylinder(int n, int k, const Polynomial& ambient) {
  if (k < 0 || k >= n) throw DomainError("cylinder functions need 0 <= k < n");
  return wrap(n, k, ambient);
}

double drift_apply(const DriftFunction& v, const VecX& x) {
  if (x.size() != v.ambient_dim()) throw DomainError("point has the wrong dimension");
  const VecX g = v.gradient(x);
  const MatX h = v.hessian(x);
  if (!v.on_cylinder()) return h.trace() - 0.5 * x.dot(g);
  const int k = v.k, m = v.n - v.k;
  double out = 0;
  for (int i = 0; i < k; ++i) out += h(i, i) - 0.5 * x[i] * g[i];
  // Spherical Laplacian of the restriction: Delta F - F_rr - (m / r) F_r on |z| = r.
  const VecX z = x.tail(m + 1);
  const double r = z.norm();
  if (!(r > 0)) throw DomainError("cylinder point on the axis");
  const VecX zh = z / r;
  const MatX hz = h.bottomRightCorner(m + 1, m + 1);
  out += hz.trace() - zh.dot(hz * zh) - m / r * zh.dot(g.tail(m + 1));
  return out;
}

std::vector<Polynomial> hermite_eigen(int n, int two_lambda) {
  if (n < 1 || two_lambda < 0) throw DomainError("hermite_eigen needs n >= 1 and two_lambda >= 0");
  std::vector<std::vector<int>> degs;
  std::vector<int> cur;
  compositions(two_lambda, n, cur, degs);
  std::vector<Polynomial> out;
  for (const auto& d : degs) out.push_back(hermite_product(d));
  return out;
}

Polynomial KernelElement::polynomial() const {
  const int d = n + 1, m1 = n - k + 1;
  Polynomial p(d);
  for (int i = 0; i < k; ++i) {
    const Polynomial y = Polynomial::coordinate(d, i);
    p = p + (y * y - Polynomial::constant(d, 2.0)) * a[i];
    for (int j = i + 1; j < k; ++j) p = p + y * Polynomial::coordinate(d, j) * aij(i, j);
    for (int c2 = 0; c2 < m1; ++c2) p = p + y * Polynomial::coordinate(d, k + c2) * c(i, c2);
  }
  return p;
}

std::string KernelElement::to_json() const {
  nlohmann::json j;
  j["n"] = n;
  j["k"] = k;
  if (!label.empty()) j["label"] = label;
  std::vector<double> av(a.data(), a.data() + a.size());
  j["a"] = av;
  nlohmann::json pairs = nlohmann::json::object();
  for (int i = 0; i < k; ++i)
    for (int l = i + 1; l < k; ++l) pairs["y" + std::to_string(i + 1) + "y" + std::to_string(l + 1)] = aij(i, l);
  j["a_ij"] = pairs;
  nlohmann::json cm = nlohmann::json::object();
  for (int i = 0; i < k; ++i)
    for (int m = 0; m < c.cols(); ++m) cm["y" + std::to_string(i + 1) + "z" + std::to_string(m + 1)] = c(i, m);
  j["c"] = cm;
  return j.dump();
}

int kernel_dimension(int n, int k) { return k + k * (k - 1) / 2 + k * (n - k + 1); }

std::vector<KernelElement> kernel_basis(int n, int k) {
  if (k < 0 || k > n - 1) throw DomainError("kernel_basis needs 0 <= k <= n - 1");
  const int m1 = n - k + 1;
  auto blank = [&]() {
    KernelElement e;
    e.n = n;
    e.k = k;
    e.a = VecX::Zero(k);
    e.aij = MatX::Zero(k, k);
    e.c = MatX::Zero(k, m1);
    return e;
  };
  std::vector<KernelElement> out;
  for (int i = 0; i < k; ++i) {
    auto e = blank();
    e.a[i] = 1;
    e.label = "y" + std::to_string(i + 1) + "^2 - 2";
    out.push_back(e);
  }
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) {
      auto e = blank();
      e.aij(i, j) = 1;
      e.label = "y" + std::to_string(i + 1) + " y" + std::to_string(j + 1);
      out.push_back(e);
    }
  for (int i = 0; i < k; ++i)
    for (int m = 0; m < m1; ++m) {
      auto e = blank();
      e.c(i, m) = 1;
      e.label = "y" + std::to_string(i + 1) + " z" + std::to_string(m + 1);
      out.push_back(e);
    }
  return out;
}

double cylinder_mean_curvature(int n, int k) { return std::sqrt((n - k) / 2.0); }

KernelProjection kernel_project(const DriftFunction& w, const ShrinkerCylinder& cyl, const ProjectionOptions& opts) {
  const int n = cyl.n(), k = cyl.k(), m1 = n - k + 1, d = n + 1;
  if (w.ambient_dim() != d) throw DomainError("function and cylinder live in different dimensions");
  const double rho = cyl.radius();
  const double need = 3.0 * n + 1.0;
  if (w.radius < need) throw DomainError("function must be defined on a ball of radius at least 3n + 1");
  const double extent = std::isfinite(w.radius)
                            ? std::min(opts.axis_cutoff, std::sqrt(w.radius * w.radius - rho * rho) / std::sqrt(std::max(1, k)))
                            : opts.axis_cutoff;
  const MatX frame = complement_frame(cyl);
  auto ambient = [&](const VecX& local) {
    return VecX(cyl.center() + cyl.axis_frame() * local.head(k) + frame * local.tail(m1));
  };

  const auto basis = kernel_basis(n, k);
  std::vector<Polynomial> polys;
  for (const auto& e : basis) polys.push_back(e.polynomial());
  const int nb = static_cast<int>(basis.size());

  const auto axis_rule = quad::gauss_legendre(opts.axis_nodes, -extent, extent);
  const auto sphere = quad::unit_sphere(m1, opts.sphere_resolution);
  MatX gram = MatX::Zero(nb, nb);
  VecX rhs = VecX::Zero(nb);
  double norm2 = 0;
  std::vector<int> idx(static_cast<std::size_t>(k), 0);
  const int na = static_cast<int>(axis_rule.nodes.size());
  const long total = static_cast<long>(std::pow(na, k));
  for (long flat = 0; flat < total; ++flat) {
    long rem = flat;
    VecX local(d);
    double wy = 1;
    for (int i = 0; i < k; ++i) {
      const int a = static_cast<int>(rem % na);
      rem /= na;
      const double y = axis_rule.nodes[static_cast<std::size_t>(a)];
      local[i] = y;
      wy *= axis_rule.weights[static_cast<std::size_t>(a)] * std::exp(-0.25 * y * y);
    }
    for (std::size_t s = 0; s < sphere.nodes.size(); ++s) {
      local.tail(m1) = rho * sphere.nodes[s];
      const double wt = wy * sphere.weights[s];
      const double f = w.value(ambient(local));
      VecX b(nb);
      for (int i = 0; i < nb; ++i) b[i] = polys[static_cast<std::size_t>(i)](local);
      gram.noalias() += wt * b * b.transpose();
      rhs += wt * f * b;
      norm2 += wt * f * f;
    }
  }

  KernelProjection out;
  out.axis_extent = extent;
  out.gaussian_norm = std::sqrt(norm2);
  out.coefficients = nb > 0 ? VecX(gram.ldlt().solve(rhs)) : VecX();
  KernelElement wt;
  wt.n = n;
  wt.k = k;
  wt.a = VecX::Zero(k);
  wt.aij = MatX::Zero(k, k);
  wt.c = MatX::Zero(k, m1);
  wt.label = "projection";
  for (int i = 0; i < nb; ++i) {
    const auto& e = basis[static_cast<std::size_t>(i)];
    wt.a += out.coefficients[i] * e.a;
    wt.aij += out.coefficients[i] * e.aij;
    wt.c += out.coefficients[i] * e.c;
  }
  out.w_tilde = wt;
  const Polynomial wp = wt.polynomial();

  // sup over cylinder points with |x| <= 3n (|y|^2 + rho^2 <= 9 n^2).
  const double ymax = std::sqrt(std::max(0.0, 9.0 * n * n - rho * rho));
  const int per_axis = k <= 1 ? opts.sup_samples : std::min(opts.sup_samples, 41);
  const auto sup_sphere = quad::unit_sphere(m1, 12);
  const long sup_total = static_cast<long>(std::pow(per_axis, k));
  for (long flat = 0; flat < sup_total; ++flat) {
    long rem = flat;
    VecX local(d);
    for (int i = 0; i < k; ++i) {
      const int a = static_cast<int>(rem % per_axis);
      rem /= per_axis;
      local[i] = per_axis > 1 ? -ymax + 2 * ymax * a / (per_axis - 1) : 0.0;
    }
    if (local.head(k).squaredNorm() > ymax * ymax * (1 + 1e-12)) continue;
    for (const auto& zn : sup_sphere.nodes) {
      local.tail(m1) = rho * zn;
      out.remainder_sup = std::max(out.remainder_sup, std::abs(w.value(ambient(local)) - wp(local)));
    }
  }
  return out;
}

GraphLinearization graph_H_linearize(const DriftFunction& w, const ShrinkerCylinder& cyl,
                                     const LinearizationOptions& opts) {
  const int n = cyl.n(), k = cyl.k();
  const bool curve = n == 1 && k == 0;
  if (!curve && k != 1) throw DomainError("graph linearization supports (n, k) = (1, 0) or k = 1");
  if (!w.on_cylinder() || w.n != n || w.k != k) throw DomainError("function is not defined on this cylinder");
  if ((cyl.center().norm() > 0) || (k == 1 && std::abs(std::abs(cyl.axis_frame()(0, 0)) - 1) > 1e-12))
    throw DomainError("graph linearization expects the standard cylinder");
  const double rho = cyl.radius();
  GraphLinearization out;
  out.H_C = cylinder_mean_curvature(n, k);

  const std::size_t count = opts.samples;
  std::vector<VecX> base(count);
  std::vector<Vec2> pts(count);
  std::vector<double> wv(count);
  const double half = opts.half_period > 0 ? opts.half_period : 3.0 * n + 3.0;
  for (std::size_t i = 0; i < count; ++i) {
    VecX b = VecX::Zero(n + 1);
    double coord;
    if (curve) {
      coord = 2 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(count);
      b << rho * std::cos(coord), rho * std::sin(coord);
    } else {
      coord = -half + 2 * half * static_cast<double>(i) / static_cast<double>(count);
      b[0] = coord;
      b[1] = rho;
    }
    const double wi = w.value(b);
    if (!(1 + wi / rho > 0)) throw GraphFailure("graph is not immersed (1 + w / rho <= 0)", i);
    base[i] = b;
    wv[i] = wi;
    out.coordinate.push_back(coord);
    pts[i] = curve ? Vec2((rho + wi) * std::cos(coord), (rho + wi) * std::sin(coord)) : Vec2(coord, rho + wi);
  }
  const Surface surf = curve ? Surface::plane_curve(pts) : Surface::profile(n, pts, ProfileEnds::periodic, 2 * half);
  const auto res = shrinker_residual(surf);
  for (std::size_t i = 0; i < count; ++i) {
    const double l = drift_apply(w, base[i]);  // Delta w - <y, grad_y w> / 2
    double ydotg = 0;
    if (!curve) ydotg = base[i][0] * w.gradient(base[i])[0];
    const double lap = l + 0.5 * ydotg;  // Delta_theta + Delta_y
    const double h = mean_curvature(surf, i);
    const double lin = out.H_C - (lap + 0.5 * wv[i]);
    out.H.push_back(h);
    out.linear.push_back(lin);
    out.remainder.push_back(h - lin);
    out.phi.push_back(res.phi[i]);
    out.phi_remainder.push_back(res.phi[i] + l + wv[i]);
    if (curve || std::abs(out.coordinate[i]) <= 3.0 * n) {
      out.remainder_sup = std::max(out.remainder_sup, std::abs(h - lin));
      out.phi_remainder_sup = std::max(out.phi_remainder_sup, std::abs(out.phi_remainder.back()));
    }
  }
  return out;
}

}  // namespace mcf
