#include "mcflab/cylinder.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace mcf {

ShrinkerCylinder::ShrinkerCylinder(int n, int k, VecX center, MatX axis) : n_(n), k_(k), center_(std::move(center)) {
  if (n < 1 || k < 0 || k > n - 1) throw DomainError("cylinder needs 0 <= k <= n - 1");
  if (center_.size() != n + 1) throw DomainError("cylinder center has the wrong dimension");
  if (axis.rows() != n + 1 || axis.cols() != k) throw DomainError("cylinder axis frame has the wrong shape");
  if (k == 0) {
    axis_ = MatX(n + 1, 0);
    return;
  }
  Eigen::HouseholderQR<MatX> qr(axis);
  MatX q = qr.householderQ() * MatX::Identity(n + 1, k);
  // Keep the orientation of the supplied vectors.
  for (int j = 0; j < k; ++j)
    if (q.col(j).dot(axis.col(j)) < 0) q.col(j) *= -1;
  axis_ = std::move(q);
}

ShrinkerCylinder ShrinkerCylinder::standard(int n, int k) {
  return ShrinkerCylinder(n, k, VecX::Zero(n + 1), MatX::Identity(n + 1, k));
}

MatX ShrinkerCylinder::pi() const { return MatX::Identity(n_ + 1, n_ + 1) - pi_axis(); }

double ShrinkerCylinder::height(const VecX& x) const { return project_perp(x - center_).norm() - radius(); }

double ShrinkerCylinder::frame_defect() const {
  if (k_ == 0) return 0;
  return (axis_.transpose() * axis_ - MatX::Identity(k_, k_)).cwiseAbs().maxCoeff();
}

double projection_distance(const MatX& a, const MatX& b) {
  const MatX d = a - b;
  Eigen::SelfAdjointEigenSolver<MatX> eig(d);
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

namespace {

// Orthonormal completion of the axis frame: columns [V | U].
MatX complete_frame(const MatX& axis, int dim) {
  MatX q(dim, dim);
  int filled = 0;
  for (int j = 0; j < axis.cols(); ++j) {
    VecX v = axis.col(j);
    for (int i = 0; i < filled; ++i) v -= q.col(i).dot(v) * q.col(i);
    q.col(filled++) = v.normalized();
  }
  // Gram-Schmidt on the coordinate vectors, twice for stability.
  for (int e = 0; e < dim && filled < dim; ++e) {
    VecX v = VecX::Unit(dim, e);
    for (int pass = 0; pass < 2; ++pass)
      for (int i = 0; i < filled; ++i) v -= q.col(i).dot(v) * q.col(i);
    if (v.norm() > 0.5 / std::sqrt(static_cast<double>(dim))) q.col(filled++) = v.normalized();
  }
  if (filled < dim) throw DomainError("could not complete the axis frame");
  return q;
}

MatX cayley(const MatX& s) {
  const auto dim = s.rows();
  const MatX id = MatX::Identity(dim, dim);
  return (id - 0.5 * s).partialPivLu().solve(id + 0.5 * s);
}

struct FitState {
  MatX frame;  // [V | U]
  VecX center;
};

struct FitProblem {
  int dim;
  int k;
  double rho;
  const std::vector<VecX>* xs;
  const std::vector<double>* weights;
  bool opt_center;
  bool opt_axis;

  int params() const { return (opt_center ? dim - k : 0) + (opt_axis ? k * (dim - k) : 0); }

  FitState apply(const FitState& base, const VecX& p) const {
    FitState out = base;
    int idx = 0;
    if (opt_center) {
      out.center = base.center + base.frame.rightCols(dim - k) * p.head(dim - k);
      idx = dim - k;
    }
    if (opt_axis && k > 0) {
      MatX s = MatX::Zero(dim, dim);
      for (int a = 0; a < k; ++a)
        for (int b = k; b < dim; ++b) {
          s(b, a) = p(idx);
          s(a, b) = -p(idx);
          ++idx;
        }
      out.frame = base.frame * cayley(s);
    }
    return out;
  }

  VecX residual(const FitState& st) const {
    VecX r(static_cast<Eigen::Index>(xs->size()));
    const MatX v = st.frame.leftCols(k);
    for (std::size_t i = 0; i < xs->size(); ++i) {
      const VecX d = (*xs)[i] - st.center;
      const VecX perp = d - v * (v.transpose() * d);
      r(static_cast<Eigen::Index>(i)) = std::sqrt((*weights)[i]) * (perp.norm() - rho);
    }
    return r;
  }
};

void sign_normalize(MatX& axis) {
  for (int j = 0; j < axis.cols(); ++j) {
    Eigen::Index arg = 0;
    axis.col(j).cwiseAbs().maxCoeff(&arg);
    if (axis(arg, j) < 0) axis.col(j) *= -1;
  }
}

// Three-point derivative on a nonuniform grid with optional wrap-around.
std::vector<double> differentiate(const std::vector<double>& xi, const std::vector<double>& f, bool wrap,
                                  double period) {
  const std::size_t n = f.size();
  std::vector<double> out(n, 0.0);
  if (n < 3) return out;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t im, ip;
    double hm, hp;
    if (i == 0 || i + 1 == n) {
      if (!wrap) continue;
      im = (i + n - 1) % n;
      ip = (i + 1) % n;
    } else {
      im = i - 1;
      ip = i + 1;
    }
    hm = xi[i] - xi[im];
    hp = xi[ip] - xi[i];
    if (wrap && period > 0) {
      hm = std::remainder(hm, period);
      hp = std::remainder(hp, period);
    }
    if (hm == 0 || hp == 0) continue;
    out[i] = (hm * hm * f[ip] - hp * hp * f[im] + (hp * hp - hm * hm) * f[i]) / (hm * hp * (hm + hp));
  }
  if (!wrap) {
    out[0] = out[1];
    out[n - 1] = out[n - 2];
  }
  return out;
}

CylinderFit fit_impl(int n, std::vector<AmbientSample> samples, int k, const CylinderFitOptions& opts) {
  const int dim = n + 1;
  if (k < 0 || k > n - 1) throw DomainError("fit_cylinder needs 0 <= k <= n - 1");
  const double rho = std::sqrt(2.0 * (n - k));

  std::vector<VecX> xs;
  std::vector<double> weights;
  std::vector<std::size_t> used;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double r2 = samples[i].x.squaredNorm();
    if (r2 > opts.graph_radius * opts.graph_radius) continue;
    xs.push_back(samples[i].x);
    weights.push_back(samples[i].area * std::exp(-0.25 * r2));
    used.push_back(i);
  }
  if (xs.size() < static_cast<std::size_t>(2 * dim)) throw DomainError("too few samples inside the graph ball");

  double wsum = 0;
  VecX mean = VecX::Zero(dim);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    wsum += weights[i];
    mean += weights[i] * xs[i];
  }
  mean /= wsum;

  FitState st;
  st.center = opts.initial_center.size() == dim ? opts.initial_center : (opts.optimize_center ? mean : VecX::Zero(dim));
  MatX axis;
  if (k == 0) {
    axis = MatX(dim, 0);
  } else if (opts.initial_axis.rows() == dim && opts.initial_axis.cols() == k) {
    axis = opts.initial_axis;
  } else {
    MatX inertia = MatX::Zero(dim, dim);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const VecX d = xs[i] - st.center;
      inertia += weights[i] * d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<MatX> eig(inertia);
    axis = eig.eigenvectors().rightCols(k).rowwise().reverse();
    sign_normalize(axis);
  }
  st.frame = complete_frame(axis, dim);

  FitProblem prob{dim, k, rho, &xs, &weights, opts.optimize_center, opts.optimize_axis && k > 0};
  VecX r = prob.residual(st);
  double obj = r.squaredNorm();
  int iterations = 0;
  const int np = prob.params();
  if (np > 0) {
    double lambda = 1e-6;
    for (; iterations < opts.max_iterations; ++iterations) {
      MatX jac(r.size(), np);
      const double step = 1e-7;
      for (int p = 0; p < np; ++p) {
        VecX dp = VecX::Zero(np);
        dp(p) = step;
        const VecX rp = prob.residual(prob.apply(st, dp));
        dp(p) = -step;
        const VecX rm = prob.residual(prob.apply(st, dp));
        jac.col(p) = (rp - rm) / (2 * step);
      }
      const MatX jtj = jac.transpose() * jac;
      const VecX jtr = jac.transpose() * r;
      bool accepted = false;
      VecX delta;
      for (int tries = 0; tries < 12 && !accepted; ++tries) {
        MatX a = jtj;
        a.diagonal() += lambda * (jtj.diagonal().array() + 1e-12).matrix();
        delta = -a.ldlt().solve(jtr);
        const FitState trial = prob.apply(st, delta);
        const VecX rt = prob.residual(trial);
        const double ot = rt.squaredNorm();
        if (ot <= obj * (1 + 1e-13)) {
          st = trial;
          r = rt;
          obj = ot;
          lambda = std::max(lambda * 0.3, 1e-12);
          accepted = true;
        } else {
          lambda *= 10;
        }
      }
      if (!accepted || delta.norm() < 1e-11) break;
    }
  }

  CylinderFit fit;
  MatX final_axis = st.frame.leftCols(k);
  if (k > 0) sign_normalize(final_axis);
  // Keep only the part of the center orthogonal to the axis.
  VecX center = st.center - final_axis * (final_axis.transpose() * st.center);
  fit.cylinder = ShrinkerCylinder(n, k, center, final_axis);
  fit.objective = obj;
  fit.iterations = iterations;

  fit.w.assign(samples.size(), std::numeric_limits<double>::quiet_NaN());
  double radius_sum = 0;
  double l2 = 0;
  double sup = 0;
  double graphical = std::numeric_limits<double>::infinity();
  std::size_t first_failure = samples.size();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const VecX perp = fit.cylinder.project_perp(samples[i].x - fit.cylinder.center());
    const double len = perp.norm();
    const double cosine = len > 0 ? samples[i].normal.dot(perp) / len : -1.0;
    const double dist = samples[i].x.norm();
    if (cosine < opts.min_radial_cosine) {
      graphical = std::min(graphical, dist);
      if (dist <= opts.graph_radius && first_failure == samples.size()) first_failure = i;
    }
  }
  if (first_failure < samples.size())
    throw GraphFailure("surface is not a normal graph over the fitted cylinder", samples[first_failure].source);
  for (std::size_t j = 0; j < used.size(); ++j) {
    const std::size_t i = used[j];
    const double w = fit.cylinder.height(samples[i].x);
    fit.w[i] = w;
    radius_sum += weights[j] * (w + rho);
    l2 += weights[j] * w * w;
    sup = std::max(sup, std::abs(w));
  }
  fit.measured_radius = radius_sum / wsum;
  fit.graphical_radius = std::isfinite(graphical) ? graphical : opts.graph_radius;
  fit.norms.l2 = std::sqrt(l2);
  fit.norms.sup = sup;
  fit.samples = std::move(samples);
  return fit;
}

}  // namespace

CylinderFit fit_cylinder(int n, std::vector<AmbientSample> samples, int k, const CylinderFitOptions& opts) {
  return fit_impl(n, std::move(samples), k, opts);
}

CylinderFit fit_cylinder(const Surface& surface, int k, const CylinderFitOptions& opts) {
  CylinderFit fit = fit_impl(surface.n(), ambient_samples(surface, opts.angular_resolution, opts.graph_radius), k, opts);
  if (surface.kind() == SurfaceKind::levelset_isosurface) return fit;
  if (surface.kind() == SurfaceKind::profile_of_revolution && k > 1) return fit;

  // Derivative norms along the single cylinder coordinate of a curve-based surface.
  const std::size_t m = surface.size();
  std::vector<double> xi(m), w(m, 0.0), weight(m, 0.0), count(m, 0.0);
  const auto& cyl = fit.cylinder;
  const int dim = surface.ambient_dim();
  for (std::size_t i = 0; i < fit.samples.size(); ++i) {
    const auto& s = fit.samples[i];
    w[s.source] += cyl.height(s.x);
    count[s.source] += 1;
    const double r2 = s.x.squaredNorm();
    if (r2 <= opts.graph_radius * opts.graph_radius) weight[s.source] += s.area * std::exp(-0.25 * r2);
  }
  const double rho = cyl.radius();
  for (std::size_t i = 0; i < m; ++i) {
    w[i] /= count[i];
    const Vec2& p = surface.samples()[i];
    VecX x = VecX::Zero(dim);
    x(0) = p.x();
    x(1) = p.y();
    const VecX d = x - cyl.center();
    if (k >= 1) {
      xi[i] = cyl.axis_frame().col(0).dot(d);
    } else if (surface.kind() == SurfaceKind::plane_curve) {
      xi[i] = rho * std::atan2(d(1), d(0));
    } else {
      xi[i] = rho * std::atan2(d(1), d(0));
    }
  }
  const bool closed = surface.kind() == SurfaceKind::plane_curve ||
                      (surface.kind() == SurfaceKind::profile_of_revolution && surface.ends() == ProfileEnds::periodic);
  double period = 0;
  if (surface.kind() == SurfaceKind::plane_curve && k == 0) period = 2 * std::numbers::pi * rho;
  if (surface.kind() == SurfaceKind::profile_of_revolution && surface.ends() == ProfileEnds::periodic)
    period = surface.period();
  const auto d1 = differentiate(xi, w, closed, period);
  const auto d2 = differentiate(xi, d1, closed, period);
  const auto d3 = differentiate(xi, d2, closed, period);
  double s1 = 0, s2 = 0, s3 = 0;
  for (std::size_t i = 0; i < m; ++i) {
    s1 += weight[i] * d1[i] * d1[i];
    s2 += weight[i] * d2[i] * d2[i];
    s3 += weight[i] * d3[i] * d3[i];
  }
  fit.norms.d1 = std::sqrt(s1);
  fit.norms.d2 = std::sqrt(s2);
  fit.norms.d3 = std::sqrt(s3);
  return fit;
}

}  // namespace mcf
