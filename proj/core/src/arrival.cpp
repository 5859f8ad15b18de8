#include "mcflab/arrival.hpp"

#include <algorithm>
#include <cmath>

namespace mcf {

ArrivalField::ArrivalField(VecX origin, double h, std::vector<int> shape)
    : origin_(std::move(origin)), h_(h), shape_(std::move(shape)) {
  if (shape_.size() < 2 || shape_.size() > 3) throw DomainError("arrival grids are two or three dimensional");
  if (origin_.size() != dim()) throw DomainError("grid origin has the wrong dimension");
  if (!(h_ > 0)) throw DomainError("grid spacing must be positive");
  std::size_t total = 1;
  for (int a = 0; a < 3; ++a) {
    stride_[a] = total;
    if (a < dim()) {
      if (shape_[a] < 1) throw DomainError("grid shape must be positive");
      total *= static_cast<std::size_t>(shape_[a]);
    }
  }
  values_.assign(total, 0.0);
  mask_.assign(total, 0);
}

std::size_t ArrivalField::index(const std::array<int, 3>& c) const {
  std::size_t i = 0;
  for (int a = 0; a < dim(); ++a) i += stride_[a] * static_cast<std::size_t>(c[a]);
  return i;
}

std::array<int, 3> ArrivalField::cell(std::size_t index) const {
  std::array<int, 3> c{0, 0, 0};
  for (int a = 0; a < dim(); ++a) {
    c[a] = static_cast<int>(index % static_cast<std::size_t>(shape_[a]));
    index /= static_cast<std::size_t>(shape_[a]);
  }
  return c;
}

VecX ArrivalField::point(std::size_t index) const {
  const auto c = cell(index);
  VecX x = origin_;
  for (int a = 0; a < dim(); ++a) x[a] += h_ * c[a];
  return x;
}

std::size_t ArrivalField::neighbor(std::size_t index, int axis, int offset) const {
  if (index == npos) return npos;
  const int c = static_cast<int>((index / stride_[axis]) % static_cast<std::size_t>(shape_[axis]));
  const int t = c + offset;
  if (t < 0 || t >= shape_[axis]) return npos;
  return offset >= 0 ? index + stride_[axis] * static_cast<std::size_t>(offset)
                     : index - stride_[axis] * static_cast<std::size_t>(-offset);
}

bool ArrivalField::has_stencil(std::size_t index) const {
  if (!in_domain(index)) return false;
  for (int a = 0; a < dim(); ++a) {
    for (int da : {-1, 1}) {
      const std::size_t na = neighbor(index, a, da);
      if (!in_domain(na)) return false;
      for (int b = a + 1; b < dim(); ++b)
        for (int db : {-1, 1})
          if (!in_domain(neighbor(na, b, db))) return false;
    }
  }
  return true;
}

VecX ArrivalField::gradient(std::size_t index) const {
  VecX g(dim());
  for (int a = 0; a < dim(); ++a) {
    const std::size_t p = neighbor(index, a, 1), m = neighbor(index, a, -1);
    if (!in_domain(p) || !in_domain(m)) throw BoundaryError("gradient stencil leaves the domain");
    g[a] = (values_[p] - values_[m]) / (2 * h_);
  }
  return g;
}

MatX ArrivalField::hessian(std::size_t index) const {
  if (!has_stencil(index)) throw BoundaryError("Hessian stencil leaves the domain");
  MatX hs(dim(), dim());
  const double u0 = values_[index], h2 = h_ * h_;
  for (int a = 0; a < dim(); ++a) {
    hs(a, a) = (values_[neighbor(index, a, 1)] - 2 * u0 + values_[neighbor(index, a, -1)]) / h2;
    for (int b = a + 1; b < dim(); ++b) {
      const double pp = values_[neighbor(neighbor(index, a, 1), b, 1)];
      const double pm = values_[neighbor(neighbor(index, a, 1), b, -1)];
      const double mp = values_[neighbor(neighbor(index, a, -1), b, 1)];
      const double mm = values_[neighbor(neighbor(index, a, -1), b, -1)];
      hs(a, b) = hs(b, a) = (pp - pm - mp + mm) / (4 * h2);
    }
  }
  return hs;
}

namespace {

std::vector<int> grid_shape(const VecX& lo, const VecX& hi, double h) {
  std::vector<int> shape(lo.size());
  for (int a = 0; a < lo.size(); ++a) {
    if (!(hi[a] > lo[a])) throw DomainError("empty grid box");
    shape[a] = static_cast<int>(std::floor((hi[a] - lo[a]) / h + 1e-9)) + 1;
  }
  return shape;
}

}  // namespace

ArrivalField sample_field(const VecX& box_min, const VecX& box_max, double h,
                          const std::function<double(const VecX&)>& u,
                          const std::function<bool(const VecX&)>& inside) {
  ArrivalField f(box_min, h, grid_shape(box_min, box_max, h));
  for (std::size_t i = 0; i < f.size(); ++i) {
    const VecX x = f.point(i);
    if (!inside || inside(x)) f.set(i, u(x), CellState::swept);
  }
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < f.size(); ++i)
    if (f.in_domain(i)) top = std::max(top, f.value(i));
  VecX sum = VecX::Zero(f.dim());
  double count = 0;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (f.in_domain(i) && f.value(i) == top) {
      f.set(i, top, CellState::extinct);
      sum += f.point(i);
      ++count;
    }
  if (count > 0) f.stats.extinction_point = sum / count;
  f.stats.termination = "sampled";
  return f;
}

namespace {

enum : unsigned char { m_outside = 0, m_pending = 1, m_swept = 2, m_extinct = 3 };

// Uniform lattice in the plane of the curve or in the meridian half plane (x, r).
struct Lattice {
  Vec2 origin = Vec2::Zero();
  double hx = 1, hy = 1;
  int nx = 0, ny = 0;
  std::vector<double> tau;
  std::vector<unsigned char> state;

  std::size_t at(int i, int j) const { return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(i); }
  Vec2 point(int i, int j) const { return origin + Vec2(i * hx, j * hy); }
};

// Closed polygon for inside tests: the curve itself, or a capped profile closed through its mirror.
std::vector<Vec2> closed_polygon(const Surface& s) {
  std::vector<Vec2> poly = s.samples();
  if (s.kind() == SurfaceKind::profile_of_revolution)
    for (auto it = s.samples().rbegin(); it != s.samples().rend(); ++it) poly.emplace_back(it->x(), -it->y());
  return poly;
}

bool inside_polygon(const std::vector<Vec2>& poly, const Vec2& p) {
  bool in = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (p.x() < x) in = !in;
    }
  }
  return in;
}

// Periodic profiles are graphs r(x); linear interpolation between samples.
double periodic_radius(const Surface& s, double x) {
  const auto& p = s.samples();
  const double x0 = p.front().x(), period = s.period();
  const double xr = x0 + std::fmod(std::fmod(x - x0, period) + period, period);
  const auto n = static_cast<std::ptrdiff_t>(p.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const Vec2 a = s.extended(i), b = s.extended(i + 1);
    if (xr >= a.x() && xr <= b.x()) {
      const double t = (b.x() > a.x()) ? (xr - a.x()) / (b.x() - a.x()) : 0.0;
      return a.y() + t * (b.y() - a.y());
    }
  }
  return p.front().y();
}

class InsideTest {
 public:
  explicit InsideTest(const Surface& s) : s_(s), poly_(closed_polygon(s)) {}
  bool operator()(const Vec2& p) const {
    if (s_.kind() == SurfaceKind::profile_of_revolution && s_.ends() == ProfileEnds::periodic)
      return p.y() < periodic_radius(s_, p.x());
    return inside_polygon(poly_, p);
  }

 private:
  const Surface& s_;
  std::vector<Vec2> poly_;
};

// Solves a + s e + l f + s l g = p for the quadrilateral (a, b, c, d) with e = b - a,
// f = d - a, g = a - b + c - d.
bool invert_bilinear(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d, const Vec2& p, double& s, double& l) {
  const Vec2 e = b - a, f = d - a, g = a - b + c - d;
  s = 0.5;
  l = 0.5;
  for (int it = 0; it < 16; ++it) {
    const Vec2 r = a + s * e + l * f + s * l * g - p;
    const Vec2 js = e + l * g, jl = f + s * g;
    const double det = js.x() * jl.y() - js.y() * jl.x();
    if (!(std::abs(det) > 1e-300)) return false;
    const double ds = (r.x() * jl.y() - r.y() * jl.x()) / det;
    const double dl = (js.x() * r.y() - js.y() * r.x()) / det;
    s -= ds;
    l -= dl;
    if (std::abs(ds) + std::abs(dl) < 1e-14) return true;
  }
  return std::isfinite(s) && std::isfinite(l);
}

void rasterize(Lattice& m, const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d, double tau0, double tau1) {
  const double lox = std::min({a.x(), b.x(), c.x(), d.x()}), hix = std::max({a.x(), b.x(), c.x(), d.x()});
  const double loy = std::min({a.y(), b.y(), c.y(), d.y()}), hiy = std::max({a.y(), b.y(), c.y(), d.y()});
  const int i0 = std::max(0, static_cast<int>(std::ceil((lox - m.origin.x()) / m.hx)));
  const int i1 = std::min(m.nx - 1, static_cast<int>(std::floor((hix - m.origin.x()) / m.hx)));
  const int j0 = std::max(0, static_cast<int>(std::ceil((loy - m.origin.y()) / m.hy)));
  const int j1 = std::min(m.ny - 1, static_cast<int>(std::floor((hiy - m.origin.y()) / m.hy)));
  constexpr double slack = 1e-9;
  for (int j = j0; j <= j1; ++j) {
    for (int i = i0; i <= i1; ++i) {
      const std::size_t k = m.at(i, j);
      if (m.state[k] != m_pending) continue;
      double s = 0, l = 0;
      if (!invert_bilinear(a, b, c, d, m.point(i, j), s, l)) continue;
      if (s < -slack || s > 1 + slack || l < -slack || l > 1 + slack) continue;
      m.tau[k] = tau0 + std::clamp(l, 0.0, 1.0) * (tau1 - tau0);
      m.state[k] = m_swept;
    }
  }
}

std::pair<long, long> period_shifts(const Surface& s, double lo, double hi) {
  if (s.kind() != SurfaceKind::profile_of_revolution || s.ends() != ProfileEnds::periodic) return {0, 0};
  double a = s.samples().front().x(), b = a;
  for (const auto& p : s.samples()) {
    a = std::min(a, p.x());
    b = std::max(b, p.x());
  }
  return {static_cast<long>(std::floor((lo - b) / s.period())) - 1, static_cast<long>(std::ceil((hi - a) / s.period())) + 1};
}

void sweep_step(Lattice& m, const Surface& before, const Surface& after, double tau0, double tau1) {
  const auto n = static_cast<std::ptrdiff_t>(before.size());
  const bool capped = before.kind() == SurfaceKind::profile_of_revolution && before.ends() == ProfileEnds::capped;
  const std::ptrdiff_t first = capped ? -1 : 0;
  const auto [k0, k1] = period_shifts(before, m.origin.x(), m.origin.x() + m.hx * (m.nx - 1));
  for (long k = k0; k <= k1; ++k) {
    const Vec2 shift(k * before.period(), 0.0);
    for (std::ptrdiff_t i = first; i < n; ++i) {
      rasterize(m, before.extended(i) + shift, before.extended(i + 1) + shift, after.extended(i + 1) + shift,
                after.extended(i) + shift, tau0, tau1);
    }
  }
}

Surface prepare_front(const Surface& s, const ArrivalConfig& cfg) {
  const double spacing = cfg.surface_spacing * cfg.h;
  const auto count = std::max<std::size_t>(32, static_cast<std::size_t>(std::ceil(total_length(s) / spacing)));
  if (cfg.flow.graded) return graded_resample(s, count);
  return resample_arclength(s, count);
}

// Cubic interpolation in r with mirror symmetry about the axis; falls back to linear and then
// nearest values when the stencil touches cells without a time.
bool meridian_value(const Lattice& m, int i, double r, double& tau, unsigned char& state) {
  const double q = r / m.hy;
  const int j = static_cast<int>(std::floor(q));
  const double t = q - j;
  auto fetch = [&](int jj, double& v, unsigned char& st) {
    jj = std::abs(jj);
    if (jj >= m.ny) return false;
    const std::size_t k = m.at(i, jj);
    st = m.state[k];
    if (st != m_swept && st != m_extinct) return false;
    v = m.tau[k];
    return true;
  };
  double v[4];
  unsigned char st[4];
  bool ok[4];
  for (int a = 0; a < 4; ++a) ok[a] = fetch(j - 1 + a, v[a], st[a]);
  if (ok[0] && ok[1] && ok[2] && ok[3]) {
    const double w0 = -t * (t - 1) * (t - 2) / 6, w1 = (t + 1) * (t - 1) * (t - 2) / 2;
    const double w2 = -(t + 1) * t * (t - 2) / 2, w3 = (t + 1) * t * (t - 1) / 6;
    const double lo = std::min({v[0], v[1], v[2], v[3]}), hi = std::max({v[0], v[1], v[2], v[3]});
    tau = std::clamp(w0 * v[0] + w1 * v[1] + w2 * v[2] + w3 * v[3], lo, hi);
    const bool all_ext = st[0] == m_extinct && st[1] == m_extinct && st[2] == m_extinct && st[3] == m_extinct;
    state = all_ext ? m_extinct : m_swept;
    return true;
  }
  if (ok[1] && ok[2]) {
    tau = (1 - t) * v[1] + t * v[2];
    state = (st[1] == m_extinct && st[2] == m_extinct) ? m_extinct : m_swept;
    return true;
  }
  const int near = t < 0.5 ? 1 : 2;
  if (ok[near]) {
    tau = v[near];
    state = st[near];
    return true;
  }
  const int jj = std::min(std::abs(j - 1 + near), m.ny - 1);
  state = m.state[m.at(i, jj)];
  return false;
}

}  // namespace

ArrivalField compute_arrival(const Surface& initial, const ArrivalConfig& cfg) {
  if (initial.kind() == SurfaceKind::levelset_isosurface) throw DomainError("compute_arrival needs a curve or profile");
  const bool profile = initial.kind() == SurfaceKind::profile_of_revolution;
  if (profile && initial.n() != 2) throw DomainError("profile arrival fields are limited to R^3");
  if (!(cfg.h > 0)) throw DomainError("grid spacing must be positive");
  const int dim = profile ? 3 : 2;

  VecX lo = cfg.box_min, hi = cfg.box_max;
  if (lo.size() == 0 || hi.size() == 0) {
    if (profile && initial.ends() == ProfileEnds::periodic) throw DomainError("periodic profiles need an explicit box");
    Vec2 a = initial.samples().front(), b = a;
    for (const auto& p : initial.samples()) {
      a = a.cwiseMin(p);
      b = b.cwiseMax(p);
    }
    lo = VecX(dim);
    hi = VecX(dim);
    // Snapped to multiples of h so the coordinate origin is a grid node.
    auto down = [&](double v) { return std::floor(v / cfg.h - 2) * cfg.h; };
    auto up = [&](double v) { return std::ceil(v / cfg.h + 2) * cfg.h; };
    lo[0] = down(a.x());
    hi[0] = up(b.x());
    for (int d = 1; d < dim; ++d) {
      lo[d] = down(profile ? -b.y() : a.y());
      hi[d] = up(b.y());
    }
  }
  if (lo.size() != dim || hi.size() != dim) throw DomainError("grid box has the wrong dimension");
  ArrivalField field(lo, cfg.h, grid_shape(lo, hi, cfg.h));

  Lattice m;
  if (profile) {
    double rmax = 0;
    for (int d = 1; d < dim; ++d) rmax += std::max(lo[d] * lo[d], hi[d] * hi[d]);
    rmax = std::sqrt(rmax);
    m.origin = Vec2(lo[0], 0.0);
    m.hx = cfg.h;
    m.hy = cfg.h / std::max(1, cfg.meridian_refine);
    m.nx = field.shape()[0];
    m.ny = static_cast<int>(std::ceil(rmax / m.hy)) + 3;
  } else {
    m.origin = Vec2(lo[0], lo[1]);
    m.hx = m.hy = cfg.h;
    m.nx = field.shape()[0];
    m.ny = field.shape()[1];
  }
  m.tau.assign(static_cast<std::size_t>(m.nx) * static_cast<std::size_t>(m.ny), std::numeric_limits<double>::quiet_NaN());
  m.state.assign(m.tau.size(), m_outside);

  const Surface front = prepare_front(initial, cfg);
  {
    const InsideTest inside(front);
    for (int j = 0; j < m.ny; ++j)
      for (int i = 0; i < m.nx; ++i)
        if (inside(m.point(i, j))) m.state[m.at(i, j)] = m_pending;
  }

  FlowOptions flow = cfg.flow;
  flow.stop_size = std::max(flow.stop_size, cfg.stop_size * cfg.h);
  if (flow.coarsen_spacing <= 0) {
    flow.coarsen_spacing = cfg.surface_spacing * cfg.h;
    flow.coarsen_length = total_length(front);
  }
  const McfRun run = run_mcf(front, 0.0, std::numeric_limits<double>::max(), flow,
                             [&](double t0, const Surface& b, double t1, const Surface& a) { sweep_step(m, b, a, t0, t1); });

  ArrivalStats stats;
  stats.steps = run.steps;
  stats.termination = run.termination;
  double T = run.tau;
  Vec2 pinch = run.singular_point;
  try {
    const PinchEstimate est = estimate_pinch(run);
    T = std::max(T, est.time);
    pinch = est.point;
  } catch (const DomainError&) {
  }
  for (std::size_t k = 0; k < m.tau.size(); ++k)
    if (m.state[k] == m_swept) T = std::max(T, m.tau[k]);

  // Extinction set: unswept cells next to the pinch point.
  const double ext2 = std::pow(cfg.extinction_radius * cfg.h, 2);
  const InsideTest final_inside(run.final);
  std::size_t extinct = 0;
  for (int j = 0; j < m.ny; ++j) {
    for (int i = 0; i < m.nx; ++i) {
      const std::size_t k = m.at(i, j);
      if (m.state[k] != m_pending) continue;
      const Vec2 x = m.point(i, j);
      if ((x - pinch).squaredNorm() <= ext2) {
        m.state[k] = m_extinct;
        m.tau[k] = T;
        ++extinct;
      }
    }
  }
  if (extinct == 0) {
    // The sweep reached every cell; the latest crossings become the extinction set.
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < m.tau.size(); ++k)
      if (m.state[k] == m_swept) top = std::max(top, m.tau[k]);
    T = top;
    for (std::size_t k = 0; k < m.tau.size(); ++k)
      if (m.state[k] == m_swept && m.tau[k] == top) m.state[k] = m_extinct;
  }
  // Cells the front passed without a recorded crossing (seams between resampled fronts).
  for (int j = 0; j < m.ny; ++j) {
    for (int i = 0; i < m.nx; ++i) {
      const std::size_t k = m.at(i, j);
      if (m.state[k] != m_pending || final_inside(m.point(i, j))) continue;
      double sum = 0;
      int cnt = 0;
      for (auto [di, dj] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
        const int ii = i + di, jj = j + dj;
        if (ii < 0 || jj < 0 || ii >= m.nx || jj >= m.ny) continue;
        if (m.state[m.at(ii, jj)] == m_swept) {
          sum += m.tau[m.at(ii, jj)];
          ++cnt;
        }
      }
      if (cnt > 0) {
        m.tau[k] = sum / cnt;
        m.state[k] = m_swept;
        ++stats.orphans;
      }
    }
  }

  std::vector<unsigned char> unswept(field.size(), 0);
  for (std::size_t idx = 0; idx < field.size(); ++idx) {
    const VecX x = field.point(idx);
    double tau = 0;
    unsigned char st = m_outside;
    bool ok = false;
    const auto c = field.cell(idx);
    if (profile) {
      const double r = std::hypot(x[1], x[2]);
      ok = meridian_value(m, c[0], r, tau, st);
    } else {
      const std::size_t k = m.at(c[0], c[1]);
      st = m.state[k];
      tau = m.tau[k];
      ok = st == m_swept || st == m_extinct;
    }
    if (ok) {
      field.set(idx, st == m_extinct ? 0.0 : std::min(tau - T, 0.0), st == m_extinct ? CellState::extinct : CellState::swept);
    } else if (st == m_pending) {
      unswept[idx] = 1;
      ++stats.unswept;
    }
  }
  stats.extinction_time = T;
  stats.extinction_point = VecX::Zero(dim);
  stats.extinction_point[0] = pinch.x();
  if (!profile) stats.extinction_point[1] = pinch.y();
  field.stats = stats;
  if (stats.unswept > 0 && !cfg.allow_partial)
    throw PartialFieldError("flow stopped with " + std::to_string(stats.unswept) + " unswept cells", std::move(unswept));
  return field;
}

}  // namespace mcf
