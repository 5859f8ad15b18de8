#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "mcflab/common.hpp"

namespace mcf {

enum class SurfaceKind { plane_curve, profile_of_revolution, levelset_isosurface };
enum class ProfileEnds { capped, periodic };

/// A discretized hypersurface M^n in R^{n+1}.
///
/// * plane_curve: closed polygon in R^2 (n = 1), stored counter-clockwise.
/// * profile_of_revolution: meridian curve (x, r), r > 0, rotated about the x axis
///   through S^{n-1}. Samples run left to right over the top of the body. Capped
///   profiles close on the axis through mirror ghosts; periodic profiles repeat
///   with the stored period.
/// * levelset_isosurface: point samples with normals, mean curvature and area
///   weights extracted from an implicit function.
class Surface {
 public:
  Surface() = default;

  static Surface plane_curve(std::vector<Vec2> points);
  static Surface profile(int n, std::vector<Vec2> meridian, ProfileEnds ends, double period = 0.0);
  static Surface levelset(int ambient_dim, std::vector<VecX> points, std::vector<VecX> normals,
                          std::vector<double> mean_curvature, std::vector<double> area_weights);

  SurfaceKind kind() const { return kind_; }
  /// Intrinsic dimension n.
  int n() const { return n_; }
  int ambient_dim() const { return n_ + 1; }
  std::size_t size() const;

  /// Planar (plane curve) or meridian (x, r) samples. Empty for level sets.
  const std::vector<Vec2>& samples() const { return samples_; }
  ProfileEnds ends() const { return ends_; }
  double period() const { return period_; }

  /// Sample i with ghost continuation: wraps for closed/periodic curves, mirrors
  /// across the axis for capped profiles. Valid for i in [-size, 2 size).
  Vec2 extended(std::ptrdiff_t i) const;

  bool mean_convex_flag() const { return mean_convex_; }
  /// Marks the surface mean convex; throws DomainError if some sample has H <= 0.
  Surface& require_mean_convex();

  // Level-set payload.
  const std::vector<VecX>& points() const { return points_; }
  const std::vector<VecX>& normals() const { return normals_; }
  const std::vector<double>& stored_curvature() const { return stored_h_; }
  const std::vector<double>& area_weights() const { return weights_; }

  /// Samples replaced, everything else kept (used by the flow steppers).
  Surface with_samples(std::vector<Vec2> samples) const;

 private:
  SurfaceKind kind_ = SurfaceKind::plane_curve;
  int n_ = 1;
  std::vector<Vec2> samples_;
  ProfileEnds ends_ = ProfileEnds::capped;
  double period_ = 0.0;
  bool mean_convex_ = false;

  std::vector<VecX> points_;
  std::vector<VecX> normals_;
  std::vector<double> stored_h_;
  std::vector<double> weights_;
};

/// Local differential data of a curve sample.
struct CurveFrame {
  Vec2 normal;       // outward unit normal in the curve's plane
  Vec2 tangent;      // unit tangent in sample order
  double kappa = 0;  // planar curvature, > 0 where convex
  double H = 0;      // mean curvature of the hypersurface
  double spacing_minus = 0;
  double spacing_plus = 0;
};

CurveFrame curve_frame(const Surface& surface, std::size_t index);
std::vector<CurveFrame> curve_frames(const Surface& surface);

/// Mean curvature at a sample; H = n / R on round spheres with outward normal.
double mean_curvature(const Surface& surface, std::size_t index);

struct ShrinkerResidual {
  std::vector<double> phi;  // H - <x, n> / 2
  double max_abs = 0;
};

/// phi = H - <x, n>/2 per sample.
ShrinkerResidual shrinker_residual(const Surface& surface);
/// The per-sample formula shared by shrinker_residual and the rescaled stepper.
inline double shrinker_speed(const Vec2& x, const CurveFrame& f) { return f.H - 0.5 * x.dot(f.normal); }

/// Settings for Gaussian-weighted integrals over surfaces.
struct GaussianQuadrature {
  double truncation_radius = 12.0;
  int nodes_per_segment = 6;
  int angular_resolution = 16;
};

struct GaussianArea {
  double value = 0;
  double tail_bound = 0;  // e^{-R^2/4} times the discarded area
  double discarded_area = 0;
  bool tail_warning = false;
};

/// F(Sigma) = int_Sigma exp(-|x|^2/4).
GaussianArea gaussian_area(const Surface& surface, const GaussianQuadrature& quad = {});

/// Integral of g(p, normal) exp(-|x|^2/4) over the surface, where p and normal are the planar
/// (or meridian) node and its outward normal. For profiles g must be rotation invariant.
double gaussian_integral(const Surface& surface,
                         const std::function<double(const Vec2&, const Vec2&)>& g,
                         const GaussianQuadrature& quad = {});

/// A sample of the surface in ambient coordinates, with its area weight.
struct AmbientSample {
  VecX x;
  VecX normal;
  double H = 0;
  double area = 0;
  std::size_t source = 0;  // index of the generating curve sample
};

/// Expands profiles through the S^{n-1} rotation; plane curves and level sets map directly.
/// With tile_radius > 0, periodic profiles are repeated to cover the ball of that radius and
/// only samples inside it are kept.
std::vector<AmbientSample> ambient_samples(const Surface& surface, int angular_resolution = 8,
                                           double tile_radius = 0.0);

/// Uniform-arclength resampling by cubic (Catmull-Rom, chord parametrized) interpolation.
Surface resample_arclength(const Surface& surface, std::size_t count);
/// Resampling uniform in the weighted length int density ds (density evaluated on the
/// planar or meridian point).
Surface resample_density(const Surface& surface, std::size_t count,
                         const std::function<double(const Vec2&)>& density);

double total_length(const Surface& surface);
double min_spacing(const Surface& surface);
double max_spacing(const Surface& surface);

// Analytic constructors.
Surface make_circle(double radius, std::size_t count, Vec2 center = Vec2::Zero());
Surface make_ellipse(double a, double b, std::size_t count);
/// Round S^n of the given radius centred at the origin as a capped profile.
Surface make_sphere(int n, double radius, std::size_t count);
/// Periodic profile r(x) = radius_fn(x) on [x0, x0 + period).
Surface make_periodic_profile(int n, const std::function<double(double)>& radius_fn, double x0,
                              double period, std::size_t count);
/// Capped profile from a polar description rho(theta) of the meridian, theta in (0, pi).
Surface make_capped_polar(int n, const std::function<double(double)>& rho, std::size_t count);

/// Two round bulbs centred at x = -+bulb_center joined by a straight neck of radius
/// neck_radius; concave fillets of radius fillet_radius blend bulbs and neck.
Surface make_dumbbell(int n, double bulb_radius, double bulb_center, double neck_radius, double fillet_radius,
                      std::size_t count);

/// Level-set samples of {phi = level} on a uniform grid (ambient dimension 2 or 3).
/// Normal is grad(phi)/|grad phi|, so phi must increase outward.
Surface make_levelset(int ambient_dim, const std::function<double(const VecX&)>& phi, double level,
                      const VecX& box_min, const VecX& box_max, double h);

// CSV exchange: header "x0,x1" for plane curves, "x,r" for profiles.
void write_surface_csv(std::ostream& out, const Surface& surface);
/// Profiles need n and end conditions; plane curves ignore them.
Surface read_surface_csv(std::istream& in, int n = 1, ProfileEnds ends = ProfileEnds::capped,
                         double period = 0.0);

}  // namespace mcf
