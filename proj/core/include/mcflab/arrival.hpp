#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "mcflab/common.hpp"
#include "mcflab/geometry.hpp"
#include "mcflab/mcf.hpp"

namespace mcf {

enum class CellState : unsigned char { outside = 0, swept = 1, extinct = 2 };

/// Bookkeeping from the sweep that produced a field.
struct ArrivalStats {
  double extinction_time = 0;  // tau subtracted during normalization
  VecX extinction_point;
  std::size_t steps = 0;
  std::size_t orphans = 0;   // cells filled from neighbours because no crossing was recorded
  std::size_t unswept = 0;   // cells inside the initial surface left out of the domain
  std::string termination;
};

/// Arrival time u on a uniform grid in R^2 or R^3 with a domain mask.
class ArrivalField {
 public:
  ArrivalField() = default;
  ArrivalField(VecX origin, double h, std::vector<int> shape);

  int dim() const { return static_cast<int>(shape_.size()); }
  double h() const { return h_; }
  const VecX& origin() const { return origin_; }
  const std::vector<int>& shape() const { return shape_; }
  std::size_t size() const { return values_.size(); }

  std::size_t index(const std::array<int, 3>& cell) const;
  std::array<int, 3> cell(std::size_t index) const;
  VecX point(std::size_t index) const;
  /// Neighbour along `axis` at `offset` cells; npos off the grid.
  std::size_t neighbor(std::size_t index, int axis, int offset) const;
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  double value(std::size_t i) const { return values_[i]; }
  CellState state(std::size_t i) const { return static_cast<CellState>(mask_[i]); }
  bool in_domain(std::size_t i) const { return i != npos && mask_[i] != 0; }
  void set(std::size_t i, double u, CellState s) {
    values_[i] = u;
    mask_[i] = static_cast<unsigned char>(s);
  }
  const std::vector<double>& values() const { return values_; }
  const std::vector<unsigned char>& mask() const { return mask_; }

  /// True when every cell of the 3^dim block around `index` lies in the domain.
  bool has_stencil(std::size_t index) const;
  /// Central differences; BoundaryError when the stencil leaves the domain.
  VecX gradient(std::size_t index) const;
  MatX hessian(std::size_t index) const;

  ArrivalStats stats;

 private:
  VecX origin_;
  double h_ = 0;
  std::vector<int> shape_;
  std::array<std::size_t, 3> stride_{};
  std::vector<double> values_;
  std::vector<unsigned char> mask_;
};

struct ArrivalConfig {
  double h = 1.0 / 64;
  /// Empty: bounding box of the initial surface padded by two cells, snapped to multiples of h.
  VecX box_min, box_max;
  /// Initial sample spacing of the front, in cells.
  double surface_spacing = 1.0;
  /// Profiles are swept on a meridian grid refined by this factor in r.
  int meridian_refine = 2;
  FlowOptions flow;
  /// Stop once the size proxy (radius or neck radius) falls below this many cells.
  double stop_size = 0.25;
  /// Unswept cells within this many cells of the pinch point form the extinction set.
  double extinction_radius = 1.5;
  /// Otherwise unswept cells raise PartialFieldError.
  bool allow_partial = false;
};

/// Sweeps the grid with the MCF of `initial` and records first crossing times by bilinear
/// inversion of the quadrilaterals swept by consecutive sample pairs. Normalized so that
/// sup u = 0, attained on the extinction set.
ArrivalField compute_arrival(const Surface& initial, const ArrivalConfig& cfg);

/// Field sampled from a closed form; `inside` selects the domain (all cells when empty).
ArrivalField sample_field(const VecX& box_min, const VecX& box_max, double h,
                          const std::function<double(const VecX&)>& u,
                          const std::function<bool(const VecX&)>& inside = {});

struct ResidualReport {
  std::vector<double> residual;  // NaN where not evaluable
  double max_abs = 0;
  double l2 = 0;                 // root mean square over evaluable cells
  std::size_t evaluated = 0;
};

/// r = 1 + |grad u| div(grad u / |grad u|) where |grad u| exceeds the floor (default 10 h).
ResidualReport pde_residual(const ArrivalField& field, double gradient_floor = std::numeric_limits<double>::quiet_NaN());

struct RatioOptions {
  /// Ball in which cells are used; empty center means the whole domain.
  VecX center;
  double radius = std::numeric_limits<double>::infinity();
  /// Critical value u(z); the ratio uses u(z) - u.
  double critical_value = 0.0;
  int bins = 40;
  /// Tail: cells with u(z) - u below this fraction of the largest value in range.
  double tail_fraction = 0.1;
  /// Cells closer than this many h to the center are excluded from the tail (stencil noise).
  double resolution_cells = 4.0;
};

struct RatioBin {
  double lo = 0, hi = 0;
  double mean = 0, min = 0, max = 0;
  std::size_t count = 0;
};

struct RatioCurve {
  std::vector<RatioBin> bins;
  double limit = std::numeric_limits<double>::quiet_NaN();
  double tail_min = 0, tail_max = 0;
  std::size_t tail_count = 0;
  double implied_k = std::numeric_limits<double>::quiet_NaN();  // n - 2 / limit
  std::vector<std::string> warnings;
};

/// Binned |grad u|^2 / (u(z) - u) against u(z) - u.
RatioCurve lojasiewicz_ratio(const ArrivalField& field, const RatioOptions& opts = {});

struct CriticalPoint {
  std::size_t index = 0;
  VecX x;
  double u = 0;
  double grad_norm = 0;
  VecX eigenvalues;   // ascending
  MatX eigenvectors;
  double laplacian = 0;
  int k = 0;          // kernel dimension
  MatX kernel;        // kernel eigenvectors (axis estimate)
  double eigen_spread = 0;   // max - min of the nonzero eigenvalues
  bool value_clusters = false;  // |u| <= 3 h max|grad u|
};

struct CriticalReport {
  std::vector<CriticalPoint> points;
  std::vector<std::vector<std::size_t>> components;  // indices into points
  int k = -1;
  bool mixed_type = false;
  double max_grad = 0;
  double two_sided_C = std::numeric_limits<double>::quiet_NaN();
  /// Hessian and Laplacian predicted for the detected type.
  double target_eigenvalue = std::numeric_limits<double>::quiet_NaN();
  double target_laplacian = std::numeric_limits<double>::quiet_NaN();
};

struct CriticalOptions {
  /// Cells with |grad u| below this are critical (default h / 2).
  double gradient_tol = std::numeric_limits<double>::quiet_NaN();
  /// Kernel threshold relative to the typical nonzero eigenvalue.
  double kernel_ratio = 0.2;
};

CriticalReport critical_analysis(const ArrivalField& field, const CriticalOptions& opts = {});

struct ExponentFit {
  double p = 0;
  double constant = 0;  // a ~ constant * b^p
  double stderr_p = 0;
  double ci_low = 0, ci_high = 0;  // 95% interval
  std::size_t count = 0;
  double decades = 0;
};

/// Least-squares fit of log a = log C + p log b. Needs at least 20 pairs and two decades in b.
ExponentFit exponent_fit(const std::vector<std::pair<double, double>>& pairs);

/// Pairs (|u - u(z)|, |grad u|) from the domain cells inside a ball.
std::vector<std::pair<double, double>> gradient_pairs(const ArrivalField& field, const RatioOptions& opts = {});

// Flat binary of doubles plus a JSON sidecar with shape, spacing, origin and a run-length mask.
void write_field(const std::string& base_path, const ArrivalField& field);
ArrivalField read_field(const std::string& base_path);

}  // namespace mcf
