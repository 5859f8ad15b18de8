#pragma once

#include <functional>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "mcflab/common.hpp"
#include "mcflab/cylinder.hpp"
#include "mcflab/geometry.hpp"

namespace mcf {

/// Explicit-Euler stability bound 0.4 h^2 / (max|H| h + 1) with h the smallest spacing.
double cfl_bound(const Surface& surface);

struct StepOptions {
  double time = 0;                    // flow time of the input, carried into singularity signals
  double singularity_threshold = 0.5; // stop when |H| h exceeds this at some sample
  bool enforce_cfl = true;
};

/// One explicit step of dx/dtau = -H n.
Surface step_mcf(const Surface& surface, double dt, const StepOptions& opts = {});
/// One explicit step of dx/dt = -(H - <x, n>/2) n.
Surface step_rescaled(const Surface& surface, double dt, const StepOptions& opts = {});

struct FlowOptions {
  double dt_max = 1e-2;
  double cfl_safety = 1.0;            // fraction of cfl_bound actually used
  double resample_ratio = 1.5;        // resample when max/min spacing exceeds this
  double singularity_threshold = 0.5;
  /// Profiles: resample with density 1/r (floored near the tips of capped profiles) so a neck
  /// keeps resolution as it pinches.
  bool graded = false;
  /// When positive, a shrinking surface is resampled with fewer samples once its mean spacing
  /// falls below half this value (never below 32 samples).
  double coarsen_spacing = 0.0;
  /// When positive, the coarsening target shrinks like sqrt(length / coarsen_length) so the
  /// accumulated time-stepping error stays second order all the way to extinction.
  double coarsen_length = 0.0;
  /// run_mcf stops once the size proxy falls below this fraction of its initial value.
  double stop_fraction = 0.0;
  /// Absolute version of stop_fraction; the larger threshold wins.
  double stop_size = 0.0;
};

/// Profile resampled with density 1/r (floored near the tips of capped profiles); other surfaces
/// fall back to arclength resampling.
Surface graded_resample(const Surface& surface, std::size_t count);

/// Result of an unscaled MCF run.
struct McfRun {
  Surface final;
  double tau = 0;
  std::size_t steps = 0;
  std::string termination;            // "t_end", "singularity" or "size"
  Vec2 singular_point = Vec2::Zero();
  std::vector<double> history_tau;    // per step
  std::vector<double> history_min_r;  // smallest |x - axis| (profiles) or inradius proxy (curves)
};

/// Called after every explicit step with the surface before and after the update (the latter
/// before any resampling), so callers can interpolate crossings between matching samples.
using StepObserver = std::function<void(double tau0, const Surface& before, double tau1, const Surface& after)>;

McfRun run_mcf(const Surface& initial, double tau_start, double tau_end, const FlowOptions& opts = {},
               const StepObserver& observer = {});

/// Pinch (extinction or neckpinch) time and point estimated from the end of an MCF run by a
/// linear fit of min_r^2 against tau. The run stops at stop_fraction (default 2e-3) of the
/// initial size or earlier at the singularity threshold; round spheres keep |H| h constant and
/// only ever meet the size stop.
struct PinchEstimate {
  double time = 0;
  Vec2 point = Vec2::Zero();
  double fit_slope = 0;  // d(min_r^2)/dtau, about -2(n-k)
};
PinchEstimate detect_pinch(const Surface& initial, double tau_start, const FlowOptions& opts = {});
/// The same fit applied to a finished run; DomainError if the run ended at tau_end.
PinchEstimate estimate_pinch(const McfRun& run);

/// Meridian-plane gradient of H at the samples of one time step that lie in B_{2n}.
struct GradientStep {
  double t = 0;
  std::vector<Vec2> grad;
};

struct TraceRow {
  int j = 0;
  double t = 0;  // actual time of the snapshot (the step nearest to j)
  double F = 0;
  double delta = std::numeric_limits<double>::quiet_NaN();
  bool delta_clamped = false;
  double A = std::numeric_limits<double>::quiet_NaN();
  double projection_jump = std::numeric_limits<double>::quiet_NaN();  // |Pi_j - Pi_{j+1}|
  double displacement = std::numeric_limits<double>::quiet_NaN();     // int_j^{j+1} |phi|_{L2} dt
  bool has_cylinder = false;
  ShrinkerCylinder cylinder;
  GraphNorms norms;
  double measured_radius = std::numeric_limits<double>::quiet_NaN();
  double graphical_radius = std::numeric_limits<double>::quiet_NaN();
  double max_radius = 0;  // largest |x| over the samples
};

struct RescaledFlowTrace {
  int n = 1;
  int k = 0;
  std::vector<TraceRow> rows;
  std::vector<Surface> snapshots;                  // Sigma_j
  std::vector<std::vector<GradientStep>> intervals;  // steps inside [j, j+1]
  std::size_t accepted_steps = 0;
  std::size_t clamp_count = 0;
  std::size_t fit_unavailable = 0;  // rows where no sample was left inside the graph ball
  double max_area_increase = 0;  // largest F(step + 1) - F(step)
  double t_final = 0;
  std::string termination;       // "t_end", "singularity", "graph_failure"
  std::string mode;
  PinchEstimate pinch;
};

struct RescaledConfig {
  int k = 0;
  /// "direct" integrates the rescaled equation; "mcf_rescaling" runs MCF and rescales about
  /// the detected pinch point.
  std::string mode = "direct";
  FlowOptions flow;
  CylinderFitOptions fit;
  GaussianQuadrature quad;
  bool fit_cylinders = true;
  /// Pinch data for mcf_rescaling; NaN means detect.
  double pinch_time = std::numeric_limits<double>::quiet_NaN();
  double pinch_x = std::numeric_limits<double>::quiet_NaN();
  int rotation_resolution = 8;  // omega samples for the sup over rotations
};

RescaledFlowTrace run_rescaled(const Surface& initial, double t_end, const RescaledConfig& cfg = {});

/// A_j = int_j^{j+1} sup_{B_{2n} cap Sigma_t} |Pi_{j+1} grad H| dt (trapezoid in t).
double axis_grad_H(const RescaledFlowTrace& trace, int j, int rotation_resolution = 8);

/// Gaussian-weighted sum of f^2 over curve samples (trapezoid in arclength).
double gaussian_l2_squared(const Surface& surface, const std::vector<double>& values);

/// Rescaled normal speed phi = H - <x, n>/2 per sample (same code path as shrinker_residual).
std::vector<double> rescaled_speed(const Surface& surface);

void write_trace_csv(std::ostream& out, const RescaledFlowTrace& trace);
/// JSON summary (termination reason, counts, per-row values).
std::string trace_json(const RescaledFlowTrace& trace);

}  // namespace mcf
