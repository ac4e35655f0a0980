#pragma once

#include "hwave/propagator.hpp"
#include "hwave/semilinear.hpp"
#include "hwave/transform.hpp"

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <vector>

namespace hwave::fd {

class GridTooSmallError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class CflViolationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Second-order centered stencil of the sub-Laplacian on H^1 in expanded form
///   L = d_xx + d_yy + ((x^2 + y^2) / 4) d_tt + (x d_y - y d_x) d_t
/// on an endpoint-inclusive box (SpatialGrid::heisenberg with n = 1). Values
/// beyond the box are zero (Dirichlet truncation).
class StencilOperator {
 public:
  /// Throws GridTooSmallError unless every axis has at least 5 points.
  explicit StencilOperator(SpatialGrid grid);
  /// Operator that maps everything to zero (free-motion test hook).
  static StencilOperator zero(SpatialGrid grid);

  const SpatialGrid& grid() const { return grid_; }
  bool is_zero() const { return zero_; }

  SpatialField apply(const SpatialField& f) const;
  void apply(const complex* in, complex* out) const;

  /// Gershgorin bound on the spectral radius of -L_h.
  double spectral_radius_bound() const;
  /// Dense matrix of L_h (small grids only; throws above 4096 points).
  Eigen::MatrixXd assemble() const;

  /// Flat indices at least `margin` nodes away from every face.
  std::vector<std::size_t> interior(int margin) const;

 private:
  StencilOperator(SpatialGrid grid, bool zero);
  SpatialGrid grid_;
  bool zero_ = false;
};

SpatialField apply_subLaplacian(const SpatialField& f);

/// Leapfrog for u'' + b u' + m u = L u + s with time-centered damping:
///   u+ = [2u - (1 - b dt/2) u- + dt^2 (L u - m u + s)] / (1 + b dt/2).
struct LeapfrogParams {
  double dt = 0.0;
  double b = 0.0;
  double m = 0.0;
  /// Fraction of the stability limit that dt may use.
  double cfl = 0.9;
};

/// Largest stable step: 2 / sqrt(rho(-L_h) + m) with the Gershgorin bound,
/// which is attained at the box corner where (x^2 + y^2) / 4 is largest.
double stable_time_step(const StencilOperator& op, double m);

/// One step. Throws CflViolationError when dt exceeds cfl * stable_time_step.
SpatialField step_leapfrog(const StencilOperator& op, const SpatialField& prev, const SpatialField& curr,
                           const LeapfrogParams& params, const SpatialField* source = nullptr);

/// Staggered discrete energy at t_{n+1/2}:
///   ||(u+ - u)/dt||^2 + Re<-L_h u+, u> + m Re<u+, u>   (cell-volume weighted),
/// which is conserved for b = 0 and decreases at every step for b > 0.
double discrete_energy(const StencilOperator& op, const SpatialField& curr, const SpatialField& next,
                       double dt, double m);

using SourceFn = std::function<SpatialField(double t)>;

struct FdRun {
  std::vector<double> times;              // sample times actually hit
  std::vector<SpatialField> snapshots;    // u at the sample times
  std::vector<double> energy;             // per step (staggered)
  double dt = 0.0;
  std::size_t steps = 0;
  double boundary_ratio = 0.0;            // worst boundary ratio seen at samples
};

/// Integrates from (u0, u1) to the last sample time with the largest step
/// not above dt that lands on every sample time. The first step uses the
/// second-order Taylor start u^1 = u0 + dt u1 + dt^2 / 2 (L u0 - m u0 - b u1 + s(0)).
FdRun run_leapfrog(const StencilOperator& op, const SpatialField& u0, const SpatialField& u1, double b, double m,
                   const std::vector<double>& sample_times, double dt, const SourceFn& source = nullptr);

struct ComparisonReport {
  std::vector<double> times;
  std::vector<double> discrepancy;  // relative L2 on the interior nodes
  double max_discrepancy = 0.0;
  bool passed = false;
};

/// Relative L2 discrepancy ||a - b|| / ||b|| (b the spectral field) on nodes
/// at least `margin` away from the faces.
ComparisonReport compare_with_spectral(const std::vector<SpatialField>& spectral, const FdRun& run,
                                       double tolerance = 1e-2, int margin = 2);

/// Manufactured solution u = cos(omega t) exp(-alpha((x - x0)^2 + y^2) - beta t^2)
/// with its exact source; the shift x0 keeps the mixed terms active.
struct ManufacturedSolution {
  double omega = 1.3;
  double alpha = 1.0;
  double beta = 0.5;
  double x0 = 0.5;
  double b = 1.0;
  double m = 1.0;

  complex value(double x, double y, double tau, double t) const;
  complex source(double x, double y, double tau, double t) const;
  SpatialField sample_value(const SpatialGrid& g, double t) const;
  SpatialField sample_velocity(const SpatialGrid& g, double t) const;
  SpatialField sample_source(const SpatialGrid& g, double t) const;
};

struct OrderStudy {
  std::vector<int> points;          // per axis
  std::vector<double> spacing;      // h_x
  std::vector<double> errors;       // relative L2 at T
  double order = 0.0;               // regression slope of log error on log h
};

/// Runs the manufactured problem on cubic boxes [-R, R]^3 with the given
/// point counts and dt proportional to h.
OrderStudy manufactured_order_study(const ManufacturedSolution& ms, double half_width,
                                    const std::vector<int>& points, double T, double courant = 0.2);

struct ResidualReport {
  std::vector<double> times;
  std::vector<double> relative;  // ||res|| / (sum of term norms)
  double max_relative = 0.0;
};

/// Residual of u_tt - L u + b u_t + m u - f(u) for a spectral trajectory on a
/// uniform time grid, synthesized by `transform` (whose spatial grid is the
/// stencil grid). u_tt is the fourth-order centered difference of the
/// synthesized u_t; L u uses the stencil. Evaluated at the given sample
/// indices (each needs two neighbours on both sides).
ResidualReport semilinear_residual(const Trajectory& trajectory, const Nonlinearity& nl, double b, double m,
                                   const SpectralTransform& transform, const std::vector<std::size_t>& indices,
                                   int margin = 2);

}  // namespace hwave::fd
