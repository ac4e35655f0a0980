#pragma once

#include "hwave/spectral.hpp"

#include <optional>
#include <string>
#include <vector>

namespace hwave {

enum class Regime { Underdamped, Critical, Overdamped };

std::string to_string(Regime r);

/// Per-mode data of u'' + b u' + (omega2 + m) u = 0.
struct DampedModeParams {
  double b = 0.0;
  double m = 0.0;
  double omega2 = 0.0;
  double total = 0.0;  // omega2 + m
  Regime regime = Regime::Underdamped;
  double a_or_c = 0.0;  // sqrt(|total - b^2/4|); 0 when critical
};

struct ModeState {
  complex value;
  complex derivative;
};

/// Default critical band: |b^2 - 4 total| <= 1e-8 max(b^2, 4 total).
double default_boundary_tolerance(double b, double total);

/// Trichotomy on b^2 vs 4 total. A negative boundary_tol selects the default.
Regime classify_regime(double b, double total, double boundary_tol = -1.0);

DampedModeParams make_mode_params(double b, double m, double omega2, double boundary_tol = -1.0);

/// Propagator coefficients at time t: value = c00 u0 + c01 u1,
/// derivative = c10 u0 + c11 u1.
struct PropagatorCoefficients {
  double c00, c01, c10, c11;
};

/// Exact solution operator of the damped oscillator. Near the critical
/// boundary (|total - b^2/4| t^2 small) the even/odd entire series for
/// cos(at), sin(at)/a (resp. cosh, sinh) is used, so the critical case is
/// just the D = 0 member of the same family.
PropagatorCoefficients propagator_coefficients(double b, double total, double t);

/// Throws for t < 0.
ModeState propagate_mode(const DampedModeParams& params, complex u0, complex u1, double t);

/// K[g](t): zero displacement, initial velocity g.
ModeState duhamel_kernel(const DampedModeParams& params, complex g, double t);

/// delta0 = b/2 - sqrt(max(0, b^2/4 - m)), the slowest rate over all modes.
double decay_rate(double b, double m);

/// Exponential rate of a single mode, b/2 - sqrt(max(0, b^2/4 - total)).
double mode_decay_rate(double b, double total);

/// Values and time derivatives of a field at sample times.
struct Trajectory {
  std::vector<double> times;
  std::vector<SpectralField> values;
  std::vector<SpectralField> derivatives;

  std::size_t size() const { return times.size(); }
  bool empty() const { return times.empty(); }
};

/// Mode-wise exact evolution of (field0, field1). Throws on grid mismatch
/// or negative / unsorted times.
Trajectory evolve_linear(const SpectralField& field0, const SpectralField& field1, double b,
                         double m, const SymbolProvider& provider, const std::vector<double>& times);

/// Least-squares slope of log(values) against times over the trailing
/// fraction of the samples.
double fit_log_slope(const std::vector<double>& times, const std::vector<double>& values,
                     double tail_fraction);

struct DecayOptions {
  double tail_fraction = 0.6;
  /// Relative slack on delta0: passes iff slope <= -delta0 (1 - tolerance).
  double tolerance = 0.05;
};

struct DecayReport {
  bool trivial = false;
  double s = 0.0;
  double delta0 = 0.0;
  double fitted_slope = 0.0;
  double slope_bound = 0.0;
  bool slope_ok = false;
  /// Smallest C with ||u(t)||_{H^s} <= C e^{-delta0 t} (||u0||_{H^s} + ||u1||_{H^{s-1}})
  /// at every sample.
  double fitted_constant = 0.0;
  std::vector<double> norms;
  std::vector<double> ratio_curve;

  bool passed() const { return trivial || slope_ok; }
};

/// Throws std::invalid_argument when the trajectory has fewer than 8
/// samples or does not span 3 / delta0.
DecayReport verify_decay(const Trajectory& trajectory, const SymbolProvider& provider, double s,
                         double m, double b, const DecayOptions& options = {});

}  // namespace hwave
