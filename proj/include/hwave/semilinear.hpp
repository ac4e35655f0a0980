#pragma once

#include "hwave/propagator.hpp"
#include "hwave/spectral.hpp"
#include "hwave/transform.hpp"

#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace hwave {

/// f(u) = mu |u|^{p-1} u.
struct PowerType {
  complex mu = 1.0;
  double p = 2.0;
};

/// f(U) with U = (u, R^{1/nu} u, ..., R^{J/nu} u), J = components - 1.
struct GeneralF {
  std::function<complex(std::span<const complex>)> callback;
  double p = 2.0;
  double lipschitz = 1.0;
  int components = 1;
};

struct Nonlinearity {
  std::variant<PowerType, GeneralF> variant;

  static Nonlinearity power(complex mu, double p);
  static Nonlinearity general(std::function<complex(std::span<const complex>)> callback, double p,
                              double lipschitz, int components);
  /// f = 0.
  static Nonlinearity zero();

  double exponent() const;
  bool is_zero() const;
  int components() const;
  complex evaluate(std::span<const complex> u) const;
};

struct Admissibility {
  bool admissible = false;
  double bound = 0.0;
  std::string rule;
};

/// 1 < p <= 1 + 1/n on H^n.
Admissibility check_admissible_heisenberg(double p, int n);
/// 1 < p <= 1 + 2/(Q - 2) on a graded group (or R^Q); throws for Q < 3.
Admissibility check_admissible_graded(double p, int Q);

struct NonlinearityOptions {
  /// Largest tolerated boundary ratio of the synthesized field.
  double boundary_tolerance = 1e-2;
};

/// Synthesizes u (and R^{j/nu} u when the nonlinearity needs them), applies f
/// pointwise and transforms back. Throws BoundaryDecayError when the
/// synthesized field does not decay at the box faces and std::domain_error
/// on non-finite values.
SpectralField apply_nonlinearity(const SpectralField& u, const Nonlinearity& nl,
                                 const SpectralTransform& transform, const SymbolProvider& provider,
                                 const NonlinearityOptions& options = {});

/// apply_nonlinearity over a set of fields sharing one transform.
std::vector<SpectralField> apply_nonlinearity_batch(const std::vector<SpectralField>& u, const Nonlinearity& nl,
                                                    const SpectralTransform& transform,
                                                    const SymbolProvider& provider,
                                                    const NonlinearityOptions& options = {});

/// Duhamel integral of a source history on the uniform grid t_j = j dt by the
/// composite trapezoid rule, with per-mode kernel tables.
class DuhamelIntegrator {
 public:
  DuhamelIntegrator(GridPtr grid, const SymbolProvider& provider, double b, double m, double dt,
                    std::size_t steps);

  struct Result {
    std::vector<SpectralField> values;
    std::vector<SpectralField> derivatives;
    /// max_j ||D_dt(t_j) - D_2dt(t_j)|| / 3 (Richardson estimate of the dt rule).
    double richardson = 0.0;
  };

  /// sources[j] = f(u(t_j)), j = 0..steps. Throws when the history is short.
  Result integrate(const std::vector<SpectralField>& sources) const;
  /// Single evaluation at t_j with its own Richardson estimate field.
  SpectralField integrate_at(const std::vector<SpectralField>& sources, std::size_t j,
                             SpectralField* error_estimate = nullptr) const;

  double dt() const { return dt_; }
  std::size_t steps() const { return steps_; }

 private:
  struct Node {
    std::size_t index;
    double weight;
  };
  /// Trapezoid nodes for the integral up to t_j with the given step multiple.
  std::vector<Node> rule(std::size_t j, std::size_t stride) const;
  void accumulate(const std::vector<SpectralField>& sources, std::size_t j, const std::vector<Node>& nodes,
                  SpectralField& value, SpectralField* derivative) const;

  GridPtr grid_;
  double dt_;
  std::size_t steps_;
  std::vector<std::uint32_t> symbol_id_;  // coefficient -> unique symbol
  std::size_t unique_ = 0;
  std::vector<double> value_kernel_;       // [lag][unique]
  std::vector<double> derivative_kernel_;  // [lag][unique]
};

/// Trapezoid Duhamel integral at t = j dt of a uniformly sampled history.
SpectralField duhamel_step(const std::vector<SpectralField>& history, double b, double m,
                           const SymbolProvider& provider, double dt, std::size_t j,
                           SpectralField* error_estimate = nullptr);

/// Seminorms entering the Z-norm and the decay report.
struct ZNormConfig {
  double delta = 0.0;
  std::vector<double> times;
  bool include_l2 = true;
  bool include_time_derivative = true;
  /// j values of ||R^{j/nu} u||_{L2}; j = 1..[nu/2] covers alpha + nu beta <= nu/2.
  std::vector<int> rockland_powers{1};
  /// w(t) = (1 + t)^{weight_exponent} e^{delta t}.
  double weight_exponent = -0.5;

  /// Times j t_end / steps, powers 1..[nu/2].
  static ZNormConfig uniform(double delta, double t_end, std::size_t steps, double nu = 2.0);
  double weight(double t) const;
  void validate() const;
};

/// Default delta slightly below the linear rate.
double default_z_delta(double b, double m);

/// sup_j w(t_j) (sum of configured seminorms of the trajectory at t_j).
double z_norm(const Trajectory& trajectory, const SymbolProvider& provider, const ZNormConfig& config);

enum class PicardStatus { Converged, Diverged, MaxIter };
std::string to_string(PicardStatus s);

struct PicardDiagnostics {
  int iterations = 0;
  std::vector<double> z_norms;
  std::vector<double> increments;
  std::vector<double> ratios;
  PicardStatus status = PicardStatus::MaxIter;
  double data_norm = 0.0;
  double linear_z_norm = 0.0;
  /// L = r C1 (data norm) with C1 = ||u_lin||_Z / data norm.
  double l_threshold = 0.0;
  double richardson = 0.0;
  std::string note;

  bool all_ratios_below(double bound) const;
};

struct PicardOptions {
  double tolerance = 1e-10;
  int max_iter = 40;
  double r = 2.0;
  double divergence_factor = 2.0;
  NonlinearityOptions nonlinearity;
};

struct PicardResult {
  Trajectory trajectory;
  Trajectory linear;
  std::vector<SpectralField> sources;
  PicardDiagnostics diagnostics;
};

/// Iterates u <- u_lin + Duhamel(f(u)) on the uniform time grid of
/// znorm.times. Divergence (Z-norm above divergence_factor * L, or
/// non-finite values) is reported in the diagnostics.
PicardResult picard_solve(const SpectralField& u0, const SpectralField& u1, const Nonlinearity& nl,
                          double b, double m, const SymbolProvider& provider,
                          const SpectralTransform& transform, const ZNormConfig& znorm,
                          const PicardOptions& options = {});

/// ||u0||_{H^{nu/2}} + ||u1||_{L2} (H^1 x L2 for the sub-Laplacian).
double data_norm(const SpectralField& u0, const SpectralField& u1, const SymbolProvider& provider);

struct ProblemTemplate {
  SpectralField u0;  // unit-size data; scaled by epsilon
  SpectralField u1;
  Nonlinearity nl;
  double b = 2.0;
  double m = 2.0;
  const SymbolProvider* provider = nullptr;
  const SpectralTransform* transform = nullptr;
  ZNormConfig znorm;
  PicardOptions options;

  PicardStatus run(double epsilon) const;
};

struct EpsilonSearch {
  double epsilon0 = 0.0;  // largest tested scale that converged
  double upper = 0.0;     // smallest tested scale that did not
  double width = 0.0;     // upper / epsilon0
  int runs = 0;
  bool retest_converged = false;
};

/// Geometric bisection on the data scale. Throws std::invalid_argument when
/// the bracket does not have a converging lower and non-converging upper end.
EpsilonSearch find_epsilon0(const ProblemTemplate& problem, double eps_lo, double eps_hi, int trials);

struct SemilinearDecayReport {
  bool trivial = false;
  std::vector<std::string> names;
  std::vector<double> slopes;
  double delta_fit = 0.0;  // -max slope
  bool all_negative = false;
};

/// Exponential slopes of ||u||, ||R^{j/nu} u|| (j = 1..[nu/2]) and ||d_t u||
/// over the trailing fraction of the samples.
SemilinearDecayReport verify_semilinear_decay(const Trajectory& trajectory, const SymbolProvider& provider,
                                              double tail_fraction = 0.6);

}  // namespace hwave
