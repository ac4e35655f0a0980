#include "hwave/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hwave {

std::string to_string(Regime r) {
  switch (r) {
    case Regime::Underdamped: return "underdamped";
    case Regime::Critical: return "critical";
    case Regime::Overdamped: return "overdamped";
  }
  return "unknown";
}

double default_boundary_tolerance(double b, double total) {
  return 1e-8 * std::max(b * b, 4.0 * total);
}

Regime classify_regime(double b, double total, double boundary_tol) {
  if (!(b > 0.0) || !(total > 0.0)) {
    throw std::invalid_argument("classify_regime: b and total must be positive");
  }
  if (boundary_tol < 0.0) boundary_tol = default_boundary_tolerance(b, total);
  const double gap = b * b - 4.0 * total;
  if (std::abs(gap) <= boundary_tol) return Regime::Critical;
  return gap < 0.0 ? Regime::Underdamped : Regime::Overdamped;
}

DampedModeParams make_mode_params(double b, double m, double omega2, double boundary_tol) {
  if (!(m > 0.0)) throw std::invalid_argument("make_mode_params: m must be positive");
  if (omega2 < 0.0) throw std::invalid_argument("make_mode_params: omega2 must be >= 0");
  DampedModeParams p;
  p.b = b;
  p.m = m;
  p.omega2 = omega2;
  p.total = omega2 + m;
  p.regime = classify_regime(b, p.total, boundary_tol);
  p.a_or_c = p.regime == Regime::Critical ? 0.0 : std::sqrt(std::abs(p.total - 0.25 * b * b));
  return p;
}

namespace {

// Below this value of |D| t^2 the series is used; 9 terms keep the
// truncation error under 1e-30 relative.
constexpr double kSeriesSwitch = 1e-2;
constexpr int kSeriesTerms = 9;

}  // namespace

PropagatorCoefficients propagator_coefficients(double b, double total, double t) {
  const double half = 0.5 * b;
  const double detuning = total - half * half;
  double ec = 0.0;  // e^{-bt/2} C(t)
  double es = 0.0;  // e^{-bt/2} S(t)
  if (std::abs(detuning) * t * t < kSeriesSwitch) {
    // C = sum x^j/(2j)!, S = t sum x^j/(2j+1)!, x = -D t^2
    const double x = -detuning * t * t;
    double term_c = 1.0;
    double term_s = 1.0;
    double c = 1.0;
    double s = 1.0;
    for (int j = 1; j < kSeriesTerms; ++j) {
      term_c *= x / ((2.0 * j - 1.0) * (2.0 * j));
      term_s *= x / ((2.0 * j) * (2.0 * j + 1.0));
      c += term_c;
      s += term_s;
    }
    const double e = std::exp(-half * t);
    ec = e * c;
    es = e * s * t;
  } else if (detuning > 0.0) {
    const double a = std::sqrt(detuning);
    const double e = std::exp(-half * t);
    ec = e * std::cos(a * t);
    es = e * std::sin(a * t) / a;
  } else {
    const double c = std::sqrt(-detuning);
    const double grow = std::exp((c - half) * t);
    const double fall = std::exp(-(c + half) * t);
    ec = 0.5 * (grow + fall);
    es = grow * (-std::expm1(-2.0 * c * t)) / (2.0 * c);
  }
  return {ec + half * es, es, -total * es, ec - half * es};
}

ModeState propagate_mode(const DampedModeParams& params, complex u0, complex u1, double t) {
  if (t < 0.0) throw std::invalid_argument("propagate_mode: t must be >= 0");
  const auto c = propagator_coefficients(params.b, params.total, t);
  return {c.c00 * u0 + c.c01 * u1, c.c10 * u0 + c.c11 * u1};
}

ModeState duhamel_kernel(const DampedModeParams& params, complex g, double t) {
  return propagate_mode(params, complex(0.0), g, t);
}

double decay_rate(double b, double m) {
  if (!(b > 0.0) || !(m > 0.0)) throw std::invalid_argument("decay_rate: b and m must be positive");
  return 0.5 * b - std::sqrt(std::max(0.0, 0.25 * b * b - m));
}

double mode_decay_rate(double b, double total) {
  return 0.5 * b - std::sqrt(std::max(0.0, 0.25 * b * b - total));
}

Trajectory evolve_linear(const SpectralField& field0, const SpectralField& field1, double b,
                         double m, const SymbolProvider& provider, const std::vector<double>& times) {
  if (!field0.grid() || !field1.grid() || !field0.grid()->same_layout(*field1.grid())) {
    throw std::invalid_argument("evolve_linear: fields do not share one grid");
  }
  if (!(b > 0.0) || !(m > 0.0)) throw std::invalid_argument("evolve_linear: b and m must be positive");
  for (std::size_t j = 0; j < times.size(); ++j) {
    if (times[j] < 0.0 || (j > 0 && times[j] < times[j - 1])) {
      throw std::invalid_argument("evolve_linear: times must be non-negative and sorted");
    }
  }
  const auto sigma = field0.grid()->symbol_values(provider);
  Trajectory traj;
  traj.times = times;
  traj.values.reserve(times.size());
  traj.derivatives.reserve(times.size());
  const auto& u0 = field0.coefficients();
  const auto& u1 = field1.coefficients();
  for (double t : times) {
    SpectralField value(field0.grid());
    SpectralField deriv(field0.grid());
    PropagatorCoefficients c{};
    double cached = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i < sigma.size(); ++i) {
      if (sigma[i] != cached) {
        cached = sigma[i];
        c = propagator_coefficients(b, sigma[i] + m, t);
      }
      value[i] = c.c00 * u0[i] + c.c01 * u1[i];
      deriv[i] = c.c10 * u0[i] + c.c11 * u1[i];
    }
    traj.values.push_back(std::move(value));
    traj.derivatives.push_back(std::move(deriv));
  }
  return traj;
}

double fit_log_slope(const std::vector<double>& times, const std::vector<double>& values,
                     double tail_fraction) {
  if (times.size() != values.size() || times.size() < 2) {
    throw std::invalid_argument("fit_log_slope: need at least two matching samples");
  }
  const std::size_t count = times.size();
  std::size_t start = static_cast<std::size_t>(std::floor((1.0 - tail_fraction) * count));
  start = std::min(start, count - 2);
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  std::size_t used = 0;
  for (std::size_t j = start; j < count; ++j) {
    if (!(values[j] > 0.0)) continue;
    const double y = std::log(values[j]);
    st += times[j];
    sy += y;
    stt += times[j] * times[j];
    sty += times[j] * y;
    ++used;
  }
  if (used < 2) throw std::invalid_argument("fit_log_slope: fewer than two positive samples");
  const double denom = used * stt - st * st;
  return (used * sty - st * sy) / denom;
}

DecayReport verify_decay(const Trajectory& trajectory, const SymbolProvider& provider, double s,
                         double m, double b, const DecayOptions& options) {
  DecayReport report;
  report.s = s;
  report.delta0 = decay_rate(b, m);
  if (trajectory.size() < 8) throw std::invalid_argument("verify_decay: insufficient samples (< 8)");
  const double span = trajectory.times.back() - trajectory.times.front();
  if (span < 3.0 / report.delta0) {
    throw std::invalid_argument("verify_decay: samples do not span 3 / delta0");
  }
  report.norms.reserve(trajectory.size());
  for (const auto& v : trajectory.values) report.norms.push_back(sobolev_norm(v, provider, s));
  const double data = sobolev_norm(trajectory.values.front(), provider, s) +
                      sobolev_norm(trajectory.derivatives.front(), provider, s - 1.0);
  report.slope_bound = -report.delta0 * (1.0 - options.tolerance);
  if (data == 0.0 || std::all_of(report.norms.begin(), report.norms.end(),
                                 [](double v) { return v == 0.0; })) {
    report.trivial = true;
    return report;
  }
  const double t0 = trajectory.times.front();
  for (std::size_t j = 0; j < trajectory.size(); ++j) {
    const double ratio = report.norms[j] * std::exp(report.delta0 * (trajectory.times[j] - t0)) / data;
    report.ratio_curve.push_back(ratio);
    report.fitted_constant = std::max(report.fitted_constant, ratio);
  }
  report.fitted_slope = fit_log_slope(trajectory.times, report.norms, options.tail_fraction);
  report.slope_ok = report.fitted_slope <= report.slope_bound;
  return report;
}

}  // namespace hwave
