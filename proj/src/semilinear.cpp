#include "hwave/semilinear.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

namespace hwave {

// ---------------------------------------------------------------------------
// Nonlinearity

Nonlinearity Nonlinearity::power(complex mu, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("Nonlinearity::power: p must be >= 1");
  return {PowerType{mu, p}};
}

Nonlinearity Nonlinearity::general(std::function<complex(std::span<const complex>)> callback, double p,
                                   double lipschitz, int components) {
  if (!callback) throw std::invalid_argument("Nonlinearity::general: empty callback");
  if (components < 1) throw std::invalid_argument("Nonlinearity::general: components must be >= 1");
  return {GeneralF{std::move(callback), p, lipschitz, components}};
}

Nonlinearity Nonlinearity::zero() { return {PowerType{0.0, 2.0}}; }

double Nonlinearity::exponent() const {
  return std::visit([](const auto& v) { return v.p; }, variant);
}

bool Nonlinearity::is_zero() const {
  const auto* pt = std::get_if<PowerType>(&variant);
  return pt && pt->mu == complex(0.0);
}

int Nonlinearity::components() const {
  const auto* g = std::get_if<GeneralF>(&variant);
  return g ? g->components : 1;
}

complex Nonlinearity::evaluate(std::span<const complex> u) const {
  if (const auto* pt = std::get_if<PowerType>(&variant)) {
    const double a = std::abs(u[0]);
    if (a == 0.0) return 0.0;
    return pt->mu * std::pow(a, pt->p - 1.0) * u[0];
  }
  return std::get<GeneralF>(variant).callback(u);
}

Admissibility check_admissible_heisenberg(double p, int n) {
  if (!(p > 1.0)) throw std::invalid_argument("check_admissible: p must be > 1");
  if (n < 1) throw std::invalid_argument("check_admissible: n must be >= 1");
  const double bound = 1.0 + 1.0 / n;
  return {p <= bound, bound, "1 < p <= 1 + 1/n"};
}

Admissibility check_admissible_graded(double p, int Q) {
  if (!(p > 1.0)) throw std::invalid_argument("check_admissible: p must be > 1");
  if (Q < 3) throw std::invalid_argument("check_admissible: Q must be >= 3");
  const double bound = 1.0 + 2.0 / (Q - 2);
  return {p <= bound, bound, "1 < p <= 1 + 2/(Q-2)"};
}

std::vector<SpectralField> apply_nonlinearity_batch(const std::vector<SpectralField>& u, const Nonlinearity& nl,
                                                    const SpectralTransform& transform,
                                                    const SymbolProvider& provider,
                                                    const NonlinearityOptions& options) {
  std::vector<SpectralField> result;
  result.reserve(u.size());
  if (nl.is_zero()) {
    for (const auto& v : u) result.emplace_back(v.grid());
    return result;
  }
  const int comps = nl.components();
  std::vector<std::vector<SpatialField>> parts(comps);
  parts[0] = transform.synthesize_batch(u);
  for (const auto& s : parts[0]) {
    const double ratio = boundary_decay_ratio(s);
    if (ratio > options.boundary_tolerance) {
      throw BoundaryDecayError("apply_nonlinearity: synthesized field does not decay at the box faces (ratio " +
                               std::to_string(ratio) + ")");
    }
  }
  for (int j = 1; j < comps; ++j) {
    std::vector<SpectralField> powered;
    powered.reserve(u.size());
    for (const auto& v : u) powered.push_back(apply_symbol_power(v, provider, j / provider.degree()));
    parts[j] = transform.synthesize_batch(powered);
  }
  std::vector<SpatialField> pointwise;
  pointwise.reserve(u.size());
  std::vector<complex> tuple(comps);
  for (std::size_t b = 0; b < u.size(); ++b) {
    SpatialField out(transform.spatial());
    for (std::size_t i = 0; i < out.samples.size(); ++i) {
      for (int j = 0; j < comps; ++j) tuple[j] = parts[j][b].samples[i];
      const complex v = nl.evaluate(tuple);
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
        throw std::domain_error("apply_nonlinearity: non-finite value after applying f");
      }
      out.samples[i] = v;
    }
    pointwise.push_back(std::move(out));
  }
  auto spectral = transform.forward_batch(pointwise);
  for (std::size_t b = 0; b < u.size(); ++b) {
    result.emplace_back(u[b].grid(), std::move(spectral[b].coefficients()));
  }
  return result;
}

SpectralField apply_nonlinearity(const SpectralField& u, const Nonlinearity& nl,
                                 const SpectralTransform& transform, const SymbolProvider& provider,
                                 const NonlinearityOptions& options) {
  return std::move(apply_nonlinearity_batch({u}, nl, transform, provider, options).front());
}

// ---------------------------------------------------------------------------
// Duhamel quadrature

DuhamelIntegrator::DuhamelIntegrator(GridPtr grid, const SymbolProvider& provider, double b, double m,
                                     double dt, std::size_t steps)
    : grid_(std::move(grid)), dt_(dt), steps_(steps) {
  if (!grid_) throw std::invalid_argument("DuhamelIntegrator: null grid");
  if (!(dt > 0.0)) throw std::invalid_argument("DuhamelIntegrator: dt must be positive");
  const auto sigma = grid_->symbol_values(provider);
  std::unordered_map<double, std::uint32_t> ids;
  std::vector<double> totals;
  symbol_id_.resize(sigma.size());
  for (std::size_t c = 0; c < sigma.size(); ++c) {
    const double total = sigma[c] + m;
    auto [it, inserted] = ids.try_emplace(total, static_cast<std::uint32_t>(totals.size()));
    if (inserted) totals.push_back(total);
    symbol_id_[c] = it->second;
  }
  unique_ = totals.size();
  value_kernel_.resize((steps + 1) * unique_);
  derivative_kernel_.resize((steps + 1) * unique_);
  for (std::size_t lag = 0; lag <= steps; ++lag) {
    for (std::size_t u = 0; u < unique_; ++u) {
      const auto k = propagator_coefficients(b, totals[u], lag * dt);
      value_kernel_[lag * unique_ + u] = k.c01;
      derivative_kernel_[lag * unique_ + u] = k.c11;
    }
  }
}

std::vector<DuhamelIntegrator::Node> DuhamelIntegrator::rule(std::size_t j, std::size_t stride) const {
  std::vector<Node> nodes;
  if (j == 0) return nodes;
  if (stride == 1) {
    for (std::size_t i = 0; i <= j; ++i) nodes.push_back({i, (i == 0 || i == j ? 0.5 : 1.0) * dt_});
    return nodes;
  }
  // Coarse rule: 2 dt panels ending at t_j; an odd leftover first interval
  // keeps the fine trapezoid so the two rules differ only by the coarse part.
  std::size_t start = 0;
  if (j % 2 == 1) {
    nodes.push_back({0, 0.5 * dt_});
    nodes.push_back({1, 0.5 * dt_});
    start = 1;
  }
  for (std::size_t i = start; i <= j; i += 2) {
    const double w = (i == start || i == j ? 0.5 : 1.0) * 2.0 * dt_;
    if (!nodes.empty() && nodes.back().index == i) {
      nodes.back().weight += w;
    } else {
      nodes.push_back({i, w});
    }
  }
  return nodes;
}

void DuhamelIntegrator::accumulate(const std::vector<SpectralField>& sources, std::size_t j,
                                   const std::vector<Node>& nodes, SpectralField& value,
                                   SpectralField* derivative) const {
  const std::size_t count = symbol_id_.size();
  for (const auto& node : nodes) {
    const auto& g = sources[node.index].coefficients();
    const std::size_t lag = j - node.index;
    const double* kv = value_kernel_.data() + lag * unique_;
    const double* kd = derivative_kernel_.data() + lag * unique_;
    auto& v = value.coefficients();
    for (std::size_t c = 0; c < count; ++c) v[c] += node.weight * kv[symbol_id_[c]] * g[c];
    if (derivative) {
      auto& d = derivative->coefficients();
      for (std::size_t c = 0; c < count; ++c) d[c] += node.weight * kd[symbol_id_[c]] * g[c];
    }
  }
}

DuhamelIntegrator::Result DuhamelIntegrator::integrate(const std::vector<SpectralField>& sources) const {
  if (sources.size() < steps_ + 1) {
    throw std::invalid_argument("DuhamelIntegrator: source history does not cover the time grid");
  }
  Result r;
  r.values.reserve(steps_ + 1);
  r.derivatives.reserve(steps_ + 1);
  for (std::size_t j = 0; j <= steps_; ++j) {
    SpectralField v(grid_), d(grid_);
    accumulate(sources, j, rule(j, 1), v, &d);
    if (j >= 2) {
      SpectralField coarse(grid_);
      accumulate(sources, j, rule(j, 2), coarse, nullptr);
      r.richardson = std::max(r.richardson, l2_norm(v - coarse) / 3.0);
    }
    r.values.push_back(std::move(v));
    r.derivatives.push_back(std::move(d));
  }
  return r;
}

SpectralField DuhamelIntegrator::integrate_at(const std::vector<SpectralField>& sources, std::size_t j,
                                              SpectralField* error_estimate) const {
  if (j > steps_ || sources.size() < j + 1) {
    throw std::invalid_argument("DuhamelIntegrator: source history does not reach t_j");
  }
  SpectralField v(grid_);
  accumulate(sources, j, rule(j, 1), v, nullptr);
  if (error_estimate) {
    *error_estimate = SpectralField(grid_);
    if (j >= 2) {
      SpectralField coarse(grid_);
      accumulate(sources, j, rule(j, 2), coarse, nullptr);
      *error_estimate = (1.0 / 3.0) * (v - coarse);
    }
  }
  return v;
}

SpectralField duhamel_step(const std::vector<SpectralField>& history, double b, double m,
                           const SymbolProvider& provider, double dt, std::size_t j,
                           SpectralField* error_estimate) {
  if (history.size() < j + 1 || history.empty()) {
    throw std::invalid_argument("duhamel_step: history does not cover [0, t]");
  }
  DuhamelIntegrator integrator(history.front().grid(), provider, b, m, dt, j);
  return integrator.integrate_at(history, j, error_estimate);
}

// ---------------------------------------------------------------------------
// Z-norm

ZNormConfig ZNormConfig::uniform(double delta, double t_end, std::size_t steps, double nu) {
  if (steps < 1 || !(t_end > 0.0)) throw std::invalid_argument("ZNormConfig::uniform: need t_end > 0, steps >= 1");
  ZNormConfig z;
  z.delta = delta;
  for (std::size_t j = 0; j <= steps; ++j) z.times.push_back(t_end * static_cast<double>(j) / steps);
  z.rockland_powers.clear();
  for (int j = 1; j <= static_cast<int>(std::floor(nu / 2.0)); ++j) z.rockland_powers.push_back(j);
  return z;
}

double ZNormConfig::weight(double t) const {
  return std::pow(1.0 + t, weight_exponent) * std::exp(delta * t);
}

void ZNormConfig::validate() const {
  if (!(delta > 0.0)) throw std::invalid_argument("ZNormConfig: delta must be positive");
  if (times.size() < 2) throw std::invalid_argument("ZNormConfig: need at least two sample times");
  if (!std::is_sorted(times.begin(), times.end())) throw std::invalid_argument("ZNormConfig: times must be sorted");
}

double default_z_delta(double b, double m) { return decay_rate(b, m) * (1.0 - 1e-3); }

namespace {

double seminorm_sum(const SpectralField& value, const SpectralField& derivative,
                    const SymbolProvider& provider, const ZNormConfig& config) {
  double s = 0.0;
  if (config.include_l2) s += l2_norm(value);
  for (int j : config.rockland_powers) s += homogeneous_sobolev_norm(value, provider, j);
  if (config.include_time_derivative) s += l2_norm(derivative);
  return s;
}

double z_norm_of(const std::vector<double>& times, const std::vector<SpectralField>& values,
                 const std::vector<SpectralField>& derivatives, const SymbolProvider& provider,
                 const ZNormConfig& config) {
  double z = 0.0;
  for (std::size_t j = 0; j < times.size(); ++j) {
    z = std::max(z, config.weight(times[j]) * seminorm_sum(values[j], derivatives[j], provider, config));
  }
  return z;
}

double z_norm_of_difference(const Trajectory& a, const Trajectory& b, const SymbolProvider& provider,
                            const ZNormConfig& config) {
  double z = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    z = std::max(z, config.weight(a.times[j]) *
                        seminorm_sum(a.values[j] - b.values[j], a.derivatives[j] - b.derivatives[j],
                                     provider, config));
  }
  return z;
}

bool trajectory_finite(const Trajectory& t) {
  for (std::size_t j = 0; j < t.size(); ++j) {
    if (!t.values[j].all_finite() || !t.derivatives[j].all_finite()) return false;
  }
  return true;
}

}  // namespace

double z_norm(const Trajectory& trajectory, const SymbolProvider& provider, const ZNormConfig& config) {
  if (trajectory.empty()) throw std::invalid_argument("z_norm: empty trajectory");
  return z_norm_of(trajectory.times, trajectory.values, trajectory.derivatives, provider, config);
}

// ---------------------------------------------------------------------------
// Picard iteration

std::string to_string(PicardStatus s) {
  switch (s) {
    case PicardStatus::Converged: return "converged";
    case PicardStatus::Diverged: return "diverged";
    case PicardStatus::MaxIter: return "max-iter";
  }
  return "unknown";
}

bool PicardDiagnostics::all_ratios_below(double bound) const {
  return std::all_of(ratios.begin(), ratios.end(), [bound](double r) { return r < bound; });
}

double data_norm(const SpectralField& u0, const SpectralField& u1, const SymbolProvider& provider) {
  return sobolev_norm(u0, provider, 0.5 * provider.degree()) + l2_norm(u1);
}

PicardResult picard_solve(const SpectralField& u0, const SpectralField& u1, const Nonlinearity& nl,
                          double b, double m, const SymbolProvider& provider,
                          const SpectralTransform& transform, const ZNormConfig& znorm,
                          const PicardOptions& options) {
  znorm.validate();
  const auto& times = znorm.times;
  const std::size_t steps = times.size() - 1;
  const double dt = times[1] - times[0];
  if (times.front() != 0.0) throw std::invalid_argument("picard_solve: time grid must start at 0");
  for (std::size_t j = 0; j <= steps; ++j) {
    if (std::abs(times[j] - j * dt) > 1e-9 * std::max(1.0, times.back())) {
      throw std::invalid_argument("picard_solve: time grid must be uniform");
    }
  }
  if (!transform.grid()->same_layout(*u0.grid())) {
    throw std::invalid_argument("picard_solve: transform grid does not match the data");
  }

  PicardResult result;
  auto& diag = result.diagnostics;
  diag.data_norm = data_norm(u0, u1, provider);
  if (!std::isfinite(diag.data_norm)) throw std::invalid_argument("picard_solve: data norm is not finite");
  if (provider.backend() == Backend::Heisenberg) {
    // The sub-Laplacian grid carries n; admissibility is a warning only.
    const auto adm = check_admissible_heisenberg(std::max(nl.exponent(), 1.0 + 1e-12), u0.grid()->dimension());
    if (!adm.admissible) diag.note = "p outside " + adm.rule;
  } else if (provider.dimension() >= 3) {
    const auto adm = check_admissible_graded(std::max(nl.exponent(), 1.0 + 1e-12), provider.dimension());
    if (!adm.admissible) diag.note = "p outside " + adm.rule;
  }

  result.linear = evolve_linear(u0, u1, b, m, provider, times);
  diag.linear_z_norm = z_norm(result.linear, provider, znorm);
  diag.l_threshold = options.r * diag.linear_z_norm;
  diag.z_norms.push_back(diag.linear_z_norm);
  Trajectory current = result.linear;

  const DuhamelIntegrator integrator(u0.grid(), provider, b, m, dt, steps);
  double previous_increment = 0.0;
  double peak = 0.0;
  for (const auto& v : result.linear.values) peak = std::max(peak, l2_norm(v));
  diag.status = PicardStatus::MaxIter;
  for (int it = 1; it <= options.max_iter; ++it) {
    std::vector<SpectralField> sources;
    try {
      sources = apply_nonlinearity_batch(current.values, nl, transform, provider, options.nonlinearity);
    } catch (const BoundaryDecayError& e) {
      diag.status = PicardStatus::Diverged;
      diag.note = e.what();
      break;
    } catch (const std::domain_error& e) {
      diag.status = PicardStatus::Diverged;
      diag.note = e.what();
      break;
    }
    auto duhamel = integrator.integrate(sources);
    Trajectory next;
    next.times = times;
    next.values.reserve(steps + 1);
    next.derivatives.reserve(steps + 1);
    for (std::size_t j = 0; j <= steps; ++j) {
      next.values.push_back(result.linear.values[j] + duhamel.values[j]);
      next.derivatives.push_back(result.linear.derivatives[j] + duhamel.derivatives[j]);
    }
    diag.iterations = it;
    diag.richardson = peak > 0.0 ? duhamel.richardson / peak : 0.0;
    result.sources = std::move(sources);
    if (!trajectory_finite(next)) {
      diag.status = PicardStatus::Diverged;
      diag.note = "non-finite iterate";
      current = std::move(next);
      break;
    }
    const double z = z_norm(next, provider, znorm);
    const double increment = z_norm_of_difference(next, current, provider, znorm);
    diag.z_norms.push_back(z);
    diag.increments.push_back(increment);
    if (it >= 2 && previous_increment > 0.0 && increment > 0.0) {
      diag.ratios.push_back(increment / previous_increment);
    }
    current = std::move(next);
    if (z > options.divergence_factor * diag.l_threshold || !std::isfinite(z)) {
      diag.status = PicardStatus::Diverged;
      diag.note = "Z-norm exceeded the divergence threshold";
      break;
    }
    if (increment <= options.tolerance * z && (diag.ratios.empty() || diag.ratios.back() < 1.0)) {
      diag.status = PicardStatus::Converged;
      break;
    }
    previous_increment = increment;
  }
  result.trajectory = std::move(current);
  return result;
}

PicardStatus ProblemTemplate::run(double epsilon) const {
  if (!provider || !transform) throw std::invalid_argument("ProblemTemplate: provider and transform required");
  return picard_solve(complex(epsilon) * u0, complex(epsilon) * u1, nl, b, m, *provider, *transform, znorm,
                      options)
      .diagnostics.status;
}

EpsilonSearch find_epsilon0(const ProblemTemplate& problem, double eps_lo, double eps_hi, int trials) {
  if (!(eps_lo > 0.0) || !(eps_hi > eps_lo)) throw std::invalid_argument("find_epsilon0: need 0 < lo < hi");
  EpsilonSearch out;
  out.runs = 2;
  if (problem.run(eps_lo) != PicardStatus::Converged) {
    throw std::invalid_argument("find_epsilon0: lower end of the bracket does not converge");
  }
  if (problem.run(eps_hi) == PicardStatus::Converged) {
    throw std::invalid_argument("find_epsilon0: upper end of the bracket converges");
  }
  double lo = eps_lo, hi = eps_hi;
  for (int i = 0; i < trials; ++i) {
    const double mid = std::sqrt(lo * hi);
    ++out.runs;
    if (problem.run(mid) == PicardStatus::Converged) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  ++out.runs;
  out.retest_converged = problem.run(eps_lo) == PicardStatus::Converged;
  out.epsilon0 = lo;
  out.upper = hi;
  out.width = hi / lo;
  return out;
}

SemilinearDecayReport verify_semilinear_decay(const Trajectory& trajectory, const SymbolProvider& provider,
                                              double tail_fraction) {
  if (trajectory.size() < 8) throw std::invalid_argument("verify_semilinear_decay: insufficient samples (< 8)");
  SemilinearDecayReport report;
  std::vector<std::vector<double>> series;
  report.names.push_back("L2");
  series.emplace_back();
  const int top = static_cast<int>(std::floor(provider.degree() / 2.0));
  for (int j = 1; j <= top; ++j) {
    report.names.push_back("R^" + std::to_string(j) + "/" + std::to_string(static_cast<int>(provider.degree())));
    series.emplace_back();
  }
  report.names.push_back("dt");
  series.emplace_back();
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    series[0].push_back(l2_norm(trajectory.values[i]));
    for (int j = 1; j <= top; ++j) series[j].push_back(homogeneous_sobolev_norm(trajectory.values[i], provider, j));
    series.back().push_back(l2_norm(trajectory.derivatives[i]));
  }
  const bool all_zero = std::all_of(series.begin(), series.end(), [](const auto& s) {
    return std::all_of(s.begin(), s.end(), [](double v) { return v == 0.0; });
  });
  if (all_zero) {
    report.trivial = true;
    report.all_negative = true;
    return report;
  }
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& s : series) {
    const double slope = fit_log_slope(trajectory.times, s, tail_fraction);
    report.slopes.push_back(slope);
    worst = std::max(worst, slope);
  }
  report.delta_fit = -worst;
  report.all_negative = worst < 0.0;
  return report;
}

}  // namespace hwave
