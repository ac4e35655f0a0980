#include "hwave/fd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hwave::fd {

namespace {

struct Layout {
  int nx, ny, nt;
  double hx, hy, ht;
  std::vector<double> xs, ys;

  explicit Layout(const SpatialGrid& g)
      : nx(g.shape[0]), ny(g.shape[1]), nt(g.shape[2]), hx(g.spacing(0)), hy(g.spacing(1)), ht(g.spacing(2)) {
    for (int i = 0; i < nx; ++i) xs.push_back(g.coordinate(0, i));
    for (int j = 0; j < ny; ++j) ys.push_back(g.coordinate(1, j));
  }
  std::size_t at(int i, int j, int k) const { return (static_cast<std::size_t>(i) * ny + j) * nt + k; }
};

void check_same_grid(const SpatialGrid& a, const SpatialGrid& b, const char* what) {
  if (!(a == b)) throw std::invalid_argument(std::string(what) + ": field grid does not match the stencil grid");
}

double interior_norm2(const std::vector<complex>& v, const std::vector<std::size_t>& idx) {
  double s = 0.0;
  for (std::size_t i : idx) s += std::norm(v[i]);
  return s;
}

}  // namespace

StencilOperator::StencilOperator(SpatialGrid grid) : StencilOperator(std::move(grid), false) {}

StencilOperator::StencilOperator(SpatialGrid grid, bool zero) : grid_(std::move(grid)), zero_(zero) {
  if (grid_.periodic || grid_.axes() != 3) {
    throw std::invalid_argument("StencilOperator: needs a Heisenberg box with n = 1 (axes x, y, t)");
  }
  for (int s : grid_.shape) {
    if (s < 5) throw GridTooSmallError("StencilOperator: every axis needs at least 5 points");
  }
}

StencilOperator StencilOperator::zero(SpatialGrid grid) { return StencilOperator(std::move(grid), true); }

void StencilOperator::apply(const complex* in, complex* out) const {
  const Layout g(grid_);
  if (zero_) {
    std::fill_n(out, grid_.point_count(), complex(0.0));
    return;
  }
  const double ixx = 1.0 / (g.hx * g.hx), iyy = 1.0 / (g.hy * g.hy), itt = 1.0 / (g.ht * g.ht);
  const double iyt = 1.0 / (4.0 * g.hy * g.ht), ixt = 1.0 / (4.0 * g.hx * g.ht);
  auto u = [&](int i, int j, int k) -> complex {
    if (i < 0 || j < 0 || k < 0 || i >= g.nx || j >= g.ny || k >= g.nt) return 0.0;
    return in[g.at(i, j, k)];
  };
  for (int i = 0; i < g.nx; ++i) {
    const double x = g.xs[i];
    for (int j = 0; j < g.ny; ++j) {
      const double y = g.ys[j];
      const double c = 0.25 * (x * x + y * y);
      for (int k = 0; k < g.nt; ++k) {
        const complex u0 = in[g.at(i, j, k)];
        complex r = (u(i + 1, j, k) - 2.0 * u0 + u(i - 1, j, k)) * ixx;
        r += (u(i, j + 1, k) - 2.0 * u0 + u(i, j - 1, k)) * iyy;
        r += c * (u(i, j, k + 1) - 2.0 * u0 + u(i, j, k - 1)) * itt;
        r += x * (u(i, j + 1, k + 1) - u(i, j + 1, k - 1) - u(i, j - 1, k + 1) + u(i, j - 1, k - 1)) * iyt;
        r -= y * (u(i + 1, j, k + 1) - u(i + 1, j, k - 1) - u(i - 1, j, k + 1) + u(i - 1, j, k - 1)) * ixt;
        out[g.at(i, j, k)] = r;
      }
    }
  }
}

SpatialField StencilOperator::apply(const SpatialField& f) const {
  check_same_grid(f.grid, grid_, "StencilOperator::apply");
  SpatialField out(grid_);
  apply(f.samples.data(), out.samples.data());
  return out;
}

double StencilOperator::spectral_radius_bound() const {
  if (zero_) return 0.0;
  const Layout g(grid_);
  double worst = 0.0;
  for (int i = 0; i < g.nx; ++i) {
    for (int j = 0; j < g.ny; ++j) {
      const double x = g.xs[i], y = g.ys[j];
      const double c = 0.25 * (x * x + y * y);
      const double diag = 2.0 / (g.hx * g.hx) + 2.0 / (g.hy * g.hy) + 2.0 * c / (g.ht * g.ht);
      const double off = diag + std::abs(x) / (g.hy * g.ht) + std::abs(y) / (g.hx * g.ht);
      worst = std::max(worst, diag + off);
    }
  }
  return worst;
}

Eigen::MatrixXd StencilOperator::assemble() const {
  const std::size_t n = grid_.point_count();
  if (n > 4096) throw std::invalid_argument("StencilOperator::assemble: grid too large for a dense matrix");
  Eigen::MatrixXd a(n, n);
  std::vector<complex> e(n, 0.0), col(n);
  for (std::size_t c = 0; c < n; ++c) {
    e[c] = 1.0;
    apply(e.data(), col.data());
    for (std::size_t r = 0; r < n; ++r) a(r, c) = col[r].real();
    e[c] = 0.0;
  }
  return a;
}

std::vector<std::size_t> StencilOperator::interior(int margin) const {
  const Layout g(grid_);
  std::vector<std::size_t> out;
  for (int i = margin; i < g.nx - margin; ++i) {
    for (int j = margin; j < g.ny - margin; ++j) {
      for (int k = margin; k < g.nt - margin; ++k) out.push_back(g.at(i, j, k));
    }
  }
  return out;
}

SpatialField apply_subLaplacian(const SpatialField& f) { return StencilOperator(f.grid).apply(f); }

double stable_time_step(const StencilOperator& op, double m) {
  const double rho = op.spectral_radius_bound() + std::max(m, 0.0);
  return rho > 0.0 ? 2.0 / std::sqrt(rho) : std::numeric_limits<double>::infinity();
}

SpatialField step_leapfrog(const StencilOperator& op, const SpatialField& prev, const SpatialField& curr,
                           const LeapfrogParams& params, const SpatialField* source) {
  check_same_grid(prev.grid, op.grid(), "step_leapfrog");
  check_same_grid(curr.grid, op.grid(), "step_leapfrog");
  if (source) check_same_grid(source->grid, op.grid(), "step_leapfrog");
  if (!(params.dt > 0.0)) throw std::invalid_argument("step_leapfrog: dt must be positive");
  const double limit = params.cfl * stable_time_step(op, params.m);
  if (params.dt > limit) {
    throw CflViolationError("step_leapfrog: dt = " + std::to_string(params.dt) + " exceeds the stability limit " +
                            std::to_string(limit));
  }
  SpatialField next(op.grid());
  op.apply(curr.samples.data(), next.samples.data());
  const double dt2 = params.dt * params.dt;
  const double lo = 1.0 - 0.5 * params.b * params.dt, hi = 1.0 + 0.5 * params.b * params.dt;
  for (std::size_t i = 0; i < next.samples.size(); ++i) {
    complex rhs = next.samples[i] - params.m * curr.samples[i];
    if (source) rhs += source->samples[i];
    next.samples[i] = (2.0 * curr.samples[i] - lo * prev.samples[i] + dt2 * rhs) / hi;
  }
  return next;
}

double discrete_energy(const StencilOperator& op, const SpatialField& curr, const SpatialField& next, double dt,
                       double m) {
  std::vector<complex> lu(next.samples.size());
  op.apply(next.samples.data(), lu.data());
  double e = 0.0;
  for (std::size_t i = 0; i < lu.size(); ++i) {
    e += std::norm((next.samples[i] - curr.samples[i]) / dt);
    e += std::real(std::conj(curr.samples[i]) * (m * next.samples[i] - lu[i]));
  }
  return e * op.grid().cell_volume();
}

FdRun run_leapfrog(const StencilOperator& op, const SpatialField& u0, const SpatialField& u1, double b, double m,
                   const std::vector<double>& sample_times, double dt, const SourceFn& source) {
  if (sample_times.empty() || !std::is_sorted(sample_times.begin(), sample_times.end()) ||
      sample_times.front() < 0.0) {
    throw std::invalid_argument("run_leapfrog: sample times must be sorted and non-negative");
  }
  if (!(dt > 0.0)) throw std::invalid_argument("run_leapfrog: dt must be positive");
  const double T = sample_times.back();
  // Smallest step count whose grid contains every sample time.
  std::size_t steps = 0;
  if (T > 0.0) {
    const std::size_t first = static_cast<std::size_t>(std::ceil(T / dt - 1e-9));
    for (std::size_t n = std::max<std::size_t>(first, 1); n <= 64 * std::max<std::size_t>(first, 1); ++n) {
      bool ok = true;
      for (double s : sample_times) {
        const double q = s / T * static_cast<double>(n);
        if (std::abs(q - std::round(q)) > 1e-9 * n) ok = false;
      }
      if (ok) {
        steps = n;
        break;
      }
    }
    if (steps == 0) throw std::invalid_argument("run_leapfrog: sample times are not commensurate with dt");
  }
  FdRun run;
  run.steps = steps;
  run.dt = steps ? T / static_cast<double>(steps) : dt;
  const LeapfrogParams params{run.dt, b, m};
  std::vector<std::size_t> sample_step;
  for (double s : sample_times) sample_step.push_back(steps ? static_cast<std::size_t>(std::llround(s / T * steps)) : 0);

  auto record = [&](std::size_t n, const SpatialField& u) {
    for (std::size_t i = 0; i < sample_step.size(); ++i) {
      if (sample_step[i] == n) {
        run.times.push_back(sample_times[i]);
        run.snapshots.push_back(u);
        run.boundary_ratio = std::max(run.boundary_ratio, boundary_decay_ratio(u));
      }
    }
  };
  record(0, u0);
  if (steps == 0) return run;

  const double h = run.dt;
  if (h > params.cfl * stable_time_step(op, m)) {
    throw CflViolationError("run_leapfrog: dt exceeds the stability limit");
  }
  SpatialField prev = u0;
  SpatialField curr(op.grid());
  {
    std::vector<complex> lu(u0.samples.size());
    op.apply(u0.samples.data(), lu.data());
    const SpatialField s0 = source ? source(0.0) : SpatialField(op.grid());
    for (std::size_t i = 0; i < lu.size(); ++i) {
      const complex acc = lu[i] - m * u0.samples[i] - b * u1.samples[i] + s0.samples[i];
      curr.samples[i] = u0.samples[i] + h * u1.samples[i] + 0.5 * h * h * acc;
    }
  }
  record(1, curr);
  run.energy.push_back(discrete_energy(op, prev, curr, h, m));
  for (std::size_t n = 1; n < steps; ++n) {
    SpatialField next;
    if (source) {
      const SpatialField s = source(static_cast<double>(n) * h);
      next = step_leapfrog(op, prev, curr, params, &s);
    } else {
      next = step_leapfrog(op, prev, curr, params);
    }
    run.energy.push_back(discrete_energy(op, curr, next, h, m));
    prev = std::move(curr);
    curr = std::move(next);
    record(n + 1, curr);
  }
  return run;
}

ComparisonReport compare_with_spectral(const std::vector<SpatialField>& spectral, const FdRun& run,
                                       double tolerance, int margin) {
  if (spectral.size() != run.snapshots.size()) {
    throw std::invalid_argument("compare_with_spectral: sample counts differ");
  }
  ComparisonReport report;
  report.times = run.times;
  if (spectral.empty()) {
    report.passed = true;
    return report;
  }
  const StencilOperator op(run.snapshots.front().grid);
  const auto idx = op.interior(margin);
  for (std::size_t s = 0; s < spectral.size(); ++s) {
    check_same_grid(spectral[s].grid, run.snapshots[s].grid, "compare_with_spectral");
    double num = 0.0;
    for (std::size_t i : idx) num += std::norm(spectral[s].samples[i] - run.snapshots[s].samples[i]);
    const double den = interior_norm2(spectral[s].samples, idx);
    const double d = den > 0.0 ? std::sqrt(num / den) : (num > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    report.discrepancy.push_back(d);
    report.max_discrepancy = std::max(report.max_discrepancy, d);
  }
  report.passed = report.max_discrepancy <= tolerance;
  return report;
}

complex ManufacturedSolution::value(double x, double y, double tau, double t) const {
  const double g = std::exp(-alpha * ((x - x0) * (x - x0) + y * y) - beta * tau * tau);
  return std::cos(omega * t) * g;
}

complex ManufacturedSolution::source(double x, double y, double tau, double t) const {
  const double G = std::exp(-alpha * ((x - x0) * (x - x0) + y * y) - beta * tau * tau);
  const double r2 = (x - x0) * (x - x0) + y * y;
  const double lg = 4 * alpha * alpha * r2 - 4 * alpha + 0.25 * (x * x + y * y) * (4 * beta * beta * tau * tau - 2 * beta) +
                    4 * alpha * beta * x0 * y * tau;
  const double g = std::cos(omega * t), gp = -omega * std::sin(omega * t), gpp = -omega * omega * g;
  return (gpp + b * gp + m * g) * G - g * lg * G;
}

SpatialField ManufacturedSolution::sample_value(const SpatialGrid& g, double t) const {
  return SpatialField::sample(g, [&](const std::vector<double>& p) { return value(p[0], p[1], p[2], t); });
}

SpatialField ManufacturedSolution::sample_velocity(const SpatialGrid& g, double t) const {
  const double ratio = -omega * std::sin(omega * t);
  return SpatialField::sample(g, [&](const std::vector<double>& p) {
    return ratio * std::exp(-alpha * ((p[0] - x0) * (p[0] - x0) + p[1] * p[1]) - beta * p[2] * p[2]);
  });
}

SpatialField ManufacturedSolution::sample_source(const SpatialGrid& g, double t) const {
  return SpatialField::sample(g, [&](const std::vector<double>& p) { return source(p[0], p[1], p[2], t); });
}

OrderStudy manufactured_order_study(const ManufacturedSolution& ms, double half_width,
                                    const std::vector<int>& points, double T, double courant) {
  if (points.size() < 2) throw std::invalid_argument("manufactured_order_study: need at least two grids");
  OrderStudy study;
  for (int n : points) {
    const auto grid = SpatialGrid::heisenberg(1, half_width, half_width, half_width, n, n, n);
    const StencilOperator op(grid);
    const double h = grid.spacing(0);
    const auto run = run_leapfrog(op, ms.sample_value(grid, 0.0), ms.sample_velocity(grid, 0.0), ms.b, ms.m, {T},
                                  courant * h, [&](double t) { return ms.sample_source(grid, t); });
    const auto exact = ms.sample_value(grid, T);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < exact.samples.size(); ++i) {
      num += std::norm(run.snapshots.back().samples[i] - exact.samples[i]);
      den += std::norm(exact.samples[i]);
    }
    study.points.push_back(n);
    study.spacing.push_back(h);
    study.errors.push_back(std::sqrt(num / den));
  }
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < study.errors.size(); ++i) {
    lx.push_back(std::log(study.spacing[i]));
    ly.push_back(std::log(study.errors[i]));
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / lx.size();
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / ly.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  study.order = sxy / sxx;
  return study;
}

ResidualReport semilinear_residual(const Trajectory& trajectory, const Nonlinearity& nl, double b, double m,
                                   const SpectralTransform& transform, const std::vector<std::size_t>& indices,
                                   int margin) {
  if (trajectory.size() < 5) throw std::invalid_argument("semilinear_residual: need at least 5 samples");
  if (nl.components() != 1) {
    throw std::invalid_argument("semilinear_residual: only nonlinearities of u alone are supported");
  }
  const double dt = trajectory.times[1] - trajectory.times[0];
  const StencilOperator op(transform.spatial());
  const auto idx = op.interior(margin);
  ResidualReport report;
  for (std::size_t j : indices) {
    if (j < 2 || j + 2 >= trajectory.size()) {
      throw std::invalid_argument("semilinear_residual: sample index needs two neighbours on each side");
    }
    const auto& d = trajectory.derivatives;
    SpectralField acc = complex(8.0 / (12.0 * dt)) * (d[j + 1] - d[j - 1]);
    acc -= complex(1.0 / (12.0 * dt)) * (d[j + 2] - d[j - 2]);
    const auto fields = transform.synthesize_batch({trajectory.values[j], d[j], acc});
    const auto& u = fields[0];
    const auto& ut = fields[1];
    const auto& utt = fields[2];
    const auto lu = op.apply(u);
    double res = 0.0, n_tt = 0.0, n_l = 0.0, n_t = 0.0, n_u = 0.0, n_f = 0.0;
    for (std::size_t i : idx) {
      const complex ui[] = {u.samples[i]};
      const complex f = nl.evaluate(ui);
      const complex r = utt.samples[i] - lu.samples[i] + b * ut.samples[i] + m * u.samples[i] - f;
      res += std::norm(r);
      n_tt += std::norm(utt.samples[i]);
      n_l += std::norm(lu.samples[i]);
      n_t += std::norm(ut.samples[i]);
      n_u += std::norm(u.samples[i]);
      n_f += std::norm(f);
    }
    const double scale = std::sqrt(n_tt) + std::sqrt(n_l) + b * std::sqrt(n_t) + m * std::sqrt(n_u) + std::sqrt(n_f);
    const double rel = scale > 0.0 ? std::sqrt(res) / scale : 0.0;
    report.times.push_back(trajectory.times[j]);
    report.relative.push_back(rel);
    report.max_relative = std::max(report.max_relative, rel);
  }
  return report;
}

}  // namespace hwave::fd
