// hwave: batch runner for the damped-wave spectral solver and its checks.

#include "hwave/config.hpp"
#include "hwave/fd.hpp"
#include "hwave/gn.hpp"
#include "hwave/io.hpp"
#include "hwave/propagator.hpp"
#include "hwave/semilinear.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numbers>

namespace fs = std::filesystem;
using namespace hwave;
using nlohmann::json;

namespace {

struct Tolerances {
  double decay = 0.05;           // relative slack on delta0
  double oracle = 1e-2;          // spectral vs fd relative L2
  double order = 0.3;            // |fd order - 2|
  double picard = 1e-10;         // Picard increment tolerance (overrides the config when stricter)
  double dilation = 1e-2;        // GN ratio spread under dilation
};

Tolerances profile(const std::string& name) {
  Tolerances t;
  if (name == "strict") {
    t.decay = 0.01;
    t.oracle = 5e-3;
    t.order = 0.15;
    t.picard = 1e-12;
    t.dilation = 1e-3;
  }
  return t;
}

struct Context {
  std::string command;
  fs::path config_path;
  fs::path out = "out";
  std::optional<std::uint64_t> seed;
  int threads = 1;
  std::string tolerance_profile = "default";

  RunConfig config;
  Tolerances tol;
  json results = json::object();
  std::vector<fs::path> outputs;
  std::vector<std::string> failures;

  fs::path file(const std::string& name) {
    outputs.push_back(out / name);
    return out / name;
  }
  void check(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
};

std::vector<double> uniform_times(double t_end, int steps) {
  std::vector<double> t;
  for (int i = 0; i <= steps; ++i) t.push_back(t_end * i / steps);
  return t;
}

void write_trajectory(Context& ctx, const std::string& name, const Trajectory& traj, const SymbolProvider& provider) {
  io::CsvWriter csv(ctx.file(name), {"t", "l2", "sobolev_1", "rockland_half", "dt_l2"});
  const double nu = provider.degree();
  for (std::size_t i = 0; i < traj.size(); ++i) {
    csv.row({traj.times[i], l2_norm(traj.values[i]), sobolev_norm(traj.values[i], provider, 1.0),
             homogeneous_sobolev_norm(traj.values[i], provider, nu / 2), l2_norm(traj.derivatives[i])});
  }
}

void linear_decay(Context& ctx, bool write_traj) {
  const auto& c = ctx.config;
  const auto problem = build_problem(c);
  ctx.results["plancherel_constant"] = problem.plancherel_constant;
  ctx.results["data_scale"] = problem.data_scale;
  const auto traj = evolve_linear(problem.u0, problem.u1, c.b, c.m, problem.provider,
                                  uniform_times(c.time.t_end, c.time.steps));
  if (write_traj) write_trajectory(ctx, "trajectory.csv", traj, problem.provider);
  io::CsvWriter csv(ctx.file("decay.csv"),
                    {"s", "delta0", "fitted_slope", "slope_bound", "fitted_constant", "trivial", "passed"});
  DecayOptions opts;
  opts.tolerance = ctx.tol.decay;
  for (double s : {0.0, 1.0}) {
    const auto rep = verify_decay(traj, problem.provider, s, c.m, c.b, opts);
    csv.row({s, rep.delta0, rep.fitted_slope, rep.slope_bound, rep.fitted_constant, (long long)rep.trivial,
             (long long)rep.passed()});
    ctx.check(rep.passed(), "decay slope for H^" + io::format_double(s) + " above bound");
    ctx.results["slope_H" + io::format_double(s)] = rep.fitted_slope;
  }
}

int cmd_evolve_semilinear(Context& ctx) {
  const auto& c = ctx.config;
  const auto problem = build_problem(c);
  ctx.results["plancherel_constant"] = problem.plancherel_constant;
  ctx.results["data_scale"] = problem.data_scale;
  const auto nl = build_nonlinearity(c);
  const auto z = ZNormConfig::uniform(default_z_delta(c.b, c.m), c.time.t_end, c.time.steps, problem.provider.degree());
  PicardOptions opts;
  opts.tolerance = std::min(c.picard.tolerance, ctx.tol.picard);
  opts.max_iter = c.picard.max_iter;
  opts.r = c.picard.r;
  opts.divergence_factor = c.picard.divergence_factor;
  opts.nonlinearity.boundary_tolerance = c.picard.boundary_tolerance;
  const auto r = picard_solve(problem.u0, problem.u1, nl, c.b, c.m, problem.provider, *problem.transform, z, opts);
  const auto& d = r.diagnostics;
  {
    io::CsvWriter csv(ctx.file("picard.csv"), {"iteration", "z_norm", "increment", "ratio"});
    for (std::size_t i = 0; i < d.z_norms.size(); ++i) {
      // Row 0 is the linear solution; increments start at iterate 1, ratios at iterate 2.
      const io::CsvWriter::Cell empty = std::string();
      const auto& inc = d.increments;
      io::CsvWriter::Cell increment = i >= 1 ? io::CsvWriter::Cell(inc[i - 1]) : empty;
      io::CsvWriter::Cell ratio = empty;
      if (i >= 2 && inc[i - 2] > 0.0 && inc[i - 1] > 0.0) ratio = inc[i - 1] / inc[i - 2];
      csv.row({(long long)i, d.z_norms[i], increment, ratio});
    }
  }
  ctx.results["status"] = to_string(d.status);
  ctx.results["iterations"] = d.iterations;
  ctx.results["data_norm"] = d.data_norm;
  ctx.results["linear_z_norm"] = d.linear_z_norm;
  ctx.results["l_threshold"] = d.l_threshold;
  ctx.results["richardson"] = d.richardson;
  if (!d.note.empty()) ctx.results["note"] = d.note;
  const bool converged = d.status == PicardStatus::Converged && d.all_ratios_below(1.0);
  ctx.check(converged, "Picard iteration did not converge with contraction ratios below 1");
  if (converged) {
    write_trajectory(ctx, "trajectory.csv", r.trajectory, problem.provider);
    const auto decay = verify_semilinear_decay(r.trajectory, problem.provider);
    io::CsvWriter csv(ctx.file("decay.csv"), {"seminorm", "slope"});
    for (std::size_t i = 0; i < decay.slopes.size(); ++i) csv.row({decay.names[i], decay.slopes[i]});
    ctx.check(decay.all_negative || decay.trivial, "semilinear decay slope not negative");
  }
  if (c.picard.search_epsilon) {
    auto unit = problem.u0;
    auto unit1 = problem.u1;
    const double dn = data_norm(unit, unit1, problem.provider);
    unit *= 1.0 / dn;
    unit1 *= 1.0 / dn;
    ProblemTemplate tmpl{unit, unit1, nl, c.b, c.m, &problem.provider, problem.transform.get(), z, opts};
    const auto s = find_epsilon0(tmpl, c.picard.epsilon_lo, c.picard.epsilon_hi, c.picard.trials);
    io::CsvWriter csv(ctx.file("epsilon0.csv"), {"epsilon0", "upper", "width", "runs", "retest_converged"});
    csv.row({s.epsilon0, s.upper, s.width, (long long)s.runs, (long long)s.retest_converged});
  }
  return 0;
}

int cmd_gn_check(Context& ctx) {
  const auto& g = ctx.config.gn;
  const auto seed = ctx.config.seed;
  const gn::Rational Q(2 * g.n + 2);
  {
    io::CsvWriter csv(ctx.file("gn_exponents.csv"), {"n", "q", "theta", "theta_decimal", "corollary"});
    for (const auto& qs : g.q_values) {
      const auto q = gn::parse_rational(qs);
      const auto theta = gn::gn_exponent_heisenberg(q, g.n);
      const auto cor = gn::gn_exponent_corollary(q, Q, 1);
      csv.row({(long long)g.n, gn::to_string(q), gn::to_string(theta), gn::to_double(theta), gn::to_string(cor)});
      std::printf("q=%s theta=%s\n", gn::to_string(q).c_str(), gn::to_string(theta).c_str());
      ctx.check(theta == cor, "theta and corollary disagree at q=" + qs);
    }
  }
  const auto e = gn::gn_exponent_graded(gn::parse_rational(g.Q), gn::parse_rational(g.a), gn::parse_rational(g.r),
                                        gn::parse_rational(g.p), gn::parse_rational(g.q));
  ctx.results["graded_s"] = gn::to_string(e.s);
  ctx.results["graded_degenerate"] = e.degenerate;

  // Heisenberg sweep: seeded Hermite family, one empirical constant per q.
  if (g.n == 1) {
    const auto& c = ctx.config;
    const auto spatial = SpatialGrid::heisenberg(1, c.spatial.half_widths[0], c.spatial.half_widths[1],
                                                 c.spatial.half_widths[2], c.spatial.points[0], c.spatial.points[1],
                                                 c.spatial.points[2]);
    const auto problem = build_problem(c);
    const SpectralTransform tr(problem.grid, spatial);
    std::vector<std::string> desc;
    const auto family = gn::random_hermite_fields(problem.grid, seed, g.family_size, {}, &desc);
    io::CsvWriter ratios(ctx.file("gn_ratios.csv"), {"q", "index", "ratio", "lq", "sobolev", "lp", "descriptor"});
    io::CsvWriter consts(ctx.file("gn_constants.csv"), {"q", "theta", "bound", "median", "argmax"});
    for (const auto& qs : g.q_values) {
      const auto q = gn::parse_rational(qs);
      auto reps = gn::verify_inequality_heisenberg(family, q, 1, tr);
      for (std::size_t i = 0; i < reps.size(); ++i) {
        reps[i].descriptor = desc[i];
        ratios.row({gn::to_string(q), (long long)i, reps[i].ratio, reps[i].lq, reps[i].sobolev, reps[i].lp, desc[i]});
        ctx.check(reps[i].finite, "non-finite GN ratio");
      }
      const auto ec = gn::empirical_constant(reps);
      consts.row({gn::to_string(q), gn::to_string(gn::gn_exponent_heisenberg(q, 1)), ec.bound, ec.median, ec.argmax});
    }
  }

  // Abelian dilation sweep of a Gaussian when the tuple has a spectral multiplier.
  if (!e.algebra_only && e.Q == gn::Rational(3) && !e.degenerate) {
    io::CsvWriter csv(ctx.file("gn_dilation.csv"), {"dilation", "ratio", "lq", "sobolev", "lp"});
    std::vector<double> values;
    for (double s : g.dilations) {
      const auto grid = SpatialGrid::abelian(3, g.abelian_points, g.abelian_half_width / s);
      const auto u = SpatialField::sample(grid, [&](const std::vector<double>& x) {
        return complex(std::exp(-s * s * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / 2));
      });
      const auto rep = gn::verify_inequality_abelian(u, e);
      csv.row({s, rep.ratio, rep.lq, rep.sobolev, rep.lp});
      values.push_back(rep.ratio);
    }
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    const double spread = (*hi - *lo) / *lo;
    ctx.results["dilation_spread"] = spread;
    ctx.check(spread <= ctx.tol.dilation, "GN ratio not dilation invariant");
  }
  return 0;
}

int cmd_oracle_compare(Context& ctx) {
  const auto& c = ctx.config;
  if (c.backend.type != "heisenberg" || c.backend.n != 1) throw std::invalid_argument("oracle-compare: needs backend heisenberg with n = 1");
  const auto problem = build_problem(c);
  ctx.results["plancherel_constant"] = problem.plancherel_constant;
  const auto times = uniform_times(c.time.t_end, c.fd.samples);
  const auto traj = evolve_linear(problem.u0, problem.u1, c.b, c.m, problem.provider, times);
  const auto box = SpatialGrid::heisenberg(1, c.fd.half_widths[0], c.fd.half_widths[1], c.fd.half_widths[2],
                                           c.fd.points[0], c.fd.points[1], c.fd.points[2]);
  const SpectralTransform synth(problem.grid, box);
  const auto values = synth.synthesize_batch(traj.values);
  const auto v1 = synth.synthesize(traj.derivatives.front());
  const fd::StencilOperator op(box);
  const auto run = fd::run_leapfrog(op, values.front(), v1, c.b, c.m, times, c.fd.dt_fraction * fd::stable_time_step(op, c.m));
  const auto cmp = fd::compare_with_spectral(values, run, ctx.tol.oracle);
  {
    io::CsvWriter csv(ctx.file("oracle.csv"), {"t", "relative_l2"});
    for (std::size_t i = 0; i < cmp.times.size(); ++i) csv.row({cmp.times[i], cmp.discrepancy[i]});
  }
  ctx.results["fd_dt"] = run.dt;
  ctx.results["fd_steps"] = run.steps;
  ctx.results["max_discrepancy"] = cmp.max_discrepancy;
  ctx.check(cmp.max_discrepancy <= ctx.tol.oracle, "spectral vs fd discrepancy above tolerance");

  const auto study = fd::manufactured_order_study(fd::ManufacturedSolution{}, c.fd.half_widths[0], c.fd.order_points, 1.0);
  {
    io::CsvWriter csv(ctx.file("fd_order.csv"), {"points", "h", "relative_l2"});
    for (std::size_t i = 0; i < study.points.size(); ++i) csv.row({(long long)study.points[i], study.spacing[i], study.errors[i]});
  }
  ctx.results["fd_order"] = study.order;
  ctx.check(std::abs(study.order - 2.0) <= ctx.tol.order, "fd convergence order outside 2 +- tolerance");
  return 0;
}

int cmd_calibrate(Context& ctx) {
  const auto problem = build_problem(ctx.config);
  const double reference = 1.0 / (4 * std::numbers::pi * std::numbers::pi);
  io::CsvWriter csv(ctx.file("calibration.csv"), {"constant", "reference_1_over_4pi2", "relative_difference"});
  csv.row({problem.plancherel_constant, reference, problem.plancherel_constant / reference - 1.0});
  ctx.results["plancherel_constant"] = problem.plancherel_constant;
  std::printf("plancherel constant %s\n", io::format_double(problem.plancherel_constant).c_str());
  return 0;
}

void write_manifest(Context& ctx, double seconds) {
  json m;
  m["command"] = ctx.command;
  m["config_file"] = ctx.config_path.string();
  m["inputs"] = {{ctx.config_path.filename().string(), io::git_blob_hash_file(ctx.config_path)}};
  m["config"] = json::parse(serialize_config(ctx.config));
  m["seed"] = ctx.config.seed;
  m["threads"] = ctx.threads;
  m["tolerance_profile"] = ctx.tolerance_profile;
  m["tolerances"] = {{"decay", ctx.tol.decay},     {"oracle", ctx.tol.oracle},     {"order", ctx.tol.order},
                     {"picard", ctx.tol.picard},   {"dilation", ctx.tol.dilation}};
  m["results"] = ctx.results;
  json outputs = json::object();
  for (const auto& p : ctx.outputs) outputs[p.filename().string()] = io::git_blob_hash_file(p);
  m["outputs"] = outputs;
  m["failures"] = ctx.failures;
  m["passed"] = ctx.failures.empty();
  m["seconds"] = seconds;
  std::ofstream(ctx.out / "manifest.json") << m.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral solver and verification harness for damped wave equations on H^n and R^d"};
  app.require_subcommand(1, 1);
  Context ctx;
  std::string config_file;
  std::uint64_t seed = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_file, "JSON run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", ctx.out, "output directory")->capture_default_str();
    sub->add_option("--seed", seed, "overrides the config seed");
    sub->add_option("--threads", ctx.threads, "worker threads (recorded; execution is single-threaded)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--tolerance-profile", ctx.tolerance_profile, "tolerance profile")
        ->check(CLI::IsMember({"strict", "default"}))
        ->capture_default_str();
  };
  struct Sub {
    const char* name;
    const char* help;
    std::function<int(Context&)> run;
  };
  const std::vector<Sub> subs{
      {"evolve-linear", "mode-wise linear evolution, trajectory and decay report",
       [](Context& c) { linear_decay(c, true); return 0; }},
      {"evolve-semilinear", "Picard solve with diagnostics and decay report", cmd_evolve_semilinear},
      {"verify-decay", "linear decay report only", [](Context& c) { linear_decay(c, false); return 0; }},
      {"gn-check", "GN exponent tables and inequality sweeps", cmd_gn_check},
      {"oracle-compare", "spectral solution against the finite-difference oracle", cmd_oracle_compare},
      {"calibrate", "Plancherel constant of the configured grid", cmd_calibrate},
  };
  std::vector<CLI::App*> apps;
  for (const auto& s : subs) {
    apps.push_back(app.add_subcommand(s.name, s.help));
    add_common(apps.back());
  }
  CLI11_PARSE(app, argc, argv);

  std::size_t which = 0;
  while (!apps[which]->parsed()) ++which;
  ctx.command = subs[which].name;
  ctx.config_path = config_file;
  ctx.tol = profile(ctx.tolerance_profile);
  try {
    ctx.config = parse_config(io::read_text(ctx.config_path));
  } catch (const ConfigError& e) {
    std::cerr << e.what() << '\n';
    return 3;
  }
  if (apps[which]->count("--seed")) ctx.config.seed = seed;

  const auto t0 = std::chrono::steady_clock::now();
  try {
    fs::create_directories(ctx.out);
    subs[which].run(ctx);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << ctx.command << ": " << e.what() << '\n';
    return 1;
  }
  write_manifest(ctx, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  for (const auto& f : ctx.failures) std::cerr << "FAIL: " << f << '\n';
  std::printf("%s: %s (%s)\n", ctx.command.c_str(), ctx.failures.empty() ? "ok" : "FAILED", (ctx.out / "manifest.json").c_str());
  return ctx.failures.empty() ? 0 : 2;
}
