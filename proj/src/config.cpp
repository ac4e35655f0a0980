#include "hwave/config.hpp"

#include "json.hpp"

#include <cmath>
#include <set>
#include <sstream>

namespace hwave {

using nlohmann::json;

complex GaussianSpec::operator()(const std::vector<double>& p) const {
  // Heisenberg layout (x_1..x_n, y_1..y_n, t) has odd length; R^d otherwise.
  const bool heisenberg = p.size() % 2 == 1 && p.size() >= 3;
  const std::size_t space = heisenberg ? p.size() - 1 : p.size();
  double r2 = 0.0;
  for (std::size_t a = 0; a < space; ++a) {
    const double v = a == 0 ? p[a] - x0 : p[a];
    r2 += v * v;
  }
  if (!heisenberg) return amplitude * std::exp(-alpha * r2);
  const double t = p.back();
  return amplitude * std::exp(-alpha * r2 - t * t / (2 * tau * tau)) * std::exp(complex(0.0, omega * t));
}

SpatialField sample_gaussian(const SpatialGrid& grid, const GaussianSpec& spec) {
  if (grid.periodic) {
    return SpatialField::sample(grid, [&](const std::vector<double>& p) {
      double r2 = 0.0;
      for (std::size_t a = 0; a < p.size(); ++a) {
        const double v = a == 0 ? p[a] - spec.x0 : p[a];
        r2 += v * v;
      }
      return complex(spec.amplitude * std::exp(-spec.alpha * r2));
    });
  }
  return SpatialField::sample(grid, spec);
}

ConfigError::ConfigError(std::vector<std::string> p)
    : std::invalid_argument([&] {
        std::string s = "invalid config:";
        for (const auto& q : p) s += "\n  " + q;
        return s;
      }()),
      problems(std::move(p)) {}

namespace {

// Reads fields from a JSON object, recording problems instead of throwing.
class Reader {
 public:
  Reader(const json& j, std::string path, std::vector<std::string>& problems)
      : j_(j), path_(std::move(path)), problems_(problems) {
    if (!j_.is_object()) problems_.push_back(path_ + ": expected an object");
  }

  template <typename T>
  void opt(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.is_object() || !j_.contains(key)) return;
    read(key, out);
  }

  template <typename T>
  void req(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.is_object() || !j_.contains(key)) {
      problems_.push_back(path_ + "." + key + ": required field missing");
      return;
    }
    read(key, out);
  }

  bool has(const char* key) const { return j_.is_object() && j_.contains(key); }
  const json& at(const char* key) {
    seen_.insert(key);
    return j_.at(key);
  }
  std::string child(const char* key) const { return path_ + "." + key; }

  void finish() {
    if (!j_.is_object()) return;
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) problems_.push_back(path_ + "." + it.key() + ": unknown field");
    }
  }

 private:
  template <typename T>
  void read(const char* key, T& out) {
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      problems_.push_back(path_ + "." + key + ": wrong type");
    }
  }

  const json& j_;
  std::string path_;
  std::vector<std::string>& problems_;
  std::set<std::string> seen_;
};

void read_gaussian(const json& j, const std::string& path, GaussianSpec& g, std::vector<std::string>& problems) {
  Reader r(j, path, problems);
  r.opt("amplitude", g.amplitude);
  r.opt("alpha", g.alpha);
  r.opt("tau", g.tau);
  r.opt("omega", g.omega);
  r.opt("x0", g.x0);
  r.finish();
}

json gaussian_json(const GaussianSpec& g) {
  return {{"amplitude", g.amplitude}, {"alpha", g.alpha}, {"tau", g.tau}, {"omega", g.omega}, {"x0", g.x0}};
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError({std::string("config: JSON parse error: ") + e.what()});
  }
  if (j.is_null()) j = json::object();
  std::vector<std::string> problems;
  RunConfig c;
  Reader top(j, "config", problems);

  if (top.has("backend")) {
    Reader r(top.at("backend"), "backend", problems);
    r.req("type", c.backend.type);
    r.opt("n", c.backend.n);
    r.opt("d", c.backend.d);
    r.opt("coefficients", c.backend.coefficients);
    r.opt("order", c.backend.order);
    r.opt("form", c.backend.form);
    r.finish();
  } else {
    top.req("backend", c.backend.type);
  }

  if (top.has("grid")) {
    Reader r(top.at("grid"), "grid", problems);
    r.opt("lambda_min", c.grid.lambda_min);
    r.opt("lambda_max", c.grid.lambda_max);
    r.opt("nodes_per_sign", c.grid.nodes_per_sign);
    r.opt("mu_max", c.grid.mu_max);
    r.opt("points", c.grid.points);
    r.opt("half_width", c.grid.half_width);
    r.finish();
  } else {
    problems.push_back("config.grid: required section missing");
  }

  if (top.has("spatial")) {
    Reader r(top.at("spatial"), "spatial", problems);
    r.opt("half_widths", c.spatial.half_widths);
    r.opt("points", c.spatial.points);
    r.finish();
  }

  if (top.has("equation")) {
    Reader r(top.at("equation"), "equation", problems);
    r.req("b", c.b);
    r.req("m", c.m);
    r.finish();
  } else {
    problems.push_back("config.equation.b: required field missing");
    problems.push_back("config.equation.m: required field missing");
  }

  if (top.has("data")) {
    Reader r(top.at("data"), "data", problems);
    if (r.has("u0")) {
      read_gaussian(r.at("u0"), "data.u0", c.data.u0, problems);
    } else {
      problems.push_back("data.u0: required field missing");
    }
    if (r.has("u1") && !top.at("data").at("u1").is_null()) {
      c.data.u1 = GaussianSpec{};
      read_gaussian(r.at("u1"), "data.u1", *c.data.u1, problems);
    } else if (r.has("u1")) {
      r.at("u1");
    }
    if (r.has("data_norm") && !top.at("data").at("data_norm").is_null()) {
      double v = 0.0;
      r.opt("data_norm", v);
      c.data.data_norm = v;
    } else if (r.has("data_norm")) {
      r.at("data_norm");
    }
    r.finish();
  } else {
    problems.push_back("config.data.u0: required field missing");
  }

  if (top.has("nonlinearity")) {
    Reader r(top.at("nonlinearity"), "nonlinearity", problems);
    r.req("type", c.nonlinearity.type);
    r.opt("mu_re", c.nonlinearity.mu_re);
    r.opt("mu_im", c.nonlinearity.mu_im);
    r.opt("p", c.nonlinearity.p);
    r.finish();
  }

  if (top.has("time")) {
    Reader r(top.at("time"), "time", problems);
    r.req("t_end", c.time.t_end);
    r.req("steps", c.time.steps);
    r.finish();
  } else {
    problems.push_back("config.time.t_end: required field missing");
    problems.push_back("config.time.steps: required field missing");
  }

  if (top.has("picard")) {
    Reader r(top.at("picard"), "picard", problems);
    r.opt("tolerance", c.picard.tolerance);
    r.opt("max_iter", c.picard.max_iter);
    r.opt("r", c.picard.r);
    r.opt("divergence_factor", c.picard.divergence_factor);
    r.opt("boundary_tolerance", c.picard.boundary_tolerance);
    r.opt("search_epsilon", c.picard.search_epsilon);
    r.opt("epsilon_lo", c.picard.epsilon_lo);
    r.opt("epsilon_hi", c.picard.epsilon_hi);
    r.opt("trials", c.picard.trials);
    r.finish();
  }

  if (top.has("fd")) {
    Reader r(top.at("fd"), "fd", problems);
    r.opt("half_widths", c.fd.half_widths);
    r.opt("points", c.fd.points);
    r.opt("dt_fraction", c.fd.dt_fraction);
    r.opt("samples", c.fd.samples);
    r.opt("order_points", c.fd.order_points);
    r.opt("residual_points", c.fd.residual_points);
    r.opt("residual_half_widths", c.fd.residual_half_widths);
    r.finish();
  }

  if (top.has("gn")) {
    Reader r(top.at("gn"), "gn", problems);
    r.opt("n", c.gn.n);
    r.opt("q_values", c.gn.q_values);
    r.opt("family_size", c.gn.family_size);
    r.opt("Q", c.gn.Q);
    r.opt("a", c.gn.a);
    r.opt("p", c.gn.p);
    r.opt("r", c.gn.r);
    r.opt("q", c.gn.q);
    r.opt("abelian_points", c.gn.abelian_points);
    r.opt("abelian_half_width", c.gn.abelian_half_width);
    r.opt("dilations", c.gn.dilations);
    r.finish();
  }

  top.opt("seed", c.seed);
  top.finish();

  if (problems.empty()) {
    auto more = validate(c);
    problems.insert(problems.end(), more.begin(), more.end());
  }
  if (!problems.empty()) throw ConfigError(std::move(problems));
  return c;
}

std::vector<std::string> validate(const RunConfig& c) {
  std::vector<std::string> p;
  auto positive = [&](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) p.push_back(std::string(name) + ": must be > 0");
  };
  if (c.backend.type != "heisenberg" && c.backend.type != "abelian") {
    p.push_back("backend.type: must be 'heisenberg' or 'abelian'");
  }
  if (c.backend.type == "heisenberg") {
    if (c.backend.n < 1) p.push_back("backend.n: must be >= 1");
    positive(c.grid.lambda_min, "grid.lambda_min");
    if (!(c.grid.lambda_max > c.grid.lambda_min)) p.push_back("grid.lambda_max: must exceed grid.lambda_min");
    if (c.grid.nodes_per_sign < 2) p.push_back("grid.nodes_per_sign: must be >= 2");
    if (!(c.grid.mu_max >= c.backend.n)) p.push_back("grid.mu_max: must be >= n");
    if (c.spatial.half_widths.size() != 3) p.push_back("spatial.half_widths: need [rx, ry, rt]");
    if (c.spatial.points.size() != 3) p.push_back("spatial.points: need [nx, ny, nt]");
    for (double v : c.spatial.half_widths) positive(v, "spatial.half_widths[]");
    for (int v : c.spatial.points) {
      if (v < 2) p.push_back("spatial.points[]: must be >= 2");
    }
    positive(c.data.u0.tau, "data.u0.tau");
  }
  if (c.backend.type == "abelian") {
    if (c.backend.d < 1) p.push_back("backend.d: must be >= 1");
    if (static_cast<int>(c.backend.coefficients.size()) != c.backend.d) {
      p.push_back("backend.coefficients: need one coefficient per dimension");
    }
    for (double v : c.backend.coefficients) positive(v, "backend.coefficients[]");
    if (c.backend.order < 1) p.push_back("backend.order: must be >= 1");
    if (c.backend.form != "isotropic" && c.backend.form != "separable") {
      p.push_back("backend.form: must be 'isotropic' or 'separable'");
    }
    if (c.grid.points < 2 || c.grid.points % 2) p.push_back("grid.points: must be even and >= 2");
    positive(c.grid.half_width, "grid.half_width");
  }
  positive(c.b, "equation.b");
  positive(c.m, "equation.m");
  positive(c.data.u0.alpha, "data.u0.alpha");
  if (c.data.u1) positive(c.data.u1->alpha, "data.u1.alpha");
  if (c.data.data_norm) positive(*c.data.data_norm, "data.data_norm");
  if (c.nonlinearity.type != "zero" && c.nonlinearity.type != "power" && c.nonlinearity.type != "power-tuple") {
    p.push_back("nonlinearity.type: must be 'zero', 'power' or 'power-tuple'");
  }
  if (!(c.nonlinearity.p >= 1.0)) p.push_back("nonlinearity.p: must be >= 1");
  if (c.nonlinearity.type == "power-tuple" && c.backend.type != "abelian") {
    p.push_back("nonlinearity.type: 'power-tuple' needs the abelian backend");
  }
  positive(c.time.t_end, "time.t_end");
  if (c.time.steps < 2) p.push_back("time.steps: must be >= 2");
  positive(c.picard.tolerance, "picard.tolerance");
  if (c.picard.max_iter < 1) p.push_back("picard.max_iter: must be >= 1");
  if (!(c.picard.r > 1.0)) p.push_back("picard.r: must be > 1");
  positive(c.picard.divergence_factor, "picard.divergence_factor");
  positive(c.picard.boundary_tolerance, "picard.boundary_tolerance");
  if (c.picard.search_epsilon && !(c.picard.epsilon_hi > c.picard.epsilon_lo && c.picard.epsilon_lo > 0.0)) {
    p.push_back("picard.epsilon_lo/epsilon_hi: need 0 < lo < hi");
  }
  if (c.picard.trials < 0) p.push_back("picard.trials: must be >= 0");
  if (c.fd.points.size() != 3 || c.fd.half_widths.size() != 3) p.push_back("fd.points/fd.half_widths: need 3 entries");
  for (int v : c.fd.points) {
    if (v < 5) p.push_back("fd.points[]: must be >= 5");
  }
  if (!(c.fd.dt_fraction > 0.0 && c.fd.dt_fraction <= 1.0)) p.push_back("fd.dt_fraction: must be in (0, 1]");
  if (c.fd.samples < 1) p.push_back("fd.samples: must be >= 1");
  if (c.gn.n < 1) p.push_back("gn.n: must be >= 1");
  if (c.gn.family_size < 1) p.push_back("gn.family_size: must be >= 1");
  return p;
}

std::string serialize_config(const RunConfig& c) {
  json j;
  j["backend"] = {{"type", c.backend.type},
                  {"n", c.backend.n},
                  {"d", c.backend.d},
                  {"coefficients", c.backend.coefficients},
                  {"order", c.backend.order},
                  {"form", c.backend.form}};
  j["grid"] = {{"lambda_min", c.grid.lambda_min}, {"lambda_max", c.grid.lambda_max},
               {"nodes_per_sign", c.grid.nodes_per_sign}, {"mu_max", c.grid.mu_max},
               {"points", c.grid.points}, {"half_width", c.grid.half_width}};
  j["spatial"] = {{"half_widths", c.spatial.half_widths}, {"points", c.spatial.points}};
  j["equation"] = {{"b", c.b}, {"m", c.m}};
  j["data"] = {{"u0", gaussian_json(c.data.u0)},
               {"u1", c.data.u1 ? gaussian_json(*c.data.u1) : json(nullptr)},
               {"data_norm", c.data.data_norm ? json(*c.data.data_norm) : json(nullptr)}};
  j["nonlinearity"] = {{"type", c.nonlinearity.type},
                       {"mu_re", c.nonlinearity.mu_re},
                       {"mu_im", c.nonlinearity.mu_im},
                       {"p", c.nonlinearity.p}};
  j["time"] = {{"t_end", c.time.t_end}, {"steps", c.time.steps}};
  j["picard"] = {{"tolerance", c.picard.tolerance},
                 {"max_iter", c.picard.max_iter},
                 {"r", c.picard.r},
                 {"divergence_factor", c.picard.divergence_factor},
                 {"boundary_tolerance", c.picard.boundary_tolerance},
                 {"search_epsilon", c.picard.search_epsilon},
                 {"epsilon_lo", c.picard.epsilon_lo},
                 {"epsilon_hi", c.picard.epsilon_hi},
                 {"trials", c.picard.trials}};
  j["fd"] = {{"half_widths", c.fd.half_widths},
             {"points", c.fd.points},
             {"dt_fraction", c.fd.dt_fraction},
             {"samples", c.fd.samples},
             {"order_points", c.fd.order_points},
             {"residual_points", c.fd.residual_points},
             {"residual_half_widths", c.fd.residual_half_widths}};
  j["gn"] = {{"n", c.gn.n},
             {"q_values", c.gn.q_values},
             {"family_size", c.gn.family_size},
             {"Q", c.gn.Q},
             {"a", c.gn.a},
             {"p", c.gn.p},
             {"r", c.gn.r},
             {"q", c.gn.q},
             {"abelian_points", c.gn.abelian_points},
             {"abelian_half_width", c.gn.abelian_half_width},
             {"dilations", c.gn.dilations}};
  j["seed"] = c.seed;
  return j.dump(2);
}

SymbolProvider build_provider(const BackendConfig& b) {
  if (b.type == "heisenberg") return SymbolProvider::sub_laplacian();
  if (b.form == "separable") return SymbolProvider::abelian_separable(b.coefficients, b.order);
  return SymbolProvider::abelian_isotropic(b.coefficients, b.order);
}

Nonlinearity build_nonlinearity(const RunConfig& c) {
  const complex mu(c.nonlinearity.mu_re, c.nonlinearity.mu_im);
  if (c.nonlinearity.type == "zero") return Nonlinearity::zero();
  if (c.nonlinearity.type == "power") return Nonlinearity::power(mu, c.nonlinearity.p);
  // F(u, R^{1/nu} u) = mu |u|^{p-1} u: the tuple is assembled, only u enters.
  const double p = c.nonlinearity.p;
  return Nonlinearity::general(
      [mu, p](std::span<const complex> v) {
        const double a = std::abs(v[0]);
        return a == 0.0 ? complex(0.0) : mu * std::pow(a, p - 1.0) * v[0];
      },
      p, std::abs(mu), 2);
}

Problem build_problem(const RunConfig& c) {
  if (auto problems = validate(c); !problems.empty()) throw ConfigError(std::move(problems));
  Problem out;
  out.provider = build_provider(c.backend);
  GaussianSpec unit = c.data.u0;
  unit.amplitude = 1.0;
  if (c.backend.type == "heisenberg") {
    const int n = c.backend.n;
    out.spatial = SpatialGrid::heisenberg(n, c.spatial.half_widths[0], c.spatial.half_widths[1],
                                          c.spatial.half_widths[2], c.spatial.points[0], c.spatial.points[1],
                                          c.spatial.points[2]);
    const auto raw = build_grid(c.grid.lambda_min, c.grid.lambda_max, c.grid.nodes_per_sign, c.grid.mu_max, n);
    const auto cal = calibrate_plancherel(sample_gaussian(out.spatial, unit), raw);
    out.grid = cal.grid;
    out.plancherel_constant = cal.constant;
  } else {
    out.spatial = SpatialGrid::abelian(c.backend.d, c.grid.points, c.grid.half_width);
    out.grid = build_abelian_grid(c.backend.d, c.grid.points, c.grid.half_width);
    out.plancherel_constant = out.grid->plancherel_constant();
  }
  out.transform = std::make_shared<SpectralTransform>(out.grid, out.spatial);
  out.u0 = out.transform->forward(sample_gaussian(out.spatial, c.data.u0));
  out.u1 = c.data.u1 ? out.transform->forward(sample_gaussian(out.spatial, *c.data.u1)) : SpectralField(out.grid);
  if (c.data.data_norm) {
    const double dn = data_norm(out.u0, out.u1, out.provider);
    if (!(dn > 0.0)) throw std::invalid_argument("build_problem: cannot normalize zero data");
    out.data_scale = *c.data.data_norm / dn;
    out.u0 *= out.data_scale;
    out.u1 *= out.data_scale;
  }
  return out;
}

}  // namespace hwave
