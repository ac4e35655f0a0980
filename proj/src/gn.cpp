#include "hwave/gn.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace hwave::gn {

Rational parse_rational(const std::string& text) {
  const auto slash = text.find('/');
  try {
    if (slash == std::string::npos) return Rational(boost::multiprecision::cpp_int(text));
    const boost::multiprecision::cpp_int num(text.substr(0, slash));
    const boost::multiprecision::cpp_int den(text.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("parse_rational: zero denominator in '" + text + "'");
    return Rational(num, den);
  } catch (const std::runtime_error&) {
    throw std::invalid_argument("parse_rational: cannot parse '" + text + "'");
  }
}

std::string to_string(const Rational& r) {
  std::ostringstream os;
  os << numerator(r);
  if (denominator(r) != 1) os << '/' << denominator(r);
  return os.str();
}

double to_double(const Rational& r) { return r.convert_to<double>(); }

Rational gn_exponent_heisenberg(const Rational& q, int n) {
  if (n < 1) throw ConstraintError("n >= 1", "gn_exponent_heisenberg: n must be >= 1");
  const Rational upper = 2 + Rational(2, n);
  if (q < 2 || q > upper) {
    throw ConstraintError("2 <= q <= 2 + 2/n", "gn_exponent_heisenberg: q = " + to_string(q) + " outside [2, " +
                                                   to_string(upper) + "]");
  }
  const Rational Q = 2 * n + 2;
  return Q * (q - 2) / (2 * q);
}

GNExponents gn_exponent_graded(const Rational& Q, const Rational& a, const Rational& r, const Rational& p,
                               const Rational& q) {
  if (Q <= 0) throw ConstraintError("Q > 0", "gn_exponent_graded: Q must be positive");
  if (a <= 0) throw ConstraintError("a > 0", "gn_exponent_graded: a must be positive");
  if (!(r > 1)) throw ConstraintError("1 < r", "gn_exponent_graded: need r > 1, got " + to_string(r));
  if (!(r < Q / a)) {
    throw ConstraintError("r < Q/a", "gn_exponent_graded: need r < Q/a = " + to_string(Q / a) + ", got " + to_string(r));
  }
  if (p < 1) throw ConstraintError("1 <= p", "gn_exponent_graded: need p >= 1, got " + to_string(p));
  if (p > q) throw ConstraintError("p <= q", "gn_exponent_graded: need p <= q");
  const Rational top = r * Q / (Q - a * r);
  if (q > top) {
    throw ConstraintError("q <= rQ/(Q - ar)", "gn_exponent_graded: need q <= " + to_string(top) + ", got " + to_string(q));
  }
  GNExponents e{Q, a, r, p, q, 0, false, r != 2};
  const Rational den = e.denominator();
  if (den == 0) {
    // Only p = q = rQ/(Q - ar) survives the constraints here.
    e.degenerate = true;
    e.s = 0;
    return e;
  }
  e.s = (1 / p - 1 / q) / den;
  return e;
}

Rational gn_exponent_corollary(const Rational& q, const Rational& Q, const Rational& a) {
  if (a <= 0) throw ConstraintError("a > 0", "gn_exponent_corollary: a must be positive");
  if (!(Q > 2 * a)) throw ConstraintError("Q > 2a", "gn_exponent_corollary: need Q > 2a");
  const Rational upper = 2 * Q / (Q - 2 * a);
  if (q < 2 || q > upper) {
    throw ConstraintError("2 <= q <= 2Q/(Q - 2a)",
                          "gn_exponent_corollary: q = " + to_string(q) + " outside [2, " + to_string(upper) + "]");
  }
  return Q / a * (Rational(1, 2) - 1 / q);
}

namespace {

RatioReport finish(double lq, double sob, double lp, double s) {
  RatioReport r;
  r.lq = lq;
  r.sobolev = sob;
  r.lp = lp;
  r.exponent = s;
  const double den = (s == 0.0 ? 1.0 : std::pow(sob, s)) * (s == 1.0 ? 1.0 : std::pow(lp, 1.0 - s));
  r.ratio = lq / den;
  r.finite = std::isfinite(r.ratio) && den > 0.0;
  return r;
}

}  // namespace

RatioReport verify_inequality_abelian(const SpatialField& u, const GNExponents& exps, double boundary_tolerance) {
  if (exps.algebra_only) {
    throw std::invalid_argument("verify_inequality_abelian: r != 2 is algebra-only (no spectral multiplier)");
  }
  if (!u.grid.periodic) throw std::invalid_argument("verify_inequality_abelian: needs a periodic box");
  const int d = static_cast<int>(u.grid.axes());
  if (exps.Q != d) throw std::invalid_argument("verify_inequality_abelian: Q must equal the dimension of R^d");
  const double ratio = boundary_decay_ratio(u);
  if (ratio > boundary_tolerance) {
    throw BoundaryDecayError("verify_inequality_abelian: non-integrable tail at the box faces (ratio " +
                             std::to_string(ratio) + ")");
  }
  const auto grid = build_abelian_grid(d, u.grid.shape[0], u.grid.half_widths[0]);
  const SpectralTransform tr(grid, u.grid);
  const auto F = tr.forward(u);
  const double sob = homogeneous_sobolev_norm(F, SymbolProvider::poly_laplacian(d, 1), to_double(exps.a));
  return finish(u.lq_norm(to_double(exps.q)), sob, u.lq_norm(to_double(exps.p)), to_double(exps.s));
}

std::vector<RatioReport> verify_inequality_heisenberg(const std::vector<SpectralField>& u, const Rational& q,
                                                      int n, const SpectralTransform& transform,
                                                      double boundary_tolerance) {
  const double theta = to_double(gn_exponent_heisenberg(q, n));
  const auto provider = SymbolProvider::sub_laplacian();
  const auto spatial = transform.synthesize_batch(u);
  std::vector<RatioReport> out;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double ratio = boundary_decay_ratio(spatial[i]);
    if (ratio > boundary_tolerance) {
      throw BoundaryDecayError("verify_inequality_heisenberg: synthesis tolerance exceeded (boundary ratio " +
                               std::to_string(ratio) + ")");
    }
    out.push_back(finish(spatial[i].lq_norm(to_double(q)), homogeneous_sobolev_norm(u[i], provider, 1.0),
                         spatial[i].l2_norm(), theta));
  }
  return out;
}

RatioReport verify_inequality_heisenberg(const SpectralField& u, const Rational& q, int n,
                                         const SpectralTransform& transform, double boundary_tolerance) {
  return verify_inequality_heisenberg(std::vector<SpectralField>{u}, q, n, transform, boundary_tolerance).front();
}

EmpiricalConstant empirical_constant(std::vector<RatioReport> reports) {
  if (reports.empty()) throw std::invalid_argument("empirical_constant: need at least one trial");
  EmpiricalConstant out;
  out.trials = reports.size();
  std::vector<double> values;
  for (const auto& r : reports) {
    values.push_back(r.ratio);
    if (r.ratio > out.bound || out.argmax.empty()) {
      out.bound = r.ratio;
      out.argmax = r.descriptor;
    }
  }
  std::sort(values.begin(), values.end());
  const std::size_t h = values.size() / 2;
  out.median = values.size() % 2 ? values[h] : 0.5 * (values[h - 1] + values[h]);
  out.reports = std::move(reports);
  return out;
}

GaussianMixture GaussianMixture::random(std::uint64_t seed, int d, int terms) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> weight(-1.0, 1.0), width(0.6, 1.5), centre(-1.5, 1.5);
  GaussianMixture g;
  for (int j = 0; j < terms; ++j) {
    double w = weight(rng);
    if (j == 0) w = 1.0;
    g.weights.push_back(w);
    g.widths.push_back(width(rng));
    std::vector<double> c(d);
    for (auto& v : c) v = centre(rng);
    g.centres.push_back(std::move(c));
  }
  return g;
}

complex GaussianMixture::operator()(const std::vector<double>& x) const {
  double s = 0.0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    double r2 = 0.0;
    for (std::size_t a = 0; a < x.size(); ++a) r2 += (x[a] - centres[j][a]) * (x[a] - centres[j][a]);
    s += weights[j] * std::exp(-r2 / (2 * widths[j] * widths[j]));
  }
  return s;
}

std::string GaussianMixture::descriptor() const {
  std::ostringstream os;
  os.precision(6);
  for (std::size_t j = 0; j < weights.size(); ++j) {
    if (j) os << " + ";
    os << weights[j] << "*g(w=" << widths[j] << ",c=(";
    for (std::size_t a = 0; a < centres[j].size(); ++a) os << (a ? "," : "") << centres[j][a];
    os << "))";
  }
  return os.str();
}

std::vector<SpectralField> random_hermite_fields(const GridPtr& grid, std::uint64_t seed, int count,
                                                 const HermiteFamilyOptions& options,
                                                 std::vector<std::string>* descriptors) {
  if (grid->backend() != Backend::Heisenberg) throw std::invalid_argument("random_hermite_fields: Heisenberg grid required");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> centre(options.centre_lo, options.centre_hi);
  const auto& set = grid->hermite_set();
  std::vector<std::size_t> low;
  for (std::size_t k = 0; k < set.size(); ++k) {
    bool ok = true;
    for (int v : set[k].k) ok = ok && v < options.orders;
    if (ok) low.push_back(k);
  }
  std::vector<SpectralField> out;
  for (int c = 0; c < count; ++c) {
    const double lc = centre(rng);
    std::vector<complex> a(low.size() * low.size());
    for (auto& v : a) v = complex(normal(rng), normal(rng));
    SpectralField f(grid);
    for (std::size_t i = 0; i < grid->lambda_nodes().size(); ++i) {
      const double lam = grid->lambda_nodes()[i];
      if (lam <= 0.0) continue;
      const double env = std::exp(-(lam - lc) * (lam - lc) / (2 * options.width * options.width));
      for (std::size_t r = 0; r < low.size(); ++r) {
        for (std::size_t s = 0; s < low.size(); ++s) f[grid->index(i, low[r], low[s])] = env * a[r * low.size() + s];
      }
    }
    out.push_back(std::move(f));
    if (descriptors) {
      std::ostringstream os;
      os.precision(6);
      os << "hermite(seed=" << seed << ",index=" << c << ",lambda_c=" << lc << ")";
      descriptors->push_back(os.str());
    }
  }
  return out;
}

}  // namespace hwave::gn
