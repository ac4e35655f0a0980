#pragma once

#include "hwave/spectral.hpp"
#include "hwave/transform.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hwave::gn {

using Rational = boost::multiprecision::cpp_rational;

/// Parses "3", "-2", "8/3".
Rational parse_rational(const std::string& text);
std::string to_string(const Rational& r);
double to_double(const Rational& r);

/// A violated exponent constraint; `constraint` names it.
class ConstraintError : public std::invalid_argument {
 public:
  ConstraintError(std::string constraint, const std::string& message)
      : std::invalid_argument(message), constraint(std::move(constraint)) {}
  std::string constraint;
};

/// Exponents of ||u||_{L^q} <= C ||u||_{Hdot^a_r}^s ||u||_{L^p}^{1-s} on a
/// graded group of homogeneous dimension Q.
struct GNExponents {
  Rational Q, a, r, p, q;
  Rational s;
  /// a/Q + 1/p - 1/r == 0: then p = q = rQ/(Q - ar) and every s in [0, 1] works;
  /// s is reported as 0.
  bool degenerate = false;
  /// r != 2: no spectral multiplier for the Sobolev norm, exponents only.
  bool algebra_only = false;

  Rational denominator() const { return a / Q + 1 / p - 1 / r; }
};

/// theta = Q(q - 2)/(2q) with Q = 2n + 2; requires 2 <= q <= 2 + 2/n.
Rational gn_exponent_heisenberg(const Rational& q, int n);

/// s = (1/p - 1/q)/(a/Q + 1/p - 1/r) under 1 < r < Q/a, 1 <= p <= q <= rQ/(Q - ar).
/// Throws ConstraintError naming the first violated condition.
GNExponents gn_exponent_graded(const Rational& Q, const Rational& a, const Rational& r, const Rational& p,
                               const Rational& q);

/// p = r = 2 case: s = (Q/a)(1/2 - 1/q) for 2 <= q <= 2Q/(Q - 2a), Q > 2a.
Rational gn_exponent_corollary(const Rational& q, const Rational& Q, const Rational& a);

struct RatioReport {
  double lq = 0.0;
  double sobolev = 0.0;  // ||u||_{Hdot^a}
  double lp = 0.0;
  double exponent = 0.0; // s or theta
  double ratio = 0.0;
  bool finite = false;
  std::string descriptor;
};

/// ratio = ||u||_{L^q} / (||u||_{Hdot^a}^s ||u||_{L^p}^{1-s}) on R^d (Q = d) for
/// samples on a periodic box; the Sobolev norm uses the multiplier |xi|^a.
/// Throws for algebra-only exponents and for fields that do not decay at the box faces.
RatioReport verify_inequality_abelian(const SpatialField& u, const GNExponents& exps,
                                      double boundary_tolerance = 1e-6);

/// ratio = ||u||_{L^q} / (||grad_H u||_{L2}^theta ||u||_{L2}^{1-theta}) on H^n with
/// ||grad_H u|| = ||(-L)^{1/2} u|| from the coefficients and the L^q, L2
/// norms from synthesis on the transform's box.
RatioReport verify_inequality_heisenberg(const SpectralField& u, const Rational& q, int n,
                                         const SpectralTransform& transform, double boundary_tolerance = 1e-2);

/// Batched form sharing one synthesis pass.
std::vector<RatioReport> verify_inequality_heisenberg(const std::vector<SpectralField>& u, const Rational& q,
                                                      int n, const SpectralTransform& transform,
                                                      double boundary_tolerance = 1e-2);

struct EmpiricalConstant {
  double bound = 0.0;        // max observed ratio
  std::string argmax;        // descriptor of the maximiser
  double median = 0.0;
  std::size_t trials = 0;
  std::vector<RatioReport> reports;
};

/// Lower bound on the best constant: the max ratio over reports (trials >= 1).
EmpiricalConstant empirical_constant(std::vector<RatioReport> reports);

/// Deterministic family of sums of Gaussians on R^d:
///   u = sum_j c_j exp(-|x - x_j|^2 / (2 w_j^2)),
/// parameters drawn from a 64-bit Mersenne twister seeded with `seed`.
struct GaussianMixture {
  std::vector<double> weights;
  std::vector<double> widths;
  std::vector<std::vector<double>> centres;

  static GaussianMixture random(std::uint64_t seed, int d, int terms);
  complex operator()(const std::vector<double>& x) const;
  std::string descriptor() const;
};

/// Random Hermite-coefficient fields on a Heisenberg grid: c_{kl}(lambda) =
/// A_{kl} exp(-(lambda - lambda_c)^2 / (2 width^2)) for k, l < orders, with
/// complex normal A and lambda_c uniform in [centre_lo, centre_hi].
struct HermiteFamilyOptions {
  int orders = 4;
  double centre_lo = 1.5;
  double centre_hi = 2.5;
  double width = 0.5;
};
std::vector<SpectralField> random_hermite_fields(const GridPtr& grid, std::uint64_t seed, int count,
                                                 const HermiteFamilyOptions& options = {},
                                                 std::vector<std::string>* descriptors = nullptr);

}  // namespace hwave::gn
