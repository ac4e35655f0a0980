#include "hwave/gn.hpp"

#include <doctest.h>

using namespace hwave;
using namespace hwave::gn;

TEST_CASE("rational parsing") {
  CHECK(parse_rational("8/3") == Rational(8, 3));
  CHECK(parse_rational("4") == Rational(4));
  CHECK(to_string(Rational(6, 4)) == "3/2");
  CHECK_THROWS_AS(parse_rational("1/0"), std::invalid_argument);
  CHECK_THROWS_AS(parse_rational("x"), std::invalid_argument);
}

TEST_CASE("graded exponents") {
  CHECK(gn_exponent_graded(4, 1, 2, 2, 4).s == 1);
  CHECK(gn_exponent_graded(4, 1, 2, 3, 3).s == 0);
  CHECK(gn_exponent_graded(3, 1, 2, 2, 3).s == Rational(1, 2));
  // a/Q + 1/p - 1/r = 0 at p = 4: only q = p = rQ/(Q - ar) = 4 is admissible.
  const auto d = gn_exponent_graded(4, 1, 2, 4, 4);
  CHECK(d.degenerate);
  CHECK(d.s == 0);
  CHECK_FALSE(gn_exponent_graded(4, 1, 2, 2, 4).algebra_only);
  CHECK(gn_exponent_graded(4, 1, Rational(3, 2), 2, 2).algebra_only);
  try {
    gn_exponent_graded(4, 1, 2, 2, 5);
    FAIL("expected a constraint error");
  } catch (const ConstraintError& e) {
    CHECK(e.constraint == "q <= rQ/(Q - ar)");
  }
  CHECK_THROWS_AS(gn_exponent_graded(2, 1, 2, 2, 2), ConstraintError);
  CHECK_THROWS_AS(gn_exponent_graded(4, 1, 2, 3, 2), ConstraintError);
}

TEST_CASE("Heisenberg exponent and corollary agree") {
  CHECK(gn_exponent_heisenberg(3, 1) == Rational(2, 3));
  CHECK(gn_exponent_heisenberg(4, 1) == 1);
  CHECK(gn_exponent_heisenberg(2, 1) == 0);
  CHECK_THROWS_AS(gn_exponent_heisenberg(5, 1), ConstraintError);
  for (int n = 1; n <= 4; ++n) {
    for (const Rational q : {Rational(2), Rational(5, 2), 2 + Rational(2, n)}) {
      CHECK(gn_exponent_heisenberg(q, n) == gn_exponent_corollary(q, 2 * n + 2, 1));
      CHECK(gn_exponent_heisenberg(q, n) == gn_exponent_graded(2 * n + 2, 1, 2, 2, q).s);
    }
  }
}

TEST_CASE("R^3 ratio is dilation invariant and rejects truncated tails") {
  const auto e = gn_exponent_graded(3, 1, 2, 2, 3);
  std::vector<double> r;
  for (double s : {1.0, 2.0}) {
    const auto g = SpatialGrid::abelian(3, 32, 8.0 / s);
    const auto u = SpatialField::sample(g, [&](const std::vector<double>& x) {
      return complex(std::exp(-s * s * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / 2));
    });
    const auto rep = verify_inequality_abelian(u, e);
    CHECK(rep.finite);
    r.push_back(rep.ratio);
  }
  CHECK(r[1] == doctest::Approx(r[0]).epsilon(1e-6));
  const auto g = SpatialGrid::abelian(3, 16, 2.0);
  const auto wide = SpatialField::sample(g, [](const std::vector<double>& x) { return complex(std::exp(-x[0] * x[0] / 8)); });
  CHECK_THROWS_AS(verify_inequality_abelian(wide, e), BoundaryDecayError);
}

TEST_CASE("empirical constant and seeded families") {
  std::vector<RatioReport> reps(3);
  reps[0].ratio = 0.2;
  reps[1].ratio = 0.5;
  reps[1].descriptor = "peak";
  reps[2].ratio = 0.3;
  const auto ec = empirical_constant(reps);
  CHECK(ec.bound == 0.5);
  CHECK(ec.argmax == "peak");
  CHECK(ec.median == 0.3);
  CHECK_THROWS_AS(empirical_constant({}), std::invalid_argument);
  const auto a = GaussianMixture::random(3, 3, 4), b = GaussianMixture::random(3, 3, 4);
  CHECK(a.descriptor() == b.descriptor());
  CHECK(a.descriptor() != GaussianMixture::random(4, 3, 4).descriptor());
}
