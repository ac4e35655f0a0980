#include "hwave/propagator.hpp"

#include <boost/numeric/odeint.hpp>
#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>

using namespace hwave;

namespace {

// Adaptive Runge-Kutta-Fehlberg 7(8) reference for u'' + b u' + total u = 0.
std::array<double, 2> ode_reference(double b, double total, double u0, double u1, double t) {
  namespace odeint = boost::numeric::odeint;
  using state = std::array<double, 2>;
  state x{u0, u1};
  auto rhs = [&](const state& s, state& ds, double) {
    ds[0] = s[1];
    ds[1] = -b * s[1] - total * s[0];
  };
  odeint::integrate_adaptive(
      odeint::make_controlled(1e-14, 1e-14, odeint::runge_kutta_fehlberg78<state>()), rhs, x, 0.0,
      t, 1e-3);
  return x;
}

}  // namespace

TEST_CASE("regime classification") {
  CHECK(classify_regime(2.0, 2.0) == Regime::Underdamped);
  CHECK(classify_regime(2.0, 1.0) == Regime::Critical);
  CHECK(classify_regime(4.0, 1.0) == Regime::Overdamped);
  CHECK(classify_regime(2.0, 1.0 + 1e-10) == Regime::Critical);
  CHECK(classify_regime(2.0, 1.0 + 1e-6) == Regime::Underdamped);
  CHECK_THROWS_AS(classify_regime(0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_mode_params(1.0, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("closed forms") {
  // b = 2, total = 2: u = e^{-t} cos t, so u(pi/2) = 0 and u'(pi/2) = -e^{-pi/2}.
  const auto under = make_mode_params(2.0, 1.0, 1.0);
  auto s = propagate_mode(under, 1.0, -1.0, std::numbers::pi / 2);
  CHECK(std::abs(s.value) < 1e-15);
  CHECK(s.derivative.real() == doctest::Approx(-std::exp(-std::numbers::pi / 2)).epsilon(1e-14));
  // u0 = 1, u1 = 0: u = e^{-t}(cos t + sin t)
  s = propagate_mode(under, 1.0, 0.0, std::numbers::pi / 2);
  CHECK(s.value.real() == doctest::Approx(std::exp(-std::numbers::pi / 2)).epsilon(1e-14));
  // critical b = 2, total = 1: u = (1 + t) e^{-t}
  const auto crit = make_mode_params(2.0, 1.0, 0.0);
  CHECK(crit.regime == Regime::Critical);
  s = propagate_mode(crit, 1.0, 0.0, 1.0);
  CHECK(s.value.real() == doctest::Approx(2.0 * std::exp(-1.0)).epsilon(1e-14));
  CHECK(s.derivative.real() == doctest::Approx(-std::exp(-1.0)).epsilon(1e-14));
  CHECK_THROWS_AS(propagate_mode(crit, 1.0, 0.0, -1.0), std::invalid_argument);
}

TEST_CASE("decay rates") {
  CHECK(decay_rate(4.0, 1.0) == doctest::Approx(2.0 - std::sqrt(3.0)));
  CHECK(decay_rate(2.0, 2.0) == doctest::Approx(1.0));
  CHECK(decay_rate(2.0, 1.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(decay_rate(-1.0, 1.0), std::invalid_argument);
}

TEST_CASE("propagator agrees with an ODE integrator in every regime") {
  const double cases[][2] = {{2.0, 2.0}, {2.0, 1.0}, {4.0, 1.0}, {1.0, 50.0}, {3.0, 2.25 + 1e-9},
                             {3.0, 2.25 - 1e-7}, {0.5, 1e-3}, {6.0, 0.5}};
  for (const auto& c : cases) {
    for (double t : {0.0, 0.01, 0.7, 3.0, 9.5}) {
      const auto ref = ode_reference(c[0], c[1], 0.8, -0.3, t);
      const auto co = propagator_coefficients(c[0], c[1], t);
      const double u = co.c00 * 0.8 + co.c01 * -0.3;
      const double v = co.c10 * 0.8 + co.c11 * -0.3;
      const double scale = std::hypot(ref[0], ref[1]);
      CAPTURE(c[0]);
      CAPTURE(c[1]);
      CAPTURE(t);
      CHECK(std::hypot(u - ref[0], v - ref[1]) <= 1e-10 * scale + 1e-14);
    }
  }
}

TEST_CASE("propagator is continuous across the critical band") {
  const double b = 2.0, t = 4.0;
  const auto mid = propagator_coefficients(b, 1.0, t);
  for (double eps : {1e-12, 1e-9, 1e-6}) {
    for (double sgn : {-1.0, 1.0}) {
      const auto p = propagator_coefficients(b, 1.0 + sgn * eps, t);
      CHECK(std::abs(p.c00 - mid.c00) < 50 * eps);
      CHECK(std::abs(p.c01 - mid.c01) < 50 * eps);
    }
  }
}

TEST_CASE("semigroup property") {
  for (double total : {0.3, 1.0, 7.0}) {
    const auto a = propagator_coefficients(2.0, total, 1.3);
    const auto b = propagator_coefficients(2.0, total, 0.9);
    const auto ab = propagator_coefficients(2.0, total, 2.2);
    CHECK(b.c00 * a.c00 + b.c01 * a.c10 == doctest::Approx(ab.c00).epsilon(1e-13));
    CHECK(b.c00 * a.c01 + b.c01 * a.c11 == doctest::Approx(ab.c01).epsilon(1e-13));
  }
}

TEST_CASE("log-slope fit") {
  std::vector<double> t, v;
  for (int j = 0; j < 50; ++j) {
    t.push_back(0.2 * j);
    v.push_back(3.0 * std::exp(-0.7 * t.back()));
  }
  CHECK(fit_log_slope(t, v, 0.6) == doctest::Approx(-0.7).epsilon(1e-12));
}

TEST_CASE("evolve_linear validation") {
  const auto g = build_grid(0.5, 2.0, 4, 3.0, 1);
  const auto other = build_grid(0.5, 2.0, 5, 3.0, 1);
  const auto sub = SymbolProvider::sub_laplacian();
  SpectralField f(g), h(other);
  CHECK_THROWS(evolve_linear(f, h, 1.0, 1.0, sub, {0.0}));
  CHECK_THROWS(evolve_linear(f, f, 1.0, 1.0, sub, {1.0, 0.5}));
  CHECK_THROWS(evolve_linear(f, f, 1.0, 1.0, sub, {-1.0}));
  const auto traj = evolve_linear(f, f, 1.0, 1.0, sub, {0.0, 1.0});
  CHECK(traj.values[1].is_zero());
}

TEST_CASE("verify_decay on a single mode") {
  const auto g = build_grid(0.5, 2.0, 4, 3.0, 1)->with_plancherel_constant(1.0);
  const auto sub = SymbolProvider::sub_laplacian();
  SpectralField u0(g), u1(g);
  u0[g->index(2, 0, 0)] = 1.0;
  std::vector<double> times;
  for (int j = 0; j <= 100; ++j) times.push_back(0.4 * j);
  for (auto bm : {std::pair{2.0, 2.0}, std::pair{4.0, 1.0}, std::pair{2.0, 1.0}}) {
    const auto traj = evolve_linear(u0, u1, bm.first, bm.second, sub, times);
    const auto rep = verify_decay(traj, sub, 1.0, bm.second, bm.first);
    CHECK(rep.passed());
    CHECK(std::isfinite(rep.fitted_constant));
  }
  const auto zero = evolve_linear(u1, u1, 2.0, 2.0, sub, times);
  CHECK(verify_decay(zero, sub, 0.0, 2.0, 2.0).trivial);
  const std::vector<double> short_times(times.begin(), times.begin() + 5);
  CHECK_THROWS(verify_decay(evolve_linear(u0, u1, 2.0, 2.0, sub, short_times), sub, 0.0, 2.0, 2.0));
}
