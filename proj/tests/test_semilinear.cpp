#include "hwave/semilinear.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace hwave;

namespace {

// Gaussian data on a periodic box in R^d, transformed exactly by the FFT path.
struct AbelianSetup {
  GridPtr grid;
  SpatialGrid spatial;
  SymbolProvider provider;
  SpectralTransform transform;
  SpectralField gaussian;

  AbelianSetup(int d, int points, double half_width, SymbolProvider p)
      : grid(build_abelian_grid(d, points, half_width)),
        spatial(SpatialGrid::abelian(d, points, half_width)),
        provider(std::move(p)),
        transform(grid, spatial) {
    gaussian = transform.forward(SpatialField::sample(spatial, [](const std::vector<double>& x) {
      double r2 = 0.0;
      for (double v : x) r2 += v * v;
      return complex(std::exp(-r2 / 2));
    }));
  }
};

double relative_difference(const SpectralField& a, const SpectralField& b) {
  return l2_norm(a - b) / std::max(l2_norm(b), 1e-300);
}

}  // namespace

TEST_CASE("admissibility ranges") {
  CHECK(check_admissible_heisenberg(2.0, 1).admissible);
  CHECK_FALSE(check_admissible_heisenberg(2.5, 1).admissible);
  CHECK(check_admissible_heisenberg(1.5, 2).admissible);
  CHECK_FALSE(check_admissible_heisenberg(1.6, 2).admissible);
  CHECK(check_admissible_graded(2.0, 4).bound == doctest::Approx(2.0));
  CHECK(check_admissible_graded(3.0, 3).admissible);
  CHECK_FALSE(check_admissible_graded(3.1, 3).admissible);
  CHECK_THROWS_AS(check_admissible_graded(2.0, 2), std::invalid_argument);
  CHECK_THROWS_AS(check_admissible_heisenberg(1.0, 1), std::invalid_argument);
}

TEST_CASE("nonlinearity evaluation and application") {
  const complex u[] = {complex(3.0, -4.0)};
  CHECK(std::abs(Nonlinearity::power(2.0, 2.0).evaluate(u) - 2.0 * 5.0 * u[0]) < 1e-14);
  CHECK(Nonlinearity::zero().evaluate(u) == complex(0.0));
  const complex zero[] = {complex(0.0)};
  CHECK(Nonlinearity::power(1.0, 1.5).evaluate(zero) == complex(0.0));

  AbelianSetup s(2, 32, 8.0, SymbolProvider::poly_laplacian(2, 1));
  CHECK(apply_nonlinearity(s.gaussian, Nonlinearity::zero(), s.transform, s.provider).is_zero());
  // p = 1 is the identity map.
  const auto same = apply_nonlinearity(s.gaussian, Nonlinearity::power(1.0, 1.0), s.transform, s.provider);
  CHECK(relative_difference(same, s.gaussian) < 1e-13);
  // |u| u of a Gaussian is a Gaussian of half the width scale.
  const auto sq = apply_nonlinearity(s.gaussian, Nonlinearity::power(1.0, 2.0), s.transform, s.provider);
  const auto direct = s.transform.forward(SpatialField::sample(s.spatial, [](const std::vector<double>& x) {
    return complex(std::exp(-(x[0] * x[0] + x[1] * x[1])));
  }));
  CHECK(relative_difference(sq, direct) < 1e-12);
}

TEST_CASE("general nonlinearity receives R^{j/nu} u") {
  AbelianSetup s(1, 64, 10.0, SymbolProvider::poly_laplacian(1, 2));
  // Second component is R^{1/4} u = |xi| u; the callback returns it unchanged.
  const auto nl = Nonlinearity::general([](std::span<const complex> v) { return v[1]; }, 2.0, 1.0, 2);
  const auto out = apply_nonlinearity(s.gaussian, nl, s.transform, s.provider);
  const auto expect = apply_symbol_power(s.gaussian, s.provider, 0.25);
  CHECK(relative_difference(out, expect) < 1e-12);
}

TEST_CASE("Duhamel integral of a constant source") {
  // One-dimensional abelian grid; every coefficient is an independent mode.
  const auto grid = build_abelian_grid(1, 8, 4.0);
  const auto provider = SymbolProvider::poly_laplacian(1, 1);
  const double b = 1.0, m = 2.0, T = 4.0;
  SpectralField g(grid);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = complex(1.0, 0.5 * i);
  const auto sigma = grid->symbol_values(provider);

  auto error_at = [&](std::size_t steps) {
    std::vector<SpectralField> sources(steps + 1, g);
    const DuhamelIntegrator integ(grid, provider, b, m, T / steps, steps);
    const auto res = integ.integrate(sources);
    double worst = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double total = sigma[i] + m;
      const double beta = b / 2, a = std::sqrt(total - beta * beta);
      const double exact =
          (a - std::exp(-beta * T) * (beta * std::sin(a * T) + a * std::cos(a * T))) / (total * a);
      worst = std::max(worst, std::abs(res.values.back()[i] - exact * g[i]) / std::abs(exact * g[i]));
    }
    return std::pair(worst, res.richardson);
  };
  const auto [e1, r1] = error_at(40);
  const auto [e2, r2] = error_at(80);
  CHECK(e1 < 1e-2);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.05));
  CHECK(r2 > 0.0);
  CHECK(r1 / r2 == doctest::Approx(4.0).epsilon(0.1));

  std::vector<SpectralField> zeros(41, SpectralField(grid));
  const DuhamelIntegrator integ(grid, provider, b, m, 0.1, 40);
  CHECK(integ.integrate(zeros).values.back().is_zero());
  CHECK_THROWS(integ.integrate(std::vector<SpectralField>(10, g)));
  CHECK(relative_difference(duhamel_step(std::vector<SpectralField>(41, g), b, m, provider, 0.1, 40),
                            integ.integrate(std::vector<SpectralField>(41, g)).values.back()) < 1e-14);
}

TEST_CASE("Z-norm weight and trivial trajectories") {
  ZNormConfig z;
  z.delta = 1.0;
  CHECK(z.weight(3.0) == doctest::Approx(0.5 * std::exp(3.0)).epsilon(1e-14));
  CHECK(z.weight(0.0) == 1.0);

  AbelianSetup s(2, 16, 6.0, SymbolProvider::poly_laplacian(2, 1));
  Trajectory zero{{0.0, 1.0}, {SpectralField(s.grid), SpectralField(s.grid)},
                  {SpectralField(s.grid), SpectralField(s.grid)}};
  z.times = {0.0, 1.0};
  CHECK(z_norm(zero, s.provider, z) == 0.0);
  Trajectory one{{0.0}, {s.gaussian}, {complex(2.0) * s.gaussian}};
  const double plain = l2_norm(s.gaussian) + homogeneous_sobolev_norm(s.gaussian, s.provider, 1) +
                       2.0 * l2_norm(s.gaussian);
  CHECK(z_norm(one, s.provider, z) == doctest::Approx(plain).epsilon(1e-14));
  CHECK_THROWS(z_norm(Trajectory{}, s.provider, z));
  CHECK(ZNormConfig::uniform(1.0, 2.0, 4, 4.0).rockland_powers == std::vector<int>{1, 2});
}

TEST_CASE("Picard with f = 0 returns the linear solution") {
  AbelianSetup s(2, 16, 6.0, SymbolProvider::poly_laplacian(2, 1));
  const auto z = ZNormConfig::uniform(default_z_delta(2.0, 2.0), 4.0, 20);
  const auto res = picard_solve(s.gaussian, SpectralField(s.grid), Nonlinearity::zero(), 2.0, 2.0, s.provider,
                                s.transform, z);
  CHECK(res.diagnostics.status == PicardStatus::Converged);
  CHECK(res.diagnostics.iterations == 1);
  const auto lin = evolve_linear(s.gaussian, SpectralField(s.grid), 2.0, 2.0, s.provider, z.times);
  for (std::size_t j = 0; j < lin.size(); ++j) {
    CHECK(l2_norm(res.trajectory.values[j] - lin.values[j]) <= 1e-12 * l2_norm(s.gaussian));
  }
  const auto rep = verify_semilinear_decay(res.trajectory, s.provider);
  const auto lin_rep = verify_decay(lin, s.provider, 0.0, 2.0, 2.0);
  CHECK(rep.slopes.front() == doctest::Approx(lin_rep.fitted_slope).epsilon(0.01));

  Trajectory zero = lin;
  for (auto& v : zero.values) v = SpectralField(s.grid);
  for (auto& v : zero.derivatives) v = SpectralField(s.grid);
  CHECK(verify_semilinear_decay(zero, s.provider).trivial);
}

TEST_CASE("Picard with small data contracts; bracket validation") {
  // The box must hold the unit-speed wave front until T.
  AbelianSetup s(2, 32, 10.0, SymbolProvider::poly_laplacian(2, 1));
  const auto z = ZNormConfig::uniform(default_z_delta(2.0, 2.0), 5.0, 25);
  const double dn = data_norm(s.gaussian, SpectralField(s.grid), s.provider);
  const auto res = picard_solve(complex(1e-2 / dn) * s.gaussian, SpectralField(s.grid),
                                Nonlinearity::power(1.0, 2.0), 2.0, 2.0, s.provider, s.transform, z);
  INFO(res.diagnostics.note);
  CHECK(res.diagnostics.status == PicardStatus::Converged);
  CHECK(res.diagnostics.all_ratios_below(0.5));
  CHECK(verify_semilinear_decay(res.trajectory, s.provider).all_negative);

  ProblemTemplate zero{s.gaussian, SpectralField(s.grid), Nonlinearity::zero(), 2.0, 2.0, &s.provider,
                       &s.transform, z, {}};
  CHECK_THROWS_AS(find_epsilon0(zero, 1e-3, 1.0, 2), std::invalid_argument);
  CHECK_THROWS_AS(find_epsilon0(zero, 1.0, 1e-3, 2), std::invalid_argument);
}
