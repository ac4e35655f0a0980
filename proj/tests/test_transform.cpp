#include "hwave/hermite.hpp"
#include "hwave/transform.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace hwave;

namespace {

// Direct trapezoid evaluation of int e^{iaw} psi_l(w - c) psi_k(w) dw.
complex wigner_trapezoid(double a, double c, int k, int l) {
  const double h = 0.005;
  complex s = 0.0;
  for (double w = -20.0 + c / 2; w <= 20.0 + c / 2; w += h) {
    s += std::exp(complex(0.0, a * w)) * hermite_function(l, w - c) * hermite_function(k, w) * h;
  }
  return s;
}

GroupElement random_element(std::mt19937_64& rng, int n, double scale) {
  std::normal_distribution<double> nd(0.0, scale);
  GroupElement g = GroupElement::identity(n);
  for (int j = 0; j < n; ++j) {
    g.x[j] = nd(rng);
    g.y[j] = nd(rng);
  }
  g.t = nd(rng);
  return g;
}

}  // namespace

TEST_CASE("Fourier-Wigner matrix: ladder, quadrature and trapezoid agree") {
  const double pts[][2] = {{0.0, 0.0}, {0.7, -0.4}, {-2.1, 1.3}, {3.5, 2.5}, {0.1, -4.0}};
  for (const auto& p : pts) {
    std::vector<complex> ladder(40 * 40), quad(40 * 40);
    wigner_matrix(p[0], p[1], 40, 40, ladder.data());
    wigner_matrix_quadrature(p[0], p[1], 40, 40, quad.data(), 128);
    double worst = 0.0;
    for (std::size_t i = 0; i < ladder.size(); ++i) worst = std::max(worst, std::abs(ladder[i] - quad[i]));
    CAPTURE(p[0]);
    CAPTURE(p[1]);
    CHECK(worst < 1e-12);
    for (auto [k, l] : {std::pair{0, 0}, std::pair{3, 1}, std::pair{2, 5}, std::pair{7, 7}}) {
      CHECK(std::abs(ladder[k * 40 + l] - wigner_trapezoid(p[0], p[1], k, l)) < 1e-10);
    }
  }
}

TEST_CASE("vacuum coefficient closed form") {
  const GroupElement g({0.6}, {-1.1}, 0.4);
  for (double lambda : {0.3, -2.0}) {
    const auto m = representation_matrix(lambda, g, 3);
    const complex expect = std::exp(complex(0.0, lambda * g.t)) *
                           std::exp(-std::abs(lambda) * (0.36 + 1.21) / 4.0);
    CHECK(std::abs(m(0, 0) - expect) < 1e-13);
  }
  CHECK_THROWS_AS(representation_matrix(0.0, g, 3), std::domain_error);
}

TEST_CASE("representation is unitary and a homomorphism") {
  std::mt19937_64 rng(11);
  for (int n = 1; n <= 2; ++n) {
    const auto big = enumerate_multi_indices(n, n == 1 ? 2.0 * 63 + 1 : 2.0 * 30 + 2);
    const auto small = enumerate_multi_indices(n, n == 1 ? 2.0 * 15 + 1 : 2.0 * 4 + 2);
    for (int trial = 0; trial < 4; ++trial) {
      const double lambda = (trial % 2 ? -1.0 : 1.0) * (0.3 + trial);
      const auto g1 = random_element(rng, n, 0.6);
      const auto g2 = random_element(rng, n, 0.6);
      const auto m1 = representation_block(lambda, g1, big, small, RepresentationMethod::Recurrence);
      CHECK(isometry_defect(m1) < 1e-8);
      const auto q1 = representation_block(lambda, g1, big, small, RepresentationMethod::Quadrature);
      double diff = 0.0;
      for (std::size_t i = 0; i < m1.entries.size(); ++i) diff = std::max(diff, std::abs(m1.entries[i] - q1.entries[i]));
      CHECK(diff < 1e-11);
      // M(g1 g2)_{kl} = sum_j M(g1)_{kj} M(g2)_{jl} over the padded inner set.
      const auto left = representation_block(lambda, g1, small, big, RepresentationMethod::Recurrence);
      const auto right = representation_block(lambda, g2, big, small, RepresentationMethod::Recurrence);
      const auto prod = representation_block(lambda, group_multiply(g1, g2), small, small,
                                             RepresentationMethod::Recurrence);
      double worst = 0.0;
      for (std::size_t k = 0; k < small.size(); ++k) {
        for (std::size_t l = 0; l < small.size(); ++l) {
          complex s = 0.0;
          for (std::size_t j = 0; j < big.size(); ++j) s += left(k, j) * right(j, l);
          worst = std::max(worst, std::abs(s - prod(k, l)));
        }
      }
      CHECK(worst < 1e-8);
    }
  }
}

TEST_CASE("abelian transform is exact on the periodic lattice") {
  const auto grid = build_abelian_grid(2, 48, 12.0);
  const auto spatial = SpatialGrid::abelian(2, 48, 12.0);
  SpectralTransform tr(grid, spatial);
  const double sigma = 1.2;
  const auto f = SpatialField::sample(spatial, [&](const std::vector<double>& p) {
    return complex(std::exp(-(p[0] * p[0] + p[1] * p[1]) / (2 * sigma * sigma)), 0.0);
  });
  const auto F = tr.forward(f);
  // Continuous Fourier transform of the Gaussian.
  double worst = 0.0;
  for (int i = 0; i < 48; ++i) {
    for (int j = 0; j < 48; ++j) {
      const double xi = grid->axis_frequency(i), eta = grid->axis_frequency(j);
      const double expect = 2 * std::numbers::pi * sigma * sigma *
                            std::exp(-sigma * sigma * (xi * xi + eta * eta) / 2);
      worst = std::max(worst, std::abs(F[i * 48 + j] - expect));
    }
  }
  CHECK(worst < 1e-10);
  CHECK(l2_norm(F) == doctest::Approx(f.l2_norm()).epsilon(1e-12));
  const auto back = tr.synthesize(F);
  double err = 0.0;
  for (std::size_t i = 0; i < back.samples.size(); ++i) err = std::max(err, std::abs(back.samples[i] - f.samples[i]));
  CHECK(err < 1e-13);
}

TEST_CASE("Heisenberg round trip and Plancherel constant") {
  const double sigma = 1.0, tau = 2.0, omega = 2.0;
  auto fn = [&](const std::vector<double>& p) {
    return std::exp(-(p[0] * p[0] + p[1] * p[1]) / (2 * sigma * sigma) - p[2] * p[2] / (2 * tau * tau)) *
           std::exp(complex(0.0, omega * p[2]));
  };
  const auto spatial = SpatialGrid::heisenberg(1, 7.0, 7.0, 14.0, 41, 41, 97);
  const auto f = SpatialField::sample(spatial, fn);
  const auto raw = build_grid(1.0 / 16, 16.0, 64, 2.0 * 15 + 1, 1);
  const auto cal = calibrate_plancherel(f, raw);
  MESSAGE("calibrated c = " << cal.constant << ", 1/(4 pi^2) = " << 1.0 / (4 * std::numbers::pi * std::numbers::pi));
  CHECK(cal.constant == doctest::Approx(1.0 / (4 * std::numbers::pi * std::numbers::pi)).epsilon(0.02));
  SpectralTransform tr(cal.grid, spatial);
  const auto F = tr.forward(f);
  const auto back = tr.synthesize(F);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < f.samples.size(); ++i) {
    num += std::norm(back.samples[i] - f.samples[i]);
    den += std::norm(f.samples[i]);
  }
  MESSAGE("round trip relative L2 error = " << std::sqrt(num / den));
  CHECK(std::sqrt(num / den) < 1e-3);
  const auto pts = inverse_transform(F, {GroupElement({0.3}, {-0.2}, 0.5)});
  CHECK(std::abs(pts[0] - fn({0.3, -0.2, 0.5})) < 1e-3);
}
