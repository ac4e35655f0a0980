#include "hwave/fd.hpp"

#include <doctest.h>

#include <cmath>

using namespace hwave;
using namespace hwave::fd;

TEST_CASE("stencil is exact on quadratics") {
  const auto g = SpatialGrid::heisenberg(1, 2.0, 2.0, 2.0, 9, 9, 9);
  const StencilOperator op(g);
  const auto one = SpatialField::sample(g, [](const std::vector<double>&) { return complex(1.0); });
  const auto x2 = SpatialField::sample(g, [](const std::vector<double>& p) { return complex(p[0] * p[0]); });
  const auto t2 = SpatialField::sample(g, [](const std::vector<double>& p) { return complex(p[2] * p[2]); });
  const auto L1 = op.apply(one), Lx = op.apply(x2), Lt = op.apply(t2);
  for (auto i : op.interior(1)) {
    const auto p = g.point(i);
    CHECK(std::abs(L1.samples[i]) < 1e-12);
    CHECK(std::abs(Lx.samples[i] - 2.0) < 1e-11);
    CHECK(std::abs(Lt.samples[i] - (p[0] * p[0] + p[1] * p[1]) / 2) < 1e-11);
  }
}

TEST_CASE("discrete operator is symmetric negative semidefinite") {
  const StencilOperator op(SpatialGrid::heisenberg(1, 2.0, 2.0, 2.0, 6, 5, 7));
  const Eigen::MatrixXd A = op.assemble();
  CHECK((A - A.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  CHECK(es.eigenvalues().maxCoeff() < 1e-10);
  CHECK(-es.eigenvalues().minCoeff() <= op.spectral_radius_bound() * (1 + 1e-12));
}

TEST_CASE("grid and step guards") {
  CHECK_THROWS_AS(StencilOperator(SpatialGrid::heisenberg(1, 1.0, 1.0, 1.0, 4, 5, 5)), GridTooSmallError);
  const auto g = SpatialGrid::heisenberg(1, 2.0, 2.0, 2.0, 7, 7, 7);
  const StencilOperator op(g);
  const SpatialField u(g);
  LeapfrogParams p{2.0 * stable_time_step(op, 1.0), 0.5, 1.0};
  CHECK_THROWS_AS(step_leapfrog(op, u, u, p), CflViolationError);
  p.dt = 0.5 * stable_time_step(op, 1.0);
  CHECK_NOTHROW(step_leapfrog(op, u, u, p));
}

TEST_CASE("free motion with the zero operator") {
  const auto g = SpatialGrid::heisenberg(1, 1.0, 1.0, 1.0, 5, 5, 5);
  const auto op = StencilOperator::zero(g);
  const auto ones = SpatialField::sample(g, [](const std::vector<double>&) { return complex(1.0); });
  // u'' = 0: leapfrog reproduces u = 1 + t exactly.
  const auto run = run_leapfrog(op, ones, ones, 0.0, 0.0, {0.0, 0.5, 1.0}, 0.01);
  for (std::size_t k = 0; k < run.times.size(); ++k) {
    CHECK(std::abs(run.snapshots[k].samples[17] - (1.0 + run.times[k])) < 1e-12);
  }
}

TEST_CASE("discrete energy is conserved without damping and decreases with it") {
  const auto g = SpatialGrid::heisenberg(1, 3.0, 3.0, 3.0, 15, 15, 15);
  const StencilOperator op(g);
  const auto u0 = SpatialField::sample(g, [](const std::vector<double>& p) {
    return complex(std::exp(-(p[0] * p[0] + p[1] * p[1] + p[2] * p[2])));
  });
  const SpatialField u1(g);
  const double dt = 0.5 * stable_time_step(op, 1.0);
  const auto free = run_leapfrog(op, u0, u1, 0.0, 1.0, {0.0, 2.0}, dt);
  for (double e : free.energy) CHECK(e == doctest::Approx(free.energy.front()).epsilon(1e-10));
  const auto damped = run_leapfrog(op, u0, u1, 0.5, 1.0, {0.0, 2.0}, dt);
  for (std::size_t k = 1; k < damped.energy.size(); ++k) CHECK(damped.energy[k] < damped.energy[k - 1]);
  CHECK(damped.energy.back() < 0.7 * damped.energy.front());
}

TEST_CASE("manufactured solution converges at second order") {
  const auto study = manufactured_order_study(ManufacturedSolution{}, 4.0, {17, 33}, 0.5);
  CHECK(study.errors[1] < study.errors[0]);
  CHECK(study.order == doctest::Approx(2.0).epsilon(0.15));
}
