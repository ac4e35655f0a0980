#include "hwave/hermite.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hwave {

namespace {

constexpr double kRescaleAbove = 1e200;

}  // namespace

void hermite_functions(double w, std::span<double> out) {
  if (out.empty()) return;
  const int count = static_cast<int>(out.size());
  // Work with psi_k * exp(w^2/2), carrying an extra log-scale so that the
  // Gaussian factor is applied once at the end.
  double log_scale = 0.0;
  double prev = 0.0;
  double curr = std::pow(std::numbers::pi, -0.25);
  std::vector<double> raw(count);
  std::vector<double> scale_at(count);
  raw[0] = curr;
  scale_at[0] = 0.0;
  for (int k = 0; k + 1 < count; ++k) {
    const double next = std::sqrt(2.0 / (k + 1)) * w * curr - std::sqrt(double(k) / (k + 1)) * prev;
    prev = curr;
    curr = next;
    if (std::abs(curr) > kRescaleAbove) {
      prev /= kRescaleAbove;
      curr /= kRescaleAbove;
      log_scale += std::log(kRescaleAbove);
    }
    raw[k + 1] = curr;
    scale_at[k + 1] = log_scale;
  }
  const double gauss = -0.5 * w * w;
  for (int k = 0; k < count; ++k) {
    const double e = gauss + scale_at[k];
    out[k] = raw[k] == 0.0 ? 0.0 : raw[k] * std::exp(e);
  }
}

double hermite_function(int k, double w) {
  if (k < 0) throw std::invalid_argument("hermite_function: order must be >= 0");
  std::vector<double> values(k + 1);
  hermite_functions(w, values);
  return values[k];
}

HermiteEvaluator::HermiteEvaluator(int max_order) : max_order_(max_order) {
  if (max_order < 0) throw std::invalid_argument("HermiteEvaluator: negative order");
}

double HermiteEvaluator::normalization(int m) {
  return std::exp(-0.5 * m * std::log(2.0) - 0.5 * std::lgamma(m + 1.0) -
                  0.25 * std::log(std::numbers::pi));
}

std::vector<double> HermiteEvaluator::evaluate(double w) const {
  std::vector<double> out(max_order_ + 1);
  hermite_functions(w, out);
  return out;
}

void HermiteEvaluator::evaluate(double w, std::span<double> out) const {
  if (static_cast<int>(out.size()) != max_order_ + 1) {
    throw std::invalid_argument("HermiteEvaluator: output size mismatch");
  }
  hermite_functions(w, out);
}

GaussHermiteRule gauss_hermite(int order) {
  if (order < 1) throw std::invalid_argument("gauss_hermite: order must be >= 1");
  // Jacobi matrix of the physicists' Hermite polynomials.
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
  for (int i = 0; i + 1 < order; ++i) {
    const double off = std::sqrt(0.5 * (i + 1));
    jacobi(i, i + 1) = off;
    jacobi(i + 1, i) = off;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  GaussHermiteRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  rule.unit_weights.resize(order);
  const double mu0 = std::sqrt(std::numbers::pi);
  for (int i = 0; i < order; ++i) {
    const double x = solver.eigenvalues()(i);
    const double v0 = solver.eigenvectors()(0, i);
    rule.nodes[i] = x;
    rule.weights[i] = mu0 * v0 * v0;
    // The eigenvector's first component underflows for large orders; the
    // Christoffel form w_i e^{x^2} = 1 / sum_k psi_k(x)^2 stays accurate.
    std::vector<double> psi(order);
    hermite_functions(x, psi);
    double sum = 0.0;
    for (double p : psi) sum += p * p;
    rule.unit_weights[i] = 1.0 / sum;
  }
  return rule;
}

}  // namespace hwave
