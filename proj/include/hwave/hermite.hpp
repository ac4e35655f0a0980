#pragma once

#include <span>
#include <vector>

namespace hwave {

/// L2-normalized Hermite function psi_k(w) = c_k H_k(w) exp(-w^2/2),
/// c_k = 2^{-k/2} (k!)^{-1/2} pi^{-1/4}, evaluated with the normalized
/// three-term recurrence. Never forms factorials, so it is usable for k in
/// the thousands; values at extreme |w| are carried in log-scaled form.
double hermite_function(int k, double w);

/// Writes psi_0(w) ... psi_{out.size()-1}(w) into out.
void hermite_functions(double w, std::span<double> out);

/// Evaluates and caches psi_0..psi_K on demand.
class HermiteEvaluator {
 public:
  explicit HermiteEvaluator(int max_order);

  int max_order() const { return max_order_; }

  /// Normalization constant c_m, computed in log space.
  static double normalization(int m);

  /// psi_0..psi_K at w.
  std::vector<double> evaluate(double w) const;
  void evaluate(double w, std::span<double> out) const;

 private:
  int max_order_;
};

/// Gauss-Hermite rule for the weight exp(-w^2), via Golub-Welsch.
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  /// weights[i] * exp(nodes[i]^2): integrates f(w) dw directly for f that
  /// already carries the Gaussian factor (e.g. products of Hermite functions).
  std::vector<double> unit_weights;
};

GaussHermiteRule gauss_hermite(int order);

}  // namespace hwave
