#pragma once

#include <cstddef>
#include <vector>

namespace hwave {

/// Point of the Heisenberg group H^n in exponential coordinates (x, y, t).
struct GroupElement {
  std::vector<double> x;
  std::vector<double> y;
  double t = 0.0;

  GroupElement() = default;
  GroupElement(std::vector<double> x_, std::vector<double> y_, double t_);

  static GroupElement identity(int n);

  int dimension() const { return static_cast<int>(x.size()); }
};

/// (x, y, t) o (x', y', t') = (x + x', y + y', t + t' + (x.y' - x'.y) / 2)
GroupElement group_multiply(const GroupElement& g1, const GroupElement& g2);

GroupElement group_inverse(const GroupElement& g);

/// Anisotropic dilation (r x, r y, r^2 t). Throws for r <= 0.
GroupElement dilate(const GroupElement& g, double r);

/// Q = 2n + 2.
int homogeneous_dimension(int n);

/// Max-abs distance between two group elements of equal dimension.
double group_distance(const GroupElement& a, const GroupElement& b);

struct MultiIndex {
  std::vector<int> k;

  int order() const;
  /// Eigenvalue sum_j (2 k_j + 1) of the harmonic oscillator on R^n.
  double oscillator_eigenvalue() const;

  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
};

double oscillator_eigenvalue(const MultiIndex& k);

/// All k in N^n with mu_k <= mu_max, in graded lexicographic order (by |k|,
/// then lexicographic), so eigenvalues are nondecreasing.
std::vector<MultiIndex> enumerate_multi_indices(int n, double mu_max);

}  // namespace hwave
