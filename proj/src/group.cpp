#include "hwave/group.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hwave {

GroupElement::GroupElement(std::vector<double> x_, std::vector<double> y_, double t_)
    : x(std::move(x_)), y(std::move(y_)), t(t_) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("GroupElement: x and y must have equal length");
  }
}

GroupElement GroupElement::identity(int n) {
  return GroupElement(std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), 0.0);
}

GroupElement group_multiply(const GroupElement& g1, const GroupElement& g2) {
  if (g1.x.size() != g2.x.size() || g1.y.size() != g2.y.size()) {
    throw std::invalid_argument("group_multiply: dimension mismatch");
  }
  const std::size_t n = g1.x.size();
  GroupElement out;
  out.x.resize(n);
  out.y.resize(n);
  double symplectic = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    out.x[j] = g1.x[j] + g2.x[j];
    out.y[j] = g1.y[j] + g2.y[j];
    symplectic += g1.x[j] * g2.y[j] - g2.x[j] * g1.y[j];
  }
  out.t = g1.t + g2.t + 0.5 * symplectic;
  return out;
}

GroupElement group_inverse(const GroupElement& g) {
  GroupElement out = g;
  for (auto& v : out.x) v = -v;
  for (auto& v : out.y) v = -v;
  out.t = -g.t;
  return out;
}

GroupElement dilate(const GroupElement& g, double r) {
  if (!(r > 0.0)) {
    throw std::invalid_argument("dilate: factor must be positive");
  }
  GroupElement out = g;
  for (auto& v : out.x) v *= r;
  for (auto& v : out.y) v *= r;
  out.t = r * r * g.t;
  return out;
}

int homogeneous_dimension(int n) { return 2 * n + 2; }

double group_distance(const GroupElement& a, const GroupElement& b) {
  if (a.x.size() != b.x.size()) {
    throw std::invalid_argument("group_distance: dimension mismatch");
  }
  double d = std::abs(a.t - b.t);
  for (std::size_t j = 0; j < a.x.size(); ++j) {
    d = std::max({d, std::abs(a.x[j] - b.x[j]), std::abs(a.y[j] - b.y[j])});
  }
  return d;
}

int MultiIndex::order() const {
  int s = 0;
  for (int v : k) s += v;
  return s;
}

double MultiIndex::oscillator_eigenvalue() const {
  double mu = 0.0;
  for (int v : k) {
    if (v < 0) throw std::invalid_argument("MultiIndex: negative component");
    mu += 2.0 * v + 1.0;
  }
  return mu;
}

double oscillator_eigenvalue(const MultiIndex& k) { return k.oscillator_eigenvalue(); }

namespace {

void enumerate_order(int n, int remaining, std::vector<int>& prefix,
                     std::vector<MultiIndex>& out) {
  if (static_cast<int>(prefix.size()) == n - 1) {
    prefix.push_back(remaining);
    out.push_back(MultiIndex{prefix});
    prefix.pop_back();
    return;
  }
  for (int v = 0; v <= remaining; ++v) {
    prefix.push_back(v);
    enumerate_order(n, remaining - v, prefix, out);
    prefix.pop_back();
  }
}

}  // namespace

std::vector<MultiIndex> enumerate_multi_indices(int n, double mu_max) {
  if (n < 1) throw std::invalid_argument("enumerate_multi_indices: n must be >= 1");
  std::vector<MultiIndex> out;
  // mu_k = 2|k| + n <= mu_max
  const int max_order = static_cast<int>(std::floor((mu_max - n) / 2.0 + 1e-12));
  std::vector<int> prefix;
  for (int order = 0; order <= max_order; ++order) {
    enumerate_order(n, order, prefix, out);
  }
  return out;
}

}  // namespace hwave
