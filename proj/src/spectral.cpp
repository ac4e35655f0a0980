#include "hwave/spectral.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hwave {

namespace {

std::uint64_t next_stamp() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1);
}

}  // namespace

// ---------------------------------------------------------------------------
// SymbolProvider

SymbolProvider SymbolProvider::sub_laplacian(int power) {
  if (power < 1) throw std::invalid_argument("sub_laplacian: power must be >= 1");
  return SymbolProvider(SubLaplacianSymbol{power});
}

SymbolProvider SymbolProvider::abelian_separable(std::vector<double> coefficients, int m) {
  if (m < 1) throw std::invalid_argument("abelian symbol: order must be >= 1");
  if (coefficients.empty()) throw std::invalid_argument("abelian symbol: no coefficients");
  for (double a : coefficients) {
    if (!(a > 0.0)) throw std::invalid_argument("abelian symbol: coefficients must be positive");
  }
  return SymbolProvider(AbelianSymbol{AbelianSymbol::Form::Separable, std::move(coefficients), m});
}

SymbolProvider SymbolProvider::abelian_isotropic(std::vector<double> coefficients, int m) {
  auto p = abelian_separable(coefficients, m);
  std::get<AbelianSymbol>(p.v_).form = AbelianSymbol::Form::Isotropic;
  return p;
}

SymbolProvider SymbolProvider::poly_laplacian(int d, int m) {
  return abelian_isotropic(std::vector<double>(d, 1.0), m);
}

Backend SymbolProvider::backend() const {
  return std::holds_alternative<SubLaplacianSymbol>(v_) ? Backend::Heisenberg : Backend::Abelian;
}

double SymbolProvider::degree() const {
  if (auto* s = std::get_if<SubLaplacianSymbol>(&v_)) return 2.0 * s->power;
  return 2.0 * std::get<AbelianSymbol>(v_).order_half;
}

int SymbolProvider::dimension() const {
  if (auto* a = std::get_if<AbelianSymbol>(&v_)) return static_cast<int>(a->coefficients.size());
  return 0;
}

double SymbolProvider::heisenberg_value(double lambda, double mu) const {
  const auto* s = std::get_if<SubLaplacianSymbol>(&v_);
  if (!s) throw std::invalid_argument("symbol_value: provider is not a sub-Laplacian symbol");
  if (lambda == 0.0) throw std::domain_error("symbol_value: lambda = 0 is not in R*");
  const double base = std::abs(lambda) * mu;
  return s->power == 1 ? base : std::pow(base, s->power);
}

double SymbolProvider::abelian_value(std::span<const double> xi) const {
  const auto* a = std::get_if<AbelianSymbol>(&v_);
  if (!a) throw std::invalid_argument("symbol_value: provider is not an abelian symbol");
  if (xi.size() != a->coefficients.size()) {
    throw std::invalid_argument("symbol_value: frequency dimension mismatch");
  }
  double value = 0.0;
  if (a->form == AbelianSymbol::Form::Separable) {
    for (std::size_t j = 0; j < xi.size(); ++j) {
      value += a->coefficients[j] * std::pow(xi[j] * xi[j], a->order_half);
    }
  } else {
    for (std::size_t j = 0; j < xi.size(); ++j) value += a->coefficients[j] * xi[j] * xi[j];
    value = std::pow(value, a->order_half);
  }
  return value;
}

double symbol_value(const SymbolProvider& provider, double lambda, const MultiIndex& k) {
  return provider.heisenberg_value(lambda, k.oscillator_eigenvalue());
}

double symbol_value(const SymbolProvider& provider, std::span<const double> xi) {
  return provider.abelian_value(xi);
}

// ---------------------------------------------------------------------------
// ModeGrid

void ModeGrid::finalize() {
  stamp_ = next_stamp();
  mu_.clear();
  max_axis_order_ = 0;
  for (const auto& k : hermite_set_) {
    mu_.push_back(k.oscillator_eigenvalue());
    for (int v : k.k) max_axis_order_ = std::max(max_axis_order_, v);
  }
}

std::size_t ModeGrid::coefficient_count() const {
  if (backend_ == Backend::Heisenberg) {
    return lambda_nodes_.size() * hermite_set_.size() * hermite_set_.size();
  }
  std::size_t total = 1;
  for (int j = 0; j < n_; ++j) total *= static_cast<std::size_t>(points_);
  return total;
}

double ModeGrid::frequency_spacing() const {
  return std::numbers::pi / half_width_;  // 2 pi / (2 R)
}

double ModeGrid::axis_frequency(int j) const {
  const int shifted = j < points_ / 2 ? j : j - points_;
  return (shifted + 0.5) * frequency_spacing();
}

std::vector<double> ModeGrid::coefficient_weights() const {
  std::vector<double> w(coefficient_count());
  if (backend_ == Backend::Heisenberg) {
    const std::size_t block = hermite_set_.size() * hermite_set_.size();
    for (std::size_t i = 0; i < lambda_nodes_.size(); ++i) {
      std::fill_n(w.begin() + i * block, block, node_weight(i));
    }
  } else {
    std::fill(w.begin(), w.end(), raw_weights_.front() * plancherel_constant_);
  }
  return w;
}

std::vector<double> ModeGrid::symbol_values(const SymbolProvider& provider) const {
  if (provider.backend() != backend_) {
    throw std::invalid_argument("symbol_values: provider backend does not match the grid");
  }
  std::vector<double> out(coefficient_count());
  if (backend_ == Backend::Heisenberg) {
    const std::size_t kc = hermite_set_.size();
    for (std::size_t i = 0; i < lambda_nodes_.size(); ++i) {
      for (std::size_t k = 0; k < kc; ++k) {
        const double v = provider.heisenberg_value(lambda_nodes_[i], mu_[k]);
        std::fill_n(out.begin() + index(i, k, 0), kc, v);
      }
    }
    return out;
  }
  if (provider.dimension() != n_) {
    throw std::invalid_argument("symbol_values: provider dimension does not match the grid");
  }
  std::vector<double> axis(points_);
  for (int j = 0; j < points_; ++j) axis[j] = axis_frequency(j);
  std::vector<double> xi(n_);
  std::vector<int> idx(n_, 0);
  for (std::size_t flat = 0; flat < out.size(); ++flat) {
    std::size_t rem = flat;
    for (int a = n_ - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(rem % points_);
      rem /= points_;
    }
    for (int a = 0; a < n_; ++a) xi[a] = axis[idx[a]];
    out[flat] = provider.abelian_value(xi);
  }
  return out;
}

std::shared_ptr<const ModeGrid> ModeGrid::with_plancherel_constant(double c) const {
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw std::invalid_argument("with_plancherel_constant: constant must be positive");
  }
  auto copy = std::shared_ptr<ModeGrid>(new ModeGrid(*this));
  copy->plancherel_constant_ = c;
  copy->calibrated_ = true;
  copy->stamp_ = next_stamp();
  return copy;
}

std::shared_ptr<const ModeGrid> ModeGrid::with_scaled_weights(double factor) const {
  if (!(factor > 0.0)) throw std::invalid_argument("with_scaled_weights: factor must be positive");
  auto copy = std::shared_ptr<ModeGrid>(new ModeGrid(*this));
  for (auto& w : copy->raw_weights_) w *= factor;
  copy->stamp_ = next_stamp();
  return copy;
}

bool ModeGrid::same_layout(const ModeGrid& other) const {
  if (this == &other) return true;
  if (backend_ != other.backend_ || n_ != other.n_) return false;
  if (backend_ == Backend::Abelian) {
    return points_ == other.points_ && half_width_ == other.half_width_;
  }
  return lambda_nodes_ == other.lambda_nodes_ && hermite_set_ == other.hermite_set_;
}

GridPtr build_grid(double lambda_min, double lambda_max, int node_count, double mu_max, int n) {
  if (!(lambda_min > 0.0) || !(lambda_max > lambda_min)) {
    throw std::invalid_argument("build_grid: need 0 < lambda_min < lambda_max");
  }
  if (node_count < 2) throw std::invalid_argument("build_grid: node_count must be >= 2");
  if (n < 1) throw std::invalid_argument("build_grid: n must be >= 1");
  auto hermite = enumerate_multi_indices(n, mu_max);
  if (hermite.empty()) throw std::invalid_argument("build_grid: empty Hermite truncation set");

  auto grid = std::shared_ptr<ModeGrid>(new ModeGrid());
  grid->backend_ = Backend::Heisenberg;
  grid->n_ = n;
  grid->hermite_set_ = std::move(hermite);

  // Trapezoid in s = log(lambda): d lambda = lambda ds.
  const double s0 = std::log(lambda_min);
  const double ds = (std::log(lambda_max) - s0) / (node_count - 1);
  std::vector<double> pos(node_count), wpos(node_count);
  for (int j = 0; j < node_count; ++j) {
    const double lam = std::exp(s0 + j * ds);
    const double edge = (j == 0 || j == node_count - 1) ? 0.5 : 1.0;
    pos[j] = lam;
    wpos[j] = edge * ds * lam * std::pow(lam, n);
  }
  for (int j = node_count - 1; j >= 0; --j) {
    grid->lambda_nodes_.push_back(-pos[j]);
    grid->raw_weights_.push_back(wpos[j]);
  }
  for (int j = 0; j < node_count; ++j) {
    grid->lambda_nodes_.push_back(pos[j]);
    grid->raw_weights_.push_back(wpos[j]);
  }
  grid->finalize();
  return grid;
}

GridPtr make_heisenberg_grid(int n, std::vector<double> nodes, std::vector<double> raw_weights,
                             double plancherel_constant, std::vector<MultiIndex> hermite_set,
                             bool calibrated) {
  if (nodes.size() != raw_weights.size() || nodes.empty()) {
    throw std::invalid_argument("make_heisenberg_grid: node/weight size mismatch");
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i] == 0.0 || !(raw_weights[i] > 0.0)) {
      throw std::invalid_argument("make_heisenberg_grid: zero node or non-positive weight");
    }
  }
  for (const auto& k : hermite_set) {
    if (static_cast<int>(k.k.size()) != n) {
      throw std::invalid_argument("make_heisenberg_grid: multi-index dimension mismatch");
    }
  }
  auto grid = std::shared_ptr<ModeGrid>(new ModeGrid());
  grid->backend_ = Backend::Heisenberg;
  grid->n_ = n;
  grid->lambda_nodes_ = std::move(nodes);
  grid->raw_weights_ = std::move(raw_weights);
  grid->hermite_set_ = std::move(hermite_set);
  grid->plancherel_constant_ = plancherel_constant;
  grid->calibrated_ = calibrated;
  grid->finalize();
  return grid;
}

GridPtr build_abelian_grid(int d, int points_per_axis, double half_width) {
  if (d < 1) throw std::invalid_argument("build_abelian_grid: dimension must be >= 1");
  if (points_per_axis < 2 || points_per_axis % 2 != 0) {
    throw std::invalid_argument("build_abelian_grid: points per axis must be even and >= 2");
  }
  if (!(half_width > 0.0)) throw std::invalid_argument("build_abelian_grid: half width must be > 0");
  auto grid = std::shared_ptr<ModeGrid>(new ModeGrid());
  grid->backend_ = Backend::Abelian;
  grid->n_ = d;
  grid->points_ = points_per_axis;
  grid->half_width_ = half_width;
  grid->raw_weights_ = {std::pow(grid->frequency_spacing(), d)};
  grid->plancherel_constant_ = std::pow(2.0 * std::numbers::pi, -d);
  grid->calibrated_ = true;
  grid->finalize();
  return grid;
}

// ---------------------------------------------------------------------------
// SpectralField

SpectralField::SpectralField(GridPtr grid) : grid_(std::move(grid)) {
  if (!grid_) throw std::invalid_argument("SpectralField: null grid");
  coeffs_.assign(grid_->coefficient_count(), complex(0.0, 0.0));
}

SpectralField::SpectralField(GridPtr grid, std::vector<complex> coefficients)
    : grid_(std::move(grid)), coeffs_(std::move(coefficients)) {
  if (!grid_) throw std::invalid_argument("SpectralField: null grid");
  if (coeffs_.size() != grid_->coefficient_count()) {
    throw std::invalid_argument("SpectralField: coefficient count does not match grid");
  }
}

bool SpectralField::is_zero() const {
  return std::all_of(coeffs_.begin(), coeffs_.end(), [](complex c) { return c == complex(0.0); });
}

bool SpectralField::all_finite() const {
  return std::all_of(coeffs_.begin(), coeffs_.end(),
                     [](complex c) { return std::isfinite(c.real()) && std::isfinite(c.imag()); });
}

void SpectralField::check_compatible(const SpectralField& other) const {
  if (!grid_ || !other.grid_ || !grid_->same_layout(*other.grid_)) {
    throw std::invalid_argument("SpectralField: grid mismatch");
  }
}

SpectralField& SpectralField::operator+=(const SpectralField& other) {
  check_compatible(other);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += other.coeffs_[i];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& other) {
  check_compatible(other);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= other.coeffs_[i];
  return *this;
}

SpectralField& SpectralField::operator*=(complex factor) {
  for (auto& c : coeffs_) c *= factor;
  return *this;
}

// ---------------------------------------------------------------------------
// Norms

namespace {

template <typename Multiplier>
double weighted_norm(const SpectralField& field, Multiplier&& mult) {
  const auto weights = field.grid()->coefficient_weights();
  const auto& c = field.coefficients();
  double sum = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double a2 = std::norm(c[i]);
    if (a2 == 0.0) continue;
    sum += weights[i] * a2 * mult(i);
  }
  return std::sqrt(sum);
}

}  // namespace

double l2_norm(const SpectralField& field) {
  return weighted_norm(field, [](std::size_t) { return 1.0; });
}

double sobolev_norm(const SpectralField& field, const SymbolProvider& provider, double s,
                    double mass) {
  if (mass < 0.0) throw std::invalid_argument("sobolev_norm: mass must be >= 0");
  if (s == 0.0) return l2_norm(field);
  const auto sigma = field.grid()->symbol_values(provider);
  const double expo = 2.0 * s / provider.degree();
  return weighted_norm(field, [&](std::size_t i) { return std::pow(mass + sigma[i], expo); });
}

double homogeneous_sobolev_norm(const SpectralField& field, const SymbolProvider& provider,
                                double a) {
  if (!(a > 0.0)) throw std::invalid_argument("homogeneous_sobolev_norm: order must be > 0");
  const auto sigma = field.grid()->symbol_values(provider);
  const double expo = 2.0 * a / provider.degree();
  return weighted_norm(field, [&](std::size_t i) { return std::pow(sigma[i], expo); });
}

complex weighted_inner(const SpectralField& f, const SpectralField& g) {
  if (!f.grid()->same_layout(*g.grid())) throw std::invalid_argument("weighted_inner: grid mismatch");
  const auto weights = f.grid()->coefficient_weights();
  complex sum = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) sum += weights[i] * std::conj(f[i]) * g[i];
  return sum;
}

SpectralField apply_symbol_power(const SpectralField& field, const SymbolProvider& provider,
                                 double exponent) {
  const auto sigma = field.grid()->symbol_values(provider);
  SpectralField out = field;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= std::pow(sigma[i], exponent);
  return out;
}

}  // namespace hwave
