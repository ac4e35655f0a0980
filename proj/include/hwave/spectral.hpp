#pragma once

#include "hwave/group.hpp"

#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <variant>
#include <vector>

namespace hwave {

using complex = std::complex<double>;

enum class Backend { Heisenberg, Abelian };

/// (-L)^power on H^n: symbol (|lambda| mu_k)^power, degree 2 * power.
struct SubLaplacianSymbol {
  int power = 1;
};

/// Positive homogeneous elliptic operator on R^d with constant coefficients.
///   Separable: sum_j a_j xi_j^{2m}
///   Isotropic: (sum_j a_j xi_j^2)^m      ((-Delta)^m for a_j = 1)
struct AbelianSymbol {
  enum class Form { Separable, Isotropic };
  Form form = Form::Isotropic;
  std::vector<double> coefficients;
  int order_half = 1;  // m
};

class SymbolProvider {
 public:
  static SymbolProvider sub_laplacian(int power = 1);
  static SymbolProvider abelian_separable(std::vector<double> coefficients, int m);
  static SymbolProvider abelian_isotropic(std::vector<double> coefficients, int m);
  static SymbolProvider poly_laplacian(int d, int m);

  Backend backend() const;
  /// Homogeneous degree nu.
  double degree() const;
  /// Abelian dimension; 0 for the sub-Laplacian.
  int dimension() const;

  /// (|lambda| mu)^power; throws for lambda == 0.
  double heisenberg_value(double lambda, double mu) const;
  double abelian_value(std::span<const double> xi) const;

  const std::variant<SubLaplacianSymbol, AbelianSymbol>& variant() const { return v_; }

 private:
  explicit SymbolProvider(std::variant<SubLaplacianSymbol, AbelianSymbol> v) : v_(std::move(v)) {}
  std::variant<SubLaplacianSymbol, AbelianSymbol> v_;
};

double symbol_value(const SymbolProvider& provider, double lambda, const MultiIndex& k);
double symbol_value(const SymbolProvider& provider, std::span<const double> xi);

/// Discrete frequency set.
///
/// Heisenberg: lambda nodes on +-[lambda_min, lambda_max] (log-spaced
/// trapezoid, mirrored), Hermite set {k : mu_k <= mu_max}; coefficient layout
/// [node][row k][column l].
///
/// Abelian: the half-shifted DFT lattice xi = (j + 1/2) dxi, j in [-N/2, N/2),
/// per axis on a periodic box [-R, R)^d; coefficient layout is row-major over
/// axes in FFT order.
///
/// Weights are the Plancherel weights: raw quadrature weight times the
/// calibrated constant.
class ModeGrid {
 public:
  Backend backend() const { return backend_; }
  int dimension() const { return n_; }
  std::uint64_t stamp() const { return stamp_; }

  std::size_t coefficient_count() const;

  // Heisenberg accessors.
  const std::vector<double>& lambda_nodes() const { return lambda_nodes_; }
  const std::vector<double>& raw_weights() const { return raw_weights_; }
  const std::vector<MultiIndex>& hermite_set() const { return hermite_set_; }
  const std::vector<double>& oscillator_eigenvalues() const { return mu_; }
  std::size_t hermite_count() const { return hermite_set_.size(); }
  /// Highest single-axis order occurring in the Hermite set.
  int max_axis_order() const { return max_axis_order_; }
  double node_weight(std::size_t node) const { return raw_weights_[node] * plancherel_constant_; }
  std::size_t index(std::size_t node, std::size_t k, std::size_t l) const {
    return (node * hermite_set_.size() + k) * hermite_set_.size() + l;
  }

  // Abelian accessors.
  int points_per_axis() const { return points_; }
  double half_width() const { return half_width_; }
  double frequency_spacing() const;
  /// Frequency of FFT index j on one axis.
  double axis_frequency(int j) const;

  double plancherel_constant() const { return plancherel_constant_; }
  bool calibrated() const { return calibrated_; }

  /// Per-coefficient Plancherel weight.
  std::vector<double> coefficient_weights() const;
  /// Per-coefficient symbol value.
  std::vector<double> symbol_values(const SymbolProvider& provider) const;

  /// Copy with a new Plancherel constant (and a fresh stamp).
  std::shared_ptr<const ModeGrid> with_plancherel_constant(double c) const;
  /// Copy with all raw weights multiplied by factor.
  std::shared_ptr<const ModeGrid> with_scaled_weights(double factor) const;

  friend std::shared_ptr<const ModeGrid> build_grid(double, double, int, double, int);
  friend std::shared_ptr<const ModeGrid> build_abelian_grid(int, int, double);
  friend std::shared_ptr<const ModeGrid> make_heisenberg_grid(int, std::vector<double>,
                                                              std::vector<double>, double,
                                                              std::vector<MultiIndex>, bool);

  bool same_layout(const ModeGrid& other) const;

 private:
  ModeGrid() = default;
  void finalize();

  Backend backend_ = Backend::Heisenberg;
  int n_ = 1;
  std::uint64_t stamp_ = 0;
  std::vector<double> lambda_nodes_;
  std::vector<double> raw_weights_;
  std::vector<MultiIndex> hermite_set_;
  std::vector<double> mu_;
  int max_axis_order_ = 0;
  int points_ = 0;
  double half_width_ = 0.0;
  double plancherel_constant_ = 1.0;
  bool calibrated_ = false;
};

using GridPtr = std::shared_ptr<const ModeGrid>;

/// Symmetric log-trapezoid lambda grid with node_count nodes per sign.
/// The stored Plancherel constant is 1 until calibrated.
GridPtr build_grid(double lambda_min, double lambda_max, int node_count, double mu_max, int n);

/// Abelian grid on [-R, R)^d with N points per axis (N even).
/// The Plancherel constant is preset to (2 pi)^{-d}.
GridPtr build_abelian_grid(int d, int points_per_axis, double half_width);

/// Reassembles a Heisenberg grid from its stored description (deserialization).
GridPtr make_heisenberg_grid(int n, std::vector<double> nodes, std::vector<double> raw_weights,
                             double plancherel_constant, std::vector<MultiIndex> hermite_set,
                             bool calibrated);

/// Coefficients of a function in frequency space.
class SpectralField {
 public:
  SpectralField() = default;
  explicit SpectralField(GridPtr grid);
  SpectralField(GridPtr grid, std::vector<complex> coefficients);

  const GridPtr& grid() const { return grid_; }
  const std::vector<complex>& coefficients() const { return coeffs_; }
  std::vector<complex>& coefficients() { return coeffs_; }
  std::size_t size() const { return coeffs_.size(); }

  complex& operator[](std::size_t i) { return coeffs_[i]; }
  const complex& operator[](std::size_t i) const { return coeffs_[i]; }

  bool is_zero() const;
  bool all_finite() const;

  SpectralField& operator+=(const SpectralField& other);
  SpectralField& operator-=(const SpectralField& other);
  SpectralField& operator*=(complex factor);

  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(complex s, SpectralField a) { return a *= s; }

 private:
  void check_compatible(const SpectralField& other) const;

  GridPtr grid_;
  std::vector<complex> coeffs_;
};

double l2_norm(const SpectralField& field);

/// sqrt(sum_i w_i |c_i|^2 (mass + sigma_i)^{2s/nu}). With the default mass 1
/// this is the H^s norm; s may be negative.
double sobolev_norm(const SpectralField& field, const SymbolProvider& provider, double s,
                    double mass = 1.0);

/// ||R^{a/nu} u||_{L2}: multiplier sigma^{2a/nu} on squared coefficients.
double homogeneous_sobolev_norm(const SpectralField& field, const SymbolProvider& provider,
                                double a);

/// sum_i w_i conj(f_i) g_i.
complex weighted_inner(const SpectralField& f, const SpectralField& g);

/// Coefficient-wise multiplication by sigma^exponent (R^{exponent} u).
SpectralField apply_symbol_power(const SpectralField& field, const SymbolProvider& provider,
                                 double exponent);

}  // namespace hwave
