#pragma once

#include "hwave/group.hpp"
#include "hwave/spectral.hpp"

#include <memory>
#include <stdexcept>
#include <vector>

namespace hwave {

/// Uniform sampling box. Heisenberg boxes have axes (x_1..x_n, y_1..y_n, t)
/// and include both endpoints; abelian boxes are periodic ([-R, R) with N
/// points). The last axis varies fastest in the sample array.
struct SpatialGrid {
  std::vector<double> half_widths;
  std::vector<int> shape;
  bool periodic = false;

  static SpatialGrid heisenberg(int n, double rx, double ry, double rt, int nx, int ny, int nt);
  static SpatialGrid abelian(int d, int points, double half_width);

  std::size_t axes() const { return shape.size(); }
  std::size_t point_count() const;
  double spacing(std::size_t axis) const;
  double coordinate(std::size_t axis, int i) const;
  double cell_volume() const;
  /// Coordinates of the flat sample index.
  std::vector<double> point(std::size_t flat) const;

  friend bool operator==(const SpatialGrid&, const SpatialGrid&) = default;
};

struct SpatialField {
  SpatialGrid grid;
  std::vector<complex> samples;

  SpatialField() = default;
  explicit SpatialField(SpatialGrid g);
  SpatialField(SpatialGrid g, std::vector<complex> s);

  template <typename F>
  static SpatialField sample(const SpatialGrid& g, F&& f) {
    SpatialField out(g);
    for (std::size_t i = 0; i < out.samples.size(); ++i) out.samples[i] = f(g.point(i));
    return out;
  }

  /// sqrt(sum |f|^2 * cell volume).
  double l2_norm() const;
  /// (sum |f|^q * cell volume)^{1/q}.
  double lq_norm(double q) const;
  double max_abs() const;
  bool all_finite() const;
};

/// max |f| on the box faces divided by max |f| (0 for the zero field).
double boundary_decay_ratio(const SpatialField& f);

class BoundaryDecayError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fourier-Wigner matrix of the Hermite basis on one axis:
///   W_{kl}(a, c) = int e^{i a w} psi_l(w - c) psi_k(w) dw,
/// filled for k < rows, l < cols into out (row-major). With
/// z = (c + i a) / sqrt(2) and k >= l,
///   W_{kl} = e^{iac/2} sqrt(l!/k!) z^{k-l} e^{-|z|^2/2} L_l^{(k-l)}(|z|^2),
/// and W_{lk} is the same with z replaced by -conj(z).
void wigner_matrix(double a, double c, int rows, int cols, complex* out);

/// Same matrix by Gauss-Hermite quadrature centred at w = c/2.
void wigner_matrix_quadrature(double a, double c, int rows, int cols, complex* out,
                              int quadrature_order = 96);

enum class RepresentationMethod { Recurrence, Quadrature };

/// Matrix coefficients M_{kl} = (pi_lambda(g) psi_l, psi_k) of the
/// Schroedinger representation
///   (pi_lambda(x, y, t) h)(w) = exp(i (lambda t - lambda x.y / 2 + sgn(lambda) sqrt|lambda| x.w))
///                               h(w - sqrt|lambda| y),
/// for which d pi_lambda(L) = -|lambda| H_w.
struct RepresentationMatrix {
  double lambda = 0.0;
  std::vector<MultiIndex> rows;
  std::vector<MultiIndex> cols;
  std::vector<complex> entries;  // row-major rows.size() x cols.size()

  complex operator()(std::size_t k, std::size_t l) const { return entries[k * cols.size() + l]; }
};

RepresentationMatrix representation_block(double lambda, const GroupElement& g,
                                          const std::vector<MultiIndex>& rows,
                                          const std::vector<MultiIndex>& cols,
                                          RepresentationMethod method = RepresentationMethod::Quadrature);

/// Square block on {k : mu_k <= 2(K-1) + n} (K x K for n = 1), computed by
/// Gauss-Hermite quadrature. Throws std::domain_error for lambda == 0.
RepresentationMatrix representation_matrix(double lambda, const GroupElement& g, int K);

/// max |(M^* M - I)_{ij}| over the columns of the block.
double isometry_defect(const RepresentationMatrix& m);

struct TransformOptions {
  /// Boundary-decay threshold for forward transforms.
  double boundary_tolerance = 1e-8;
  /// Throw BoundaryDecayError instead of only reporting the ratio.
  bool strict_boundary = false;
  /// Cache Fourier-Wigner tiles when they fit in this many bytes.
  std::size_t cache_budget_bytes = std::size_t(256) << 20;
};

/// Transform pair between a spatial box and a ModeGrid. Heisenberg grids use
/// the group Fourier transform  F(lambda)_{kl} = int f(g) conj(M_{lk}(lambda, g)) dg
/// and its inversion  f(g) = sum_i w_i Tr[F(lambda_i) M(lambda_i, g)];
/// abelian grids use the half-shifted DFT  F(xi) = int f(x) e^{-i xi.x} dx.
///
/// Per-node Wigner matrices are built once at construction when they fit the
/// cache budget (otherwise per call); the object is then safe for concurrent
/// const use apart from last_boundary_ratio().
class SpectralTransform {
 public:
  SpectralTransform(GridPtr grid, SpatialGrid spatial, TransformOptions options = {});
  ~SpectralTransform();
  SpectralTransform(SpectralTransform&&) noexcept;
  SpectralTransform& operator=(SpectralTransform&&) noexcept;

  const GridPtr& grid() const { return grid_; }
  const SpatialGrid& spatial() const { return spatial_; }
  bool cached() const;

  /// Rebinds to a grid with the same layout (e.g. after calibration).
  void rebind(GridPtr grid);

  SpectralField forward(const SpatialField& f) const;
  SpatialField synthesize(const SpectralField& field) const;
  /// Batched variants; each Wigner tile is touched once per call.
  std::vector<SpectralField> forward_batch(const std::vector<SpatialField>& fields) const;
  std::vector<SpatialField> synthesize_batch(const std::vector<SpectralField>& fields) const;

  /// Last boundary ratio seen by forward().
  double last_boundary_ratio() const { return last_boundary_ratio_; }

 private:
  struct Impl;
  GridPtr grid_;
  SpatialGrid spatial_;
  TransformOptions options_;
  std::unique_ptr<Impl> impl_;
  mutable double last_boundary_ratio_ = 0.0;
};

SpectralField forward_transform(const SpatialField& f, const GridPtr& grid,
                                const TransformOptions& options = {});

/// Pointwise inversion at arbitrary group elements (Heisenberg grids).
std::vector<complex> inverse_transform(const SpectralField& field,
                                       const std::vector<GroupElement>& points);

struct CalibrationResult {
  double constant = 0.0;
  GridPtr grid;  // copy of the input grid carrying the constant
};

/// c such that the weighted spectral norm of forward(reference) equals the
/// spatial L2 norm. Throws std::invalid_argument for a zero reference.
CalibrationResult calibrate_plancherel(const SpatialField& reference, const GridPtr& grid,
                                       const TransformOptions& options = {});

}  // namespace hwave
