#include "hwave/transform.hpp"

#include "hwave/hermite.hpp"

#include <Eigen/Dense>
#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace hwave {

namespace {

constexpr complex kI(0.0, 1.0);

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

// ---------------------------------------------------------------------------
// SpatialGrid / SpatialField

SpatialGrid SpatialGrid::heisenberg(int n, double rx, double ry, double rt, int nx, int ny, int nt) {
  if (n < 1) throw std::invalid_argument("SpatialGrid: n must be >= 1");
  if (!(rx > 0.0) || !(ry > 0.0) || !(rt > 0.0)) {
    throw std::invalid_argument("SpatialGrid: half widths must be positive");
  }
  if (nx < 2 || ny < 2 || nt < 2) throw std::invalid_argument("SpatialGrid: need >= 2 points per axis");
  SpatialGrid g;
  for (int j = 0; j < n; ++j) {
    g.half_widths.push_back(rx);
    g.shape.push_back(nx);
  }
  for (int j = 0; j < n; ++j) {
    g.half_widths.push_back(ry);
    g.shape.push_back(ny);
  }
  g.half_widths.push_back(rt);
  g.shape.push_back(nt);
  return g;
}

SpatialGrid SpatialGrid::abelian(int d, int points, double half_width) {
  if (d < 1) throw std::invalid_argument("SpatialGrid: d must be >= 1");
  if (points < 2 || points % 2 != 0) throw std::invalid_argument("SpatialGrid: points must be even");
  if (!(half_width > 0.0)) throw std::invalid_argument("SpatialGrid: half width must be positive");
  SpatialGrid g;
  g.half_widths.assign(d, half_width);
  g.shape.assign(d, points);
  g.periodic = true;
  return g;
}

std::size_t SpatialGrid::point_count() const {
  std::size_t total = 1;
  for (int s : shape) total *= static_cast<std::size_t>(s);
  return total;
}

double SpatialGrid::spacing(std::size_t axis) const {
  const double width = 2.0 * half_widths[axis];
  return periodic ? width / shape[axis] : width / (shape[axis] - 1);
}

double SpatialGrid::coordinate(std::size_t axis, int i) const {
  return -half_widths[axis] + i * spacing(axis);
}

double SpatialGrid::cell_volume() const {
  double v = 1.0;
  for (std::size_t a = 0; a < axes(); ++a) v *= spacing(a);
  return v;
}

std::vector<double> SpatialGrid::point(std::size_t flat) const {
  std::vector<double> p(axes());
  for (std::size_t a = axes(); a-- > 0;) {
    p[a] = coordinate(a, static_cast<int>(flat % shape[a]));
    flat /= shape[a];
  }
  return p;
}

SpatialField::SpatialField(SpatialGrid g) : grid(std::move(g)) {
  samples.assign(grid.point_count(), complex(0.0));
}

SpatialField::SpatialField(SpatialGrid g, std::vector<complex> s)
    : grid(std::move(g)), samples(std::move(s)) {
  if (samples.size() != grid.point_count()) {
    throw std::invalid_argument("SpatialField: sample count does not match grid");
  }
}

double SpatialField::l2_norm() const {
  double sum = 0.0;
  for (const auto& v : samples) sum += std::norm(v);
  return std::sqrt(sum * grid.cell_volume());
}

double SpatialField::lq_norm(double q) const {
  if (!(q >= 1.0)) throw std::invalid_argument("lq_norm: q must be >= 1");
  double peak = max_abs();
  if (peak == 0.0) return 0.0;
  double sum = 0.0;
  for (const auto& v : samples) sum += std::pow(std::abs(v) / peak, q);
  return peak * std::pow(sum * grid.cell_volume(), 1.0 / q);
}

double SpatialField::max_abs() const {
  double m = 0.0;
  for (const auto& v : samples) m = std::max(m, std::abs(v));
  return m;
}

bool SpatialField::all_finite() const {
  return std::all_of(samples.begin(), samples.end(),
                     [](complex v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); });
}

double boundary_decay_ratio(const SpatialField& f) {
  const double peak = f.max_abs();
  if (peak == 0.0) return 0.0;
  const auto& shape = f.grid.shape;
  double edge = 0.0;
  std::vector<int> idx(shape.size());
  for (std::size_t flat = 0; flat < f.samples.size(); ++flat) {
    std::size_t rem = flat;
    bool on_face = false;
    for (std::size_t a = shape.size(); a-- > 0;) {
      const int i = static_cast<int>(rem % shape[a]);
      rem /= shape[a];
      on_face = on_face || i == 0 || i == shape[a] - 1;
    }
    if (on_face) edge = std::max(edge, std::abs(f.samples[flat]));
  }
  return edge / peak;
}

// ---------------------------------------------------------------------------
// Fourier-Wigner matrices

void wigner_matrix(double a, double c, int rows, int cols, complex* out) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("wigner_matrix: empty block");
  // W = e^{iac/2} <D(z) psi_l, psi_k> with D the displacement operator. Each
  // diagonal of fixed offset alpha = |k - l| is a normalized Laguerre sequence
  //   f_m = sqrt(m! / (m + alpha)!) x^{alpha/2} e^{-x/2} L_m^{(alpha)}(x),  x = |z|^2,
  // which obeys a three-term recurrence that is stable in both directions of
  // the turning point (the wanted solution is dominant).
  const complex z = complex(c, a) / std::numbers::sqrt2;
  const double x = std::norm(z);
  const complex global = std::exp(complex(0.0, 0.5 * a * c));
  const double r = std::abs(z);
  const complex down = r > 0.0 ? z / r : complex(0.0);               // k >= l
  const complex up = r > 0.0 ? -std::conj(z) / r : complex(0.0);     // k < l
  std::fill(out, out + static_cast<std::size_t>(rows) * cols, complex(0.0));
  const int span = std::max(rows, cols);
  std::vector<double> f(span);
  for (int alpha = 0; alpha < span; ++alpha) {
    const int len_down = std::min(cols, rows - alpha);  // k = m + alpha, l = m
    const int len_up = alpha > 0 ? std::min(rows, cols - alpha) : 0;  // k = m, l = m + alpha
    const int len = std::max(len_down, len_up);
    if (len <= 0) continue;
    double f0;
    if (x == 0.0) {
      f0 = alpha == 0 ? 1.0 : 0.0;
    } else {
      const double lf = 0.5 * alpha * std::log(x) - 0.5 * x - 0.5 * std::lgamma(alpha + 1.0);
      f0 = lf < -745.0 ? 0.0 : std::exp(lf);
    }
    f[0] = f0;
    for (int m = 0; m + 1 < len; ++m) {
      const double prev = m > 0 ? std::sqrt(m * (m + static_cast<double>(alpha))) * f[m - 1] : 0.0;
      f[m + 1] = ((2.0 * m + 1.0 + alpha - x) * f[m] - prev) /
                 std::sqrt((m + 1.0) * (m + 1.0 + alpha));
    }
    complex phase_down = global;
    complex phase_up = global;
    for (int j = 0; j < alpha; ++j) {
      phase_down *= down;
      phase_up *= up;
    }
    for (int m = 0; m < len_down; ++m) {
      out[static_cast<std::size_t>(m + alpha) * cols + m] = phase_down * f[m];
    }
    for (int m = 0; m < len_up; ++m) {
      out[static_cast<std::size_t>(m) * cols + m + alpha] = phase_up * f[m];
    }
  }
}

void wigner_matrix_quadrature(double a, double c, int rows, int cols, complex* out,
                              int quadrature_order) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("wigner_matrix_quadrature: empty block");
  const auto rule = gauss_hermite(quadrature_order);
  std::fill(out, out + static_cast<std::size_t>(rows) * cols, complex(0.0));
  std::vector<double> pk(rows), pl(cols);
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    // w = v + c/2: psi_k(w) psi_l(w - c) = psi_k(v + c/2) psi_l(v - c/2)
    const double v = rule.nodes[q];
    hermite_functions(v + 0.5 * c, pk);
    hermite_functions(v - 0.5 * c, pl);
    const complex phase = rule.unit_weights[q] * std::exp(kI * (a * (v + 0.5 * c)));
    for (int k = 0; k < rows; ++k) {
      const complex pkp = pk[k] * phase;
      for (int l = 0; l < cols; ++l) out[static_cast<std::size_t>(k) * cols + l] += pkp * pl[l];
    }
  }
}

namespace {

int max_order(const std::vector<MultiIndex>& set) {
  int m = 0;
  for (const auto& k : set) m = std::max(m, *std::max_element(k.k.begin(), k.k.end()));
  return m;
}

}  // namespace

RepresentationMatrix representation_block(double lambda, const GroupElement& g,
                                          const std::vector<MultiIndex>& rows,
                                          const std::vector<MultiIndex>& cols,
                                          RepresentationMethod method) {
  if (lambda == 0.0 || !std::isfinite(lambda)) {
    throw std::domain_error("representation_block: lambda must be finite and nonzero");
  }
  const int n = g.dimension();
  if (n < 1 || static_cast<int>(g.y.size()) != n) {
    throw std::invalid_argument("representation_block: malformed group element");
  }
  for (const auto* set : {&rows, &cols}) {
    if (set->empty()) throw std::invalid_argument("representation_block: empty index set");
    for (const auto& k : *set) {
      if (static_cast<int>(k.k.size()) != n) {
        throw std::invalid_argument("representation_block: multi-index dimension mismatch");
      }
    }
  }
  const int ar = max_order(rows) + 1;
  const int ac = max_order(cols) + 1;
  const double s = lambda > 0.0 ? 1.0 : -1.0;
  const double rho = std::sqrt(std::abs(lambda));
  std::vector<std::vector<complex>> axis(n, std::vector<complex>(static_cast<std::size_t>(ar) * ac));
  double xy = 0.0;
  for (int j = 0; j < n; ++j) {
    xy += g.x[j] * g.y[j];
    if (method == RepresentationMethod::Recurrence) {
      wigner_matrix(s * rho * g.x[j], rho * g.y[j], ar, ac, axis[j].data());
    } else {
      const int order = std::max(96, ar + ac + 32);
      wigner_matrix_quadrature(s * rho * g.x[j], rho * g.y[j], ar, ac, axis[j].data(), order);
    }
  }
  const complex phase = std::exp(kI * (lambda * g.t - 0.5 * lambda * xy));
  RepresentationMatrix m;
  m.lambda = lambda;
  m.rows = rows;
  m.cols = cols;
  m.entries.resize(rows.size() * cols.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t q = 0; q < cols.size(); ++q) {
      complex v = phase;
      for (int j = 0; j < n; ++j) v *= axis[j][static_cast<std::size_t>(rows[r].k[j]) * ac + cols[q].k[j]];
      m.entries[r * cols.size() + q] = v;
    }
  }
  return m;
}

RepresentationMatrix representation_matrix(double lambda, const GroupElement& g, int K) {
  if (K < 1) throw std::invalid_argument("representation_matrix: K must be >= 1");
  const int n = g.dimension();
  const auto set = enumerate_multi_indices(n, 2.0 * (K - 1) + n);
  return representation_block(lambda, g, set, set, RepresentationMethod::Quadrature);
}

double isometry_defect(const RepresentationMatrix& m) {
  const std::size_t nr = m.rows.size();
  const std::size_t nc = m.cols.size();
  double defect = 0.0;
  for (std::size_t i = 0; i < nc; ++i) {
    for (std::size_t j = 0; j < nc; ++j) {
      complex s = 0.0;
      for (std::size_t r = 0; r < nr; ++r) s += std::conj(m(r, i)) * m(r, j);
      defect = std::max(defect, std::abs(s - (i == j ? 1.0 : 0.0)));
    }
  }
  return defect;
}

// ---------------------------------------------------------------------------
// SpectralTransform

struct SpectralTransform::Impl {
  using Matrix = Eigen::Matrix<complex, Eigen::Dynamic, Eigen::Dynamic>;
  using RowMatrix = Eigen::Matrix<complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  // Heisenberg layout.
  int n = 0;
  std::size_t xy_points = 0;
  std::size_t t_points = 0;
  int axis_size = 0;                     // max single-axis order + 1
  std::vector<std::vector<int>> orders;  // hermite index -> per-axis orders
  std::vector<std::vector<double>> xy;   // per xy point: (x_1..x_n, y_1..y_n)
  Matrix xy_phase;                       // e^{i lambda x.y / 2}, xy point x node
  Matrix time_forward;                   // h_t e^{-i lambda t_m}, t point x node
  Matrix time_inverse;                   // e^{i lambda t_m}, node x t point
  std::vector<Matrix> node_matrices;     // per node, (K^2 x xy points) of W_{lk}
  bool cached = false;

  // Abelian layout.
  fftw_plan forward_plan = nullptr;
  fftw_plan backward_plan = nullptr;
  std::vector<complex> pre_twiddle;   // per flat sample
  std::vector<complex> post_twiddle;  // per flat frequency (forward direction)

  ~Impl() {
    std::lock_guard lock(fftw_planner_mutex());
    if (forward_plan) fftw_destroy_plan(forward_plan);
    if (backward_plan) fftw_destroy_plan(backward_plan);
  }

  // Row (k, l) holds M~_{lk}(lambda, point) = prod_j W(s rho x_j, rho y_j)[l_j][k_j].
  Matrix build_node_matrix(double lambda) const {
    const std::size_t kc = orders.size();
    const double s = lambda > 0.0 ? 1.0 : -1.0;
    const double rho = std::sqrt(std::abs(lambda));
    const std::size_t block = static_cast<std::size_t>(axis_size) * axis_size;
    std::vector<complex> tile(n * block);
    Matrix out(kc * kc, xy_points);
    for (std::size_t p = 0; p < xy_points; ++p) {
      for (int j = 0; j < n; ++j) {
        wigner_matrix(s * rho * xy[p][j], rho * xy[p][n + j], axis_size, axis_size, tile.data() + j * block);
      }
      for (std::size_t k = 0; k < kc; ++k) {
        for (std::size_t l = 0; l < kc; ++l) {
          complex v = tile[static_cast<std::size_t>(orders[l][0]) * axis_size + orders[k][0]];
          for (int j = 1; j < n; ++j) {
            v *= tile[j * block + static_cast<std::size_t>(orders[l][j]) * axis_size + orders[k][j]];
          }
          out(k * kc + l, p) = v;
        }
      }
    }
    return out;
  }
};

SpectralTransform::SpectralTransform(GridPtr grid, SpatialGrid spatial, TransformOptions options)
    : grid_(std::move(grid)), spatial_(std::move(spatial)), options_(options),
      impl_(std::make_unique<Impl>()) {
  if (!grid_) throw std::invalid_argument("SpectralTransform: null grid");
  auto& im = *impl_;
  if (grid_->backend() == Backend::Heisenberg) {
    const int n = grid_->dimension();
    if (spatial_.periodic || static_cast<int>(spatial_.axes()) != 2 * n + 1) {
      throw std::invalid_argument("SpectralTransform: spatial grid is not a Heisenberg box of matching n");
    }
    im.n = n;
    im.t_points = static_cast<std::size_t>(spatial_.shape.back());
    im.xy_points = spatial_.point_count() / im.t_points;
    im.axis_size = grid_->max_axis_order() + 1;
    for (const auto& k : grid_->hermite_set()) im.orders.push_back(k.k);
    const auto& nodes = grid_->lambda_nodes();
    const std::size_t tax = spatial_.axes() - 1;
    const double ht = spatial_.spacing(tax);
    im.xy.resize(im.xy_points);
    im.xy_phase.resize(im.xy_points, nodes.size());
    for (std::size_t p = 0; p < im.xy_points; ++p) {
      auto pt = spatial_.point(p * im.t_points);
      pt.pop_back();
      double dot = 0.0;
      for (int j = 0; j < n; ++j) dot += pt[j] * pt[n + j];
      for (std::size_t i = 0; i < nodes.size(); ++i) im.xy_phase(p, i) = std::exp(complex(0.0, 0.5 * nodes[i] * dot));
      im.xy[p] = std::move(pt);
    }
    im.time_forward.resize(im.t_points, nodes.size());
    im.time_inverse.resize(nodes.size(), im.t_points);
    for (std::size_t m = 0; m < im.t_points; ++m) {
      const double t = spatial_.coordinate(tax, static_cast<int>(m));
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        const complex e = std::exp(complex(0.0, nodes[i] * t));
        im.time_forward(m, i) = ht * std::conj(e);
        im.time_inverse(i, m) = e;
      }
    }
    const std::size_t kc = grid_->hermite_count();
    const std::size_t bytes = nodes.size() * kc * kc * im.xy_points * sizeof(complex);
    if (bytes <= options_.cache_budget_bytes) {
      im.node_matrices.reserve(nodes.size());
      for (double lambda : nodes) im.node_matrices.push_back(im.build_node_matrix(lambda));
      im.cached = true;
    }
    return;
  }

  const int d = grid_->dimension();
  const int N = grid_->points_per_axis();
  if (!spatial_.periodic || static_cast<int>(spatial_.axes()) != d ||
      std::any_of(spatial_.shape.begin(), spatial_.shape.end(), [N](int s) { return s != N; }) ||
      std::any_of(spatial_.half_widths.begin(), spatial_.half_widths.end(),
                  [&](double r) { return std::abs(r - grid_->half_width()) > 1e-12 * r; })) {
    throw std::invalid_argument("SpectralTransform: spatial grid does not match the abelian grid");
  }
  const std::size_t total = spatial_.point_count();
  im.pre_twiddle.resize(total);
  im.post_twiddle.resize(total);
  std::vector<int> idx(d);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    int sum = 0;
    for (int a = d; a-- > 0;) {
      idx[a] = static_cast<int>(rem % N);
      rem /= N;
      sum += idx[a];
    }
    // e^{-i pi m / N} per axis before the DFT; i (-1)^j per axis after it.
    im.pre_twiddle[flat] = std::exp(complex(0.0, -std::numbers::pi * sum / N));
    complex post = 1.0;
    for (int a = 0; a < d; ++a) post *= (idx[a] % 2 == 0 ? kI : -kI);
    im.post_twiddle[flat] = post;
  }
  std::vector<int> dims(d, N);
  std::vector<complex> scratch(total);
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  std::lock_guard lock(fftw_planner_mutex());
  im.forward_plan = fftw_plan_dft(d, dims.data(), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  im.backward_plan = fftw_plan_dft(d, dims.data(), buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  if (!im.forward_plan || !im.backward_plan) throw std::runtime_error("SpectralTransform: FFTW planning failed");
}

SpectralTransform::~SpectralTransform() = default;
SpectralTransform::SpectralTransform(SpectralTransform&&) noexcept = default;
SpectralTransform& SpectralTransform::operator=(SpectralTransform&&) noexcept = default;

bool SpectralTransform::cached() const { return impl_->cached; }

void SpectralTransform::rebind(GridPtr grid) {
  if (!grid || !grid->same_layout(*grid_)) {
    throw std::invalid_argument("SpectralTransform::rebind: layout differs");
  }
  grid_ = std::move(grid);
}

SpectralField SpectralTransform::forward(const SpatialField& f) const {
  return std::move(forward_batch({f}).front());
}

SpatialField SpectralTransform::synthesize(const SpectralField& field) const {
  return std::move(synthesize_batch({field}).front());
}

namespace {

// Batch members processed together; bounds the scratch memory.
constexpr std::size_t kBatchChunk = 16;

}  // namespace

std::vector<SpectralField> SpectralTransform::forward_batch(const std::vector<SpatialField>& fields) const {
  double worst = 0.0;
  for (const auto& f : fields) {
    if (!(f.grid == spatial_)) throw std::invalid_argument("forward: spatial grid mismatch");
    const double ratio = boundary_decay_ratio(f);
    worst = std::max(worst, ratio);
    if (!spatial_.periodic && options_.strict_boundary && ratio > options_.boundary_tolerance) {
      throw BoundaryDecayError("forward: field does not decay at the box boundary (ratio " +
                               std::to_string(ratio) + ")");
    }
  }
  last_boundary_ratio_ = worst;
  const auto& im = *impl_;
  std::vector<SpectralField> out;
  out.reserve(fields.size());
  if (grid_->backend() == Backend::Abelian) {
    const double h = spatial_.cell_volume();
    for (const auto& f : fields) {
      SpectralField F(grid_);
      std::vector<complex> buf(f.samples.size());
      for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = f.samples[i] * im.pre_twiddle[i];
      auto* p = reinterpret_cast<fftw_complex*>(buf.data());
      fftw_execute_dft(im.forward_plan, p, p);
      for (std::size_t i = 0; i < buf.size(); ++i) F[i] = h * im.post_twiddle[i] * buf[i];
      out.push_back(std::move(F));
    }
    return out;
  }

  using Matrix = Impl::Matrix;
  const std::size_t nodes = grid_->lambda_nodes().size();
  const std::size_t kc = grid_->hermite_count();
  const double cell_xy = spatial_.cell_volume() / spatial_.spacing(spatial_.axes() - 1);
  for (std::size_t i = 0; i < fields.size(); ++i) out.emplace_back(grid_);
  for (std::size_t start = 0; start < fields.size(); start += kBatchChunk) {
    const std::size_t count = std::min(kBatchChunk, fields.size() - start);
    // Fourier transform in the central variable: (xy point) x (node) per member.
    std::vector<Matrix> ft(count);
    for (std::size_t b = 0; b < count; ++b) {
      Eigen::Map<const Impl::RowMatrix> x(fields[start + b].samples.data(), im.xy_points, im.t_points);
      ft[b] = cell_xy * (x * im.time_forward).cwiseProduct(im.xy_phase);
    }
    Matrix coef(im.xy_points, count);
    for (std::size_t i = 0; i < nodes; ++i) {
      for (std::size_t b = 0; b < count; ++b) coef.col(b) = ft[b].col(i);
      const Matrix blocks = im.cached ? Matrix(im.node_matrices[i].conjugate() * coef)
                                      : Matrix(im.build_node_matrix(grid_->lambda_nodes()[i]).conjugate() * coef);
      for (std::size_t b = 0; b < count; ++b) {
        std::copy(blocks.col(b).data(), blocks.col(b).data() + kc * kc,
                  out[start + b].coefficients().data() + grid_->index(i, 0, 0));
      }
    }
  }
  return out;
}

std::vector<SpatialField> SpectralTransform::synthesize_batch(const std::vector<SpectralField>& fields) const {
  for (const auto& f : fields) {
    if (!f.grid() || !f.grid()->same_layout(*grid_)) {
      throw std::invalid_argument("synthesize: field grid does not match the transform");
    }
  }
  const auto& im = *impl_;
  std::vector<SpatialField> out;
  out.reserve(fields.size());
  if (grid_->backend() == Backend::Abelian) {
    for (const auto& field : fields) {
      SpatialField s(spatial_);
      const double w = field.grid()->coefficient_weights().front();
      std::vector<complex> buf(s.samples.size());
      for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = field[i] * std::conj(im.post_twiddle[i]);
      auto* p = reinterpret_cast<fftw_complex*>(buf.data());
      fftw_execute_dft(im.backward_plan, p, p);
      for (std::size_t i = 0; i < buf.size(); ++i) s.samples[i] = w * std::conj(im.pre_twiddle[i]) * buf[i];
      out.push_back(std::move(s));
    }
    return out;
  }

  using Matrix = Impl::Matrix;
  const std::size_t nodes = grid_->lambda_nodes().size();
  const std::size_t kc = grid_->hermite_count();
  for (std::size_t i = 0; i < fields.size(); ++i) out.emplace_back(spatial_);
  for (std::size_t start = 0; start < fields.size(); start += kBatchChunk) {
    const std::size_t count = std::min(kBatchChunk, fields.size() - start);
    std::vector<Matrix> amp(count, Matrix(im.xy_points, nodes));
    Matrix blocks(kc * kc, count);
    for (std::size_t i = 0; i < nodes; ++i) {
      for (std::size_t b = 0; b < count; ++b) {
        const auto& f = fields[start + b];
        const complex* src = f.coefficients().data() + f.grid()->index(i, 0, 0);
        blocks.col(b) = f.grid()->node_weight(i) * Eigen::Map<const Eigen::VectorXcd>(src, kc * kc);
      }
      const Matrix trace = im.cached ? Matrix(im.node_matrices[i].transpose() * blocks)
                                     : Matrix(im.build_node_matrix(grid_->lambda_nodes()[i]).transpose() * blocks);
      for (std::size_t b = 0; b < count; ++b) {
        amp[b].col(i) = trace.col(b).cwiseProduct(im.xy_phase.col(i).conjugate());
      }
    }
    for (std::size_t b = 0; b < count; ++b) {
      Eigen::Map<Impl::RowMatrix> y(out[start + b].samples.data(), im.xy_points, im.t_points);
      y = amp[b] * im.time_inverse;
    }
  }
  return out;
}

SpectralField forward_transform(const SpatialField& f, const GridPtr& grid,
                                const TransformOptions& options) {
  TransformOptions opts = options;
  opts.cache_budget_bytes = 0;
  return SpectralTransform(grid, f.grid, opts).forward(f);
}

std::vector<complex> inverse_transform(const SpectralField& field,
                                       const std::vector<GroupElement>& points) {
  const auto& grid = field.grid();
  if (!grid || grid->backend() != Backend::Heisenberg) {
    throw std::invalid_argument("inverse_transform: needs a Heisenberg field");
  }
  const auto& set = grid->hermite_set();
  const std::size_t kc = set.size();
  std::vector<complex> out(points.size(), complex(0.0));
  for (std::size_t q = 0; q < points.size(); ++q) {
    if (points[q].dimension() != grid->dimension()) {
      throw std::invalid_argument("inverse_transform: group element dimension mismatch");
    }
    for (std::size_t i = 0; i < grid->lambda_nodes().size(); ++i) {
      const auto m = representation_block(grid->lambda_nodes()[i], points[q], set, set,
                                          RepresentationMethod::Recurrence);
      complex trace = 0.0;
      for (std::size_t k = 0; k < kc; ++k) {
        for (std::size_t l = 0; l < kc; ++l) trace += field[grid->index(i, k, l)] * m(l, k);
      }
      out[q] += grid->node_weight(i) * trace;
    }
  }
  return out;
}

CalibrationResult calibrate_plancherel(const SpatialField& reference, const GridPtr& grid,
                                       const TransformOptions& options) {
  if (!grid) throw std::invalid_argument("calibrate_plancherel: null grid");
  const double spatial = reference.l2_norm();
  if (!(spatial > 0.0)) throw std::invalid_argument("calibrate_plancherel: zero reference field");
  const auto raw = grid->with_plancherel_constant(1.0);
  const auto f = SpectralTransform(raw, reference.grid, options).forward(reference);
  const double spectral = l2_norm(f);
  if (!(spectral > 0.0)) throw std::invalid_argument("calibrate_plancherel: reference has no resolved content");
  const double c = spatial * spatial / (spectral * spectral);
  return {c, grid->with_plancherel_constant(c)};
}

}  // namespace hwave
