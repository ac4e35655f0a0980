#pragma once

#include "hwave/semilinear.hpp"
#include "hwave/spectral.hpp"
#include "hwave/transform.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hwave {

/// u(x, y, t) = A exp(-alpha |x - x0|^2 - alpha |y|^2 - t^2 / (2 tau^2)) e^{i omega t} on H^n;
/// on R^d only alpha, x0 (first axis) and the amplitude are used.
struct GaussianSpec {
  double amplitude = 1.0;
  double alpha = 0.5;
  double tau = 2.0;
  double omega = 2.0;
  double x0 = 0.0;

  complex operator()(const std::vector<double>& p) const;
  friend bool operator==(const GaussianSpec&, const GaussianSpec&) = default;
};

SpatialField sample_gaussian(const SpatialGrid& grid, const GaussianSpec& spec);

struct BackendConfig {
  std::string type = "heisenberg";  // heisenberg | abelian
  int n = 1;
  int d = 3;
  std::vector<double> coefficients{1.0, 1.0, 1.0};
  int order = 1;                     // m in (sum a_j xi_j^2)^m or sum a_j xi_j^{2m}
  std::string form = "isotropic";    // isotropic | separable
  friend bool operator==(const BackendConfig&, const BackendConfig&) = default;
};

struct GridConfig {
  double lambda_min = 1.0 / 16;
  double lambda_max = 16.0;
  int nodes_per_sign = 64;
  double mu_max = 31.0;
  int points = 32;           // abelian
  double half_width = 10.0;  // abelian
  friend bool operator==(const GridConfig&, const GridConfig&) = default;
};

struct SpatialConfig {
  std::vector<double> half_widths{7.0, 7.0, 14.0};
  std::vector<int> points{41, 41, 97};
  friend bool operator==(const SpatialConfig&, const SpatialConfig&) = default;
};

struct DataConfig {
  GaussianSpec u0;
  std::optional<GaussianSpec> u1;
  /// When set, data are rescaled so ||u0||_{H^{nu/2}} + ||u1||_{L2} equals it.
  std::optional<double> data_norm;
  friend bool operator==(const DataConfig&, const DataConfig&) = default;
};

struct NonlinearityConfig {
  std::string type = "zero";  // zero | power | power-tuple
  double mu_re = 1.0;
  double mu_im = 0.0;
  double p = 2.0;
  friend bool operator==(const NonlinearityConfig&, const NonlinearityConfig&) = default;
};

struct TimeConfig {
  double t_end = 8.0;
  int steps = 40;
  friend bool operator==(const TimeConfig&, const TimeConfig&) = default;
};

struct PicardConfig {
  double tolerance = 1e-10;
  int max_iter = 40;
  double r = 2.0;
  double divergence_factor = 2.0;
  double boundary_tolerance = 1e-2;
  bool search_epsilon = false;
  double epsilon_lo = 1e-3;
  double epsilon_hi = 1.0;
  int trials = 4;
  friend bool operator==(const PicardConfig&, const PicardConfig&) = default;
};

struct FdConfig {
  std::vector<double> half_widths{4.0, 4.0, 8.0};
  std::vector<int> points{64, 64, 64};
  double dt_fraction = 0.5;
  int samples = 4;
  std::vector<int> order_points{21, 41, 81};
  std::vector<int> residual_points{96, 96, 96};
  std::vector<double> residual_half_widths{5.0, 5.0, 10.0};
  friend bool operator==(const FdConfig&, const FdConfig&) = default;
};

struct GnConfig {
  int n = 1;
  std::vector<std::string> q_values{"2", "8/3", "3", "4"};
  int family_size = 100;
  std::string Q = "3";
  std::string a = "1";
  std::string p = "2";
  std::string r = "2";
  std::string q = "3";
  int abelian_points = 64;
  double abelian_half_width = 10.0;
  std::vector<double> dilations{1.0, 2.0};
  friend bool operator==(const GnConfig&, const GnConfig&) = default;
};

struct RunConfig {
  BackendConfig backend;
  GridConfig grid;
  SpatialConfig spatial;
  DataConfig data;
  double b = 2.0;
  double m = 2.0;
  NonlinearityConfig nonlinearity;
  TimeConfig time;
  PicardConfig picard;
  FdConfig fd;
  GnConfig gn;
  std::uint64_t seed = 1;
  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Aggregated field-level validation failures.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  std::vector<std::string> problems;
};

/// Parses JSON text; every required section must be present. Throws
/// ConfigError listing each missing or invalid field.
RunConfig parse_config(const std::string& json_text);
std::string serialize_config(const RunConfig& config);
/// Field-level problems of an already parsed config (empty when valid).
std::vector<std::string> validate(const RunConfig& config);

/// Built objects of a run: grid, box, transform, symbol, data.
struct Problem {
  SymbolProvider provider = SymbolProvider::sub_laplacian();
  GridPtr grid;
  SpatialGrid spatial;
  std::shared_ptr<SpectralTransform> transform;
  SpectralField u0;
  SpectralField u1;
  double plancherel_constant = 0.0;
  double data_scale = 1.0;  // factor applied to reach the configured data norm
};

/// Builds the grid, calibrates the Plancherel constant on u0's profile
/// (Heisenberg) and transforms the data.
Problem build_problem(const RunConfig& config);

Nonlinearity build_nonlinearity(const RunConfig& config);
SymbolProvider build_provider(const BackendConfig& backend);

}  // namespace hwave
