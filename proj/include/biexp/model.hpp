#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "biexp/errors.hpp"

namespace biexp {

// Coordinate order used by every 4-vector in the library (gradients, boxes,
// pin masks).
enum class Param : std::size_t { sigma1_sq = 0, sigma2_sq = 1, rho = 2, theta = 3 };

inline constexpr std::size_t kNumParams = 4;

[[nodiscard]] std::string_view param_name(Param p) noexcept;

// Parses "sigma1_sq"/"sigma1-sq", "sigma2_sq"/"sigma2-sq", "rho", "theta".
[[nodiscard]] Param parse_param(std::string_view name);

/// Covariance parameters of the separable bivariate exponential model
///
///   Cov(Z_i(s), Z_j(t)) = sigma_i sigma_j (rho + (1 - rho) 1{i=j}) exp(-theta |s - t|).
///
/// Validated on construction: both variances and theta positive, |rho| < 1.
class Params {
 public:
  Params(double sigma1_sq, double sigma2_sq, double rho, double theta);

  // theta = 3 / practical_range: the distance at which correlation drops to ~0.05.
  [[nodiscard]] static Params from_practical_range(double sigma1_sq, double sigma2_sq,
                                                   double rho, double practical_range);
  [[nodiscard]] static Params from_array(const std::array<double, kNumParams>& values);

  [[nodiscard]] double sigma1_sq() const noexcept { return sigma1_sq_; }
  [[nodiscard]] double sigma2_sq() const noexcept { return sigma2_sq_; }
  [[nodiscard]] double rho() const noexcept { return rho_; }
  [[nodiscard]] double theta() const noexcept { return theta_; }
  [[nodiscard]] double sigma1() const noexcept;
  [[nodiscard]] double sigma2() const noexcept;
  [[nodiscard]] double get(Param p) const noexcept;

  // The 2x2 cross-component matrix A with Sigma = A (x) R.
  [[nodiscard]] Eigen::Matrix2d cross_covariance() const;
  [[nodiscard]] std::array<double, kNumParams> to_array() const noexcept;

  friend bool operator==(const Params&, const Params&) = default;

 private:
  double sigma1_sq_;
  double sigma2_sq_;
  double rho_;
  double theta_;
};

struct Interval {
  double lo;
  double hi;

  [[nodiscard]] bool pinned() const noexcept { return lo == hi; }
  [[nodiscard]] double clip(double x) const noexcept { return x < lo ? lo : (x > hi ? hi : x); }
  [[nodiscard]] bool contains(double x) const noexcept { return lo <= x && x <= hi; }
};

/// Compact search set J for the likelihood minimisation. A bound pair with
/// lo == hi pins that parameter to a known value.
class ParamBox {
 public:
  ParamBox(Interval sigma1_sq, Interval sigma2_sq, Interval rho, Interval theta);

  // theta in [0.1, 100], variances in [1e-4, 1e4], rho in [-0.999, 0.999].
  [[nodiscard]] static ParamBox defaults();

  [[nodiscard]] const Interval& operator[](Param p) const noexcept {
    return bounds_[static_cast<std::size_t>(p)];
  }
  [[nodiscard]] bool pinned(Param p) const noexcept { return (*this)[p].pinned(); }
  [[nodiscard]] bool contains(const Params& psi) const noexcept;

  [[nodiscard]] ParamBox with(Param p, Interval bounds) const;
  [[nodiscard]] ParamBox pin(Param p, double value) const { return with(p, {value, value}); }

 private:
  std::array<Interval, kNumParams> bounds_;
};

/// Strictly increasing observation points in [0, 1] with cached spacings.
class SamplingGrid {
 public:
  // Minimum admissible gap between consecutive points.
  static constexpr double kMinSpacing = 1e-12;

  explicit SamplingGrid(std::vector<double> points);

  // n points drawn i.i.d. uniform on [0, 1] and sorted. Draws that produce a
  // gap below kMinSpacing are repeated from the same stream.
  template <typename Engine>
  [[nodiscard]] static SamplingGrid uniform(std::size_t n, Engine& engine);
  // n equally spaced points covering [0, 1] (a single point sits at 0).
  [[nodiscard]] static SamplingGrid equispaced(std::size_t n);

  [[nodiscard]] std::size_t size() const noexcept { return points_.size(); }
  [[nodiscard]] std::span<const double> points() const noexcept { return points_; }
  // deltas()[i - 1] = s_{i+1} - s_i for i = 1..n-1 (zero-based points).
  [[nodiscard]] std::span<const double> deltas() const noexcept { return deltas_; }

  friend bool operator==(const SamplingGrid& a, const SamplingGrid& b) { return a.points_ == b.points_; }

 private:
  std::vector<double> points_;
  std::vector<double> deltas_;
};

namespace detail {
[[nodiscard]] bool gaps_admissible(const std::vector<double>& sorted_points) noexcept;
}

template <typename Engine>
SamplingGrid SamplingGrid::uniform(std::size_t n, Engine& engine) {
  if (n == 0) throw DomainError("SamplingGrid::uniform: n must be positive");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> pts(n);
  for (int attempt = 0; attempt < 100; ++attempt) {
    for (auto& p : pts) p = unit(engine);
    std::sort(pts.begin(), pts.end());
    if (detail::gaps_admissible(pts)) return SamplingGrid(std::move(pts));
  }
  throw NumericError("SamplingGrid::uniform: could not draw well-separated points");
}

/// Paired observations (z1, z2) of both components on a grid.
class BivariateSample {
 public:
  BivariateSample(SamplingGrid grid, std::vector<double> z1, std::vector<double> z2);

  [[nodiscard]] std::size_t size() const noexcept { return grid_.size(); }
  [[nodiscard]] const SamplingGrid& grid() const noexcept { return grid_; }
  [[nodiscard]] std::span<const double> z1() const noexcept { return z1_; }
  [[nodiscard]] std::span<const double> z2() const noexcept { return z2_; }
  // 1-based component index.
  [[nodiscard]] std::span<const double> component(int k) const;

 private:
  SamplingGrid grid_;
  std::vector<double> z1_;
  std::vector<double> z2_;
};

// One-step Markov coefficients of the exponential correlation over a spacing:
// decay = exp(-theta delta), innovation = 1 - exp(-2 theta delta), the latter
// via expm1 so small theta*delta keeps full precision. Throws NumericError if
// the innovation variance underflows to zero.
struct StepDecay {
  double decay;
  double innovation;
};
[[nodiscard]] StepDecay step_decay(double theta, double delta);

// Cov(Z_i(s), Z_j(s + h)) for components i, j in {1, 2}.
[[nodiscard]] double kernel(const Params& psi, int i, int j, double h);

// Sigma(psi) = A (x) R as a dense 2n x 2n matrix, component-major ordering
// (all of Z_1 first, then Z_2).
[[nodiscard]] Eigen::MatrixXd dense_covariance(const Params& psi, const SamplingGrid& grid);

// R = [exp(-theta |s_m - s_l|)].
[[nodiscard]] Eigen::MatrixXd correlation_matrix(double theta, const SamplingGrid& grid);

}  // namespace biexp
