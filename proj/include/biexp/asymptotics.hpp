#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "biexp/estimate.hpp"
#include "biexp/model.hpp"

namespace biexp {

enum class Classification { equivalent, orthogonal };

[[nodiscard]] std::string_view to_string(Classification c) noexcept;

// Default slack on the equivalence conditions (relative on the variance-decay
// products, absolute on rho).
inline constexpr double kEquivalenceTolerance = 1e-9;

/// Symmetrised Kullback-Leibler divergence between the Gaussian measures of
/// two parameter vectors restricted to a grid, plus the equivalence verdict.
struct EntropyReport {
  double i_n;
  std::size_t n;
  Classification classification;
  // (|s11 t1 - s12 t2| / max, |s21 t1 - s22 t2| / max, |rho1 - rho2|): relative
  // mismatch of the two theta sigma_k^2 products and absolute rho mismatch.
  std::array<double, 3> condition_residuals;
};

enum class EntropyMethod {
  closed_form,  // O(n), tridiagonal inverse of the exponential correlation
  dense,        // full 2n x 2n log-determinants and traces; test oracle
};

[[nodiscard]] EntropyReport symmetrized_entropy(const Params& psi1, const Params& psi2,
                                                const SamplingGrid& grid,
                                                EntropyMethod method = EntropyMethod::closed_form,
                                                double tol = kEquivalenceTolerance);

// tr(R_j R_k^{-1}) for R_j = [exp(-theta_j |s_m - s_l|)], in O(n).
[[nodiscard]] double correlation_trace_ratio(double theta_j, double theta_k, const SamplingGrid& grid);

[[nodiscard]] std::array<double, 3> condition_residuals(const Params& psi1, const Params& psi2) noexcept;

// Equivalent iff theta sigma_k^2 agree for both components and rho agrees.
[[nodiscard]] Classification classify_equivalence(const Params& psi1, const Params& psi2,
                                                  double tol = kEquivalenceTolerance) noexcept;

/// Which parameters are estimated: theta alone (variances and rho known),
/// theta and rho (variances known), or everything.
enum class Scenario { theta_only, theta_rho, full };

[[nodiscard]] std::string_view to_string(Scenario s) noexcept;
[[nodiscard]] Scenario parse_scenario(std::string_view name);

// Box pinning the parameters the scenario treats as known at their true values.
[[nodiscard]] ParamBox scenario_box(Scenario s, const Params& psi0, const ParamBox& base = ParamBox::defaults());

/// Limiting covariance of sqrt(n) (estimate - truth) for the scenario's
/// coordinates (theta); (theta, rho); or (theta sigma1^2, theta sigma2^2, rho).
struct AsymCov {
  Scenario scenario;
  Eigen::MatrixXd matrix;
  std::vector<std::string> labels;
};

[[nodiscard]] AsymCov asym_cov(Scenario scenario, const Params& psi0);

/// Limiting covariance of n^{-1/2} sum_i (xi_1, xi_2, xi_3) with
/// xi_k = W_k^2 - 1 and xi_3 = Y - rho0 / sqrt(1 + rho0^2).
[[nodiscard]] Eigen::Matrix3d xi_covariance(double rho0);

struct SampleMoments {
  double mean_y;
  double var_y;
  // Standard errors of mean_y and var_y estimated from the sample.
  double se_mean_y;
  double se_var_y;
  std::array<double, 2> mean_w;
  std::array<double, 2> var_w;
  // sample mean of W_1 W_2
  double mean_w1w2;
  Eigen::Vector3d mean_xi;
  Eigen::Matrix3d cov_xi;
};

/// Standardised innovations under the true parameters: W_{k,i}, their
/// normalised cross-product Y_i = W_1 W_2 / sqrt(1 + rho0^2), and the
/// centred xi sequences. All sequences have length n - 1.
struct DiagnosticStats {
  std::vector<double> y_values;
  std::array<std::vector<double>, 2> w_values;
  std::array<std::vector<double>, 3> xi_values;
  SampleMoments sample_moments;
};

[[nodiscard]] DiagnosticStats compute_diagnostics(const BivariateSample& sample, const Params& psi0);

/// sqrt(n) (estimate - truth) divided by the asymptotic standard deviation,
/// per scenario coordinate (same order as AsymCov::labels). Throws DomainError
/// if the fit's pinned parameters do not match the scenario.
[[nodiscard]] std::vector<double> standardize(const FitResult& fit, const Params& psi0, Scenario scenario,
                                              std::size_t n);

}  // namespace biexp
