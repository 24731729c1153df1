#pragma once

#include <cstddef>

#include <Eigen/Dense>

#include "biexp/model.hpp"

namespace biexp {

// Maximum n accepted by the dense (O(n^3)) paths.
inline constexpr std::size_t kMaxDenseSize = 4096;

/// l_n(psi) = -2 log f_n(psi) split into its pieces. constant = 2n log(2 pi).
struct LikelihoodTerms {
  double log_det = 0.0;
  double quad_form = 0.0;
  double constant = 0.0;
  double total = 0.0;
};

/// O(n) negative log-likelihood using the Markov factorisation of the
/// exponential correlation: the quadratic form is a sum of squared one-step
/// innovations z_{k,i} - exp(-theta delta_i) z_{k,i-1} scaled by
/// 1 - exp(-2 theta delta_i), and
///   log|Sigma| = n log[sigma1^2 sigma2^2 (1 - rho^2)] + 2 sum_i log(1 - exp(-2 theta delta_i)).
[[nodiscard]] LikelihoodTerms neg_log_lik_fast(const Params& psi, const BivariateSample& sample);

/// Reference evaluation: materialises Sigma = A (x) R and factorises the full
/// 2n x 2n matrix (no Kronecker shortcuts). n <= kMaxDenseSize.
[[nodiscard]] LikelihoodTerms neg_log_lik_dense(const Params& psi, const BivariateSample& sample);

/// Analytic gradient of l_n with respect to (sigma1^2, sigma2^2, rho, theta).
[[nodiscard]] Eigen::Vector4d neg_log_lik_gradient(const Params& psi, const BivariateSample& sample);

/// Cross-component matrix maximising the likelihood at fixed theta,
/// A_hat = [Z_k' R^{-1} Z_l] / n, and the implied (sigma1^2, sigma2^2, rho).
struct ProfiledCrossCovariance {
  Eigen::Matrix2d a_hat;
  double sigma1_sq;
  double sigma2_sq;
  // Correlation implied by a_hat, clipped into (-1 + 1e-9, 1 - 1e-9).
  double rho;
  // The unclipped correlation reached the clip limit.
  bool rho_boundary;
};

[[nodiscard]] ProfiledCrossCovariance profile_A_hat(double theta, const BivariateSample& sample);

inline constexpr double kRhoClip = 1.0 - 1e-9;

/// The quadratic forms S_kl = Z_k' R(theta)^{-1} Z_l, sum_i log(1 - exp(-2 theta delta_i))
/// and (optionally) their theta-derivatives. Everything in l_n that depends on
/// the data or on theta goes through these, so once computed the likelihood at
/// any (sigma1^2, sigma2^2, rho) is O(1).
struct InnovationStats {
  std::size_t n = 0;
  double s11 = 0.0;
  double s22 = 0.0;
  double s12 = 0.0;
  double sum_log_innovation = 0.0;
  double ds11 = 0.0;
  double ds22 = 0.0;
  double ds12 = 0.0;
  double dsum_log_innovation = 0.0;
};

[[nodiscard]] InnovationStats innovation_stats(double theta, const BivariateSample& sample,
                                               bool with_theta_derivatives = false);

// l_n at (sigma1^2, sigma2^2, rho) from precomputed statistics. No validation.
[[nodiscard]] LikelihoodTerms neg_log_lik_from_stats(const InnovationStats& stats, double sigma1_sq,
                                                     double sigma2_sq, double rho);

}  // namespace biexp
