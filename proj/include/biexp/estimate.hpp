#pragma once

#include <array>
#include <string>
#include <vector>

#include "biexp/likelihood.hpp"
#include "biexp/model.hpp"

namespace biexp {

struct FitOptions {
  // Log-spaced theta points scanned before the bracketed 1-d search.
  int theta_scan_points = 64;
  // Absolute theta tolerance for the profile search, before refinement.
  double theta_tolerance = 1e-8;
  // Stationarity test for refinement: projected-gradient inf-norm < tol * n.
  double gradient_tolerance_per_obs = 1e-6;
  int max_refine_iterations = 100;
  // Budget of O(n) likelihood/gradient evaluations.
  int max_evaluations = 20000;
};

/// The three consistently estimable functionals (theta sigma1^2, theta sigma2^2, rho).
struct Microergodic {
  double sigma1_sq_theta;
  double sigma2_sq_theta;
  double rho;
};

[[nodiscard]] Microergodic microergodic(const Params& psi) noexcept;

struct FitResult {
  Params psi_hat;
  Microergodic microergodic;
  double nll_at_min;
  // l_n at the point refinement started from (the profiled point).
  double nll_at_start;
  bool converged;
  int n_evals;
  double projected_gradient_norm;
  // Names of free parameters sitting on a bound of the box, e.g. "rho_upper".
  std::vector<std::string> boundary_hit;
  // pinned[k] is true when the box fixes parameter k (Param order).
  std::array<bool, kNumParams> pinned;
  // The profiled (sigma1^2, sigma2^2, rho) fell outside the box and was clipped.
  bool profile_clipped;
};

/// Minimises l_n over the box. Stage 1 scans the theta-profile
/// l_n(A_hat(theta), theta) and refines the best bracket with Brent's method;
/// stage 2 polishes all free coordinates with a projected Newton iteration on
/// the analytic gradient. Deterministic for fixed inputs.
[[nodiscard]] FitResult fit_mle(const BivariateSample& sample, const ParamBox& box,
                                const FitOptions& options = {});

/// Minimum of l_n over the free coordinates among (sigma1^2, sigma2^2, rho)
/// at fixed theta, restricted to the box. Exposed for testing and for the
/// profile scan; O(1) given the statistics.
struct ProfilePoint {
  double sigma1_sq;
  double sigma2_sq;
  double rho;
  double nll;
  bool clipped;
};

[[nodiscard]] ProfilePoint profile_at(const InnovationStats& stats, const ParamBox& box);

}  // namespace biexp
