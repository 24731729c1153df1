#pragma once

#include <cstdint>
#include <vector>

#include "biexp/model.hpp"

namespace biexp {

enum class SimMethod { dense, recursive };

struct SimConfig {
  Params params;
  SamplingGrid grid;
  std::uint64_t seed = 0;
  SimMethod method = SimMethod::recursive;
};

/// Z = L eps with L L' = Sigma(psi), eps ~ N(0, I_{2n}). O(n^3); n <= 4096.
[[nodiscard]] BivariateSample simulate_dense(const SimConfig& config);

/// Exact O(n) sampler from the Markov property of the exponential
/// correlation: (z_{1,1}, z_{2,1}) ~ N(0, A), then
///   z_{k,i} = exp(-theta delta_i) z_{k,i-1} + sqrt(sigma_k^2 (1 - exp(-2 theta delta_i))) eps_{k,i}
/// with innovation pairs of correlation rho.
[[nodiscard]] BivariateSample simulate_recursive(const SimConfig& config);

// Dispatches on config.method.
[[nodiscard]] BivariateSample simulate(const SimConfig& config);

/// Per-step coefficients used by simulate_recursive: decay[i-1] multiplies
/// z_{k,i-1}; innovation_sd[k][i-1] scales the standardised innovation of
/// component k+1.
struct RecursionCoefficients {
  std::vector<double> decay;
  std::vector<double> innovation_sd1;
  std::vector<double> innovation_sd2;
};

[[nodiscard]] RecursionCoefficients recursion_coefficients(const Params& psi, const SamplingGrid& grid);

}  // namespace biexp
