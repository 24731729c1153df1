#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "biexp/model.hpp"
#include "biexp/rng.hpp"
#include "biexp/simulate.hpp"

namespace biexp::testing {

inline double log_uniform(rng::Engine& e, double lo, double hi) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(e));
}

// Parameters spread over a range where the dense oracle stays well conditioned.
inline Params random_params(rng::Engine& e) {
  std::uniform_real_distribution<double> rho(-0.9, 0.9);
  return Params(log_uniform(e, 0.1, 10.0), log_uniform(e, 0.1, 10.0), rho(e), log_uniform(e, 0.5, 50.0));
}

// Uniformly random point of a box (log-uniform in the positive coordinates).
inline Params random_point(rng::Engine& e, const ParamBox& box) {
  auto draw = [&](Param p, bool log_scale) {
    const auto& iv = box[p];
    if (iv.pinned()) return iv.lo;
    if (log_scale) return log_uniform(e, iv.lo, iv.hi);
    return std::uniform_real_distribution<double>(iv.lo, iv.hi)(e);
  };
  return Params(draw(Param::sigma1_sq, true), draw(Param::sigma2_sq, true), draw(Param::rho, false),
                draw(Param::theta, true));
}

inline BivariateSample simulated(const Params& psi, std::size_t n, std::uint64_t seed) {
  auto engine = rng::make_engine(seed, 1);
  return simulate_recursive({psi, SamplingGrid::uniform(n, engine), seed, SimMethod::recursive});
}

// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

// Asymptotic critical value of the two-sample statistic at level alpha.
inline double ks_critical(double alpha, std::size_t na, std::size_t nb) {
  const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
  return c * std::sqrt(static_cast<double>(na + nb) / (static_cast<double>(na) * static_cast<double>(nb)));
}

}  // namespace biexp::testing
