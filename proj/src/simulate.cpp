#include "biexp/simulate.hpp"

#include <cmath>
#include <random>

#include "biexp/likelihood.hpp"
#include "biexp/rng.hpp"

namespace biexp {

RecursionCoefficients recursion_coefficients(const Params& psi, const SamplingGrid& grid) {
  const auto deltas = grid.deltas();
  RecursionCoefficients c;
  c.decay.reserve(deltas.size());
  c.innovation_sd1.reserve(deltas.size());
  c.innovation_sd2.reserve(deltas.size());
  for (double delta : deltas) {
    const auto [decay, q] = step_decay(psi.theta(), delta);
    c.decay.push_back(decay);
    c.innovation_sd1.push_back(std::sqrt(psi.sigma1_sq() * q));
    c.innovation_sd2.push_back(std::sqrt(psi.sigma2_sq() * q));
  }
  return c;
}

BivariateSample simulate_dense(const SimConfig& config) {
  const auto n = static_cast<Eigen::Index>(config.grid.size());
  if (config.grid.size() > kMaxDenseSize) throw DomainError("simulate_dense: n exceeds 4096");
  const Eigen::LLT<Eigen::MatrixXd> llt(dense_covariance(config.params, config.grid));
  if (llt.info() != Eigen::Success) throw NumericError("simulate_dense: Cholesky factorisation failed");

  auto engine = rng::make_engine(config.seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd eps(2 * n);
  for (Eigen::Index i = 0; i < 2 * n; ++i) eps(i) = normal(engine);
  const Eigen::VectorXd z = llt.matrixL() * eps;

  std::vector<double> z1(z.data(), z.data() + n);
  std::vector<double> z2(z.data() + n, z.data() + 2 * n);
  return BivariateSample(config.grid, std::move(z1), std::move(z2));
}

BivariateSample simulate_recursive(const SimConfig& config) {
  const std::size_t n = config.grid.size();
  const Params& psi = config.params;
  const auto coeff = recursion_coefficients(psi, config.grid);
  const double rho = psi.rho();
  const double rho_c = std::sqrt(1.0 - rho * rho);

  auto engine = rng::make_engine(config.seed);
  std::normal_distribution<double> normal;
  auto correlated_pair = [&] {
    const double e1 = normal(engine);
    const double e2 = normal(engine);
    return std::pair{e1, rho * e1 + rho_c * e2};
  };

  std::vector<double> z1(n), z2(n);
  auto [e1, e2] = correlated_pair();
  z1[0] = psi.sigma1() * e1;
  z2[0] = psi.sigma2() * e2;
  for (std::size_t i = 1; i < n; ++i) {
    std::tie(e1, e2) = correlated_pair();
    z1[i] = coeff.decay[i - 1] * z1[i - 1] + coeff.innovation_sd1[i - 1] * e1;
    z2[i] = coeff.decay[i - 1] * z2[i - 1] + coeff.innovation_sd2[i - 1] * e2;
  }
  return BivariateSample(config.grid, std::move(z1), std::move(z2));
}

BivariateSample simulate(const SimConfig& config) {
  return config.method == SimMethod::dense ? simulate_dense(config) : simulate_recursive(config);
}

}  // namespace biexp
