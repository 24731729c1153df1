#include "biexp/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "biexp/likelihood.hpp"

namespace biexp {

namespace {

double relative_gap(double a, double b) noexcept {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

// tr(A2^{-1} A1) for the 2x2 cross-component matrices.
double cross_trace(const Params& p1, const Params& p2) {
  const double r2 = p2.rho();
  return (p1.sigma1_sq() / p2.sigma1_sq() + p1.sigma2_sq() / p2.sigma2_sq() -
          2.0 * p1.sigma1() * p1.sigma2() * p1.rho() * r2 / (p2.sigma1() * p2.sigma2())) /
         (1.0 - r2 * r2);
}

EntropyReport closed_form_entropy(const Params& psi1, const Params& psi2, const SamplingGrid& grid) {
  const double n = static_cast<double>(grid.size());
  const double forward = cross_trace(psi1, psi2) * correlation_trace_ratio(psi1.theta(), psi2.theta(), grid);
  const double backward = cross_trace(psi2, psi1) * correlation_trace_ratio(psi2.theta(), psi1.theta(), grid);
  return {0.5 * (forward + backward) - 2.0 * n, grid.size(), Classification::equivalent, {}};
}

EntropyReport dense_entropy(const Params& psi1, const Params& psi2, const SamplingGrid& grid) {
  if (grid.size() > kMaxDenseSize) throw DomainError("symmetrized_entropy: dense path limited to n <= 4096");
  const Eigen::MatrixXd s1 = dense_covariance(psi1, grid);
  const Eigen::MatrixXd s2 = dense_covariance(psi2, grid);
  const Eigen::LLT<Eigen::MatrixXd> l1(s1);
  const Eigen::LLT<Eigen::MatrixXd> l2(s2);
  if (l1.info() != Eigen::Success || l2.info() != Eigen::Success) {
    throw NumericError("symmetrized_entropy: covariance factorisation failed");
  }
  const Eigen::MatrixXd m1 = l1.matrixL();
  const Eigen::MatrixXd m2 = l2.matrixL();
  const double logdet1 = 2.0 * m1.diagonal().array().log().sum();
  const double logdet2 = 2.0 * m2.diagonal().array().log().sum();
  // tr(S2^{-1} S1) = || L2^{-1} L1 ||_F^2
  const double tr21 = l2.matrixL().solve(m1).squaredNorm();
  const double tr12 = l1.matrixL().solve(m2).squaredNorm();
  const double dim = static_cast<double>(s1.rows());
  const double kl12 = 0.5 * (tr21 - dim + logdet2 - logdet1);
  const double kl21 = 0.5 * (tr12 - dim + logdet1 - logdet2);
  return {kl12 + kl21, grid.size(), Classification::equivalent, {}};
}

}  // namespace

std::string_view to_string(Classification c) noexcept {
  return c == Classification::equivalent ? "equivalent" : "orthogonal";
}

std::string_view to_string(Scenario s) noexcept {
  switch (s) {
    case Scenario::theta_only: return "theta_only";
    case Scenario::theta_rho: return "theta_rho";
    case Scenario::full: return "full";
  }
  return "?";
}

Scenario parse_scenario(std::string_view name) {
  if (name == "theta_only") return Scenario::theta_only;
  if (name == "theta_rho") return Scenario::theta_rho;
  if (name == "full") return Scenario::full;
  throw DomainError("unknown scenario '" + std::string(name) + "' (expected theta_only, theta_rho or full)");
}

double correlation_trace_ratio(double theta_j, double theta_k, const SamplingGrid& grid) {
  double tr = 1.0;
  for (double delta : grid.deltas()) {
    const auto [ek, qk] = step_decay(theta_k, delta);
    const auto qj = step_decay(theta_j, delta).innovation;
    // exp(-theta_k d) - exp(-theta_j d) = -exp(-theta_k d) expm1((theta_k - theta_j) d)
    const double diff = -ek * std::expm1((theta_k - theta_j) * delta);
    tr += (diff * diff + qj) / qk;
  }
  return tr;
}

std::array<double, 3> condition_residuals(const Params& p1, const Params& p2) noexcept {
  return {relative_gap(p1.sigma1_sq() * p1.theta(), p2.sigma1_sq() * p2.theta()),
          relative_gap(p1.sigma2_sq() * p1.theta(), p2.sigma2_sq() * p2.theta()),
          std::abs(p1.rho() - p2.rho())};
}

Classification classify_equivalence(const Params& psi1, const Params& psi2, double tol) noexcept {
  const auto r = condition_residuals(psi1, psi2);
  return std::all_of(r.begin(), r.end(), [tol](double v) { return v <= tol; }) ? Classification::equivalent
                                                                              : Classification::orthogonal;
}

EntropyReport symmetrized_entropy(const Params& psi1, const Params& psi2, const SamplingGrid& grid,
                                  EntropyMethod method, double tol) {
  if (grid.size() < 2) throw DomainError("symmetrized_entropy: at least two grid points are required");
  auto report = method == EntropyMethod::dense ? dense_entropy(psi1, psi2, grid)
                                               : closed_form_entropy(psi1, psi2, grid);
  report.condition_residuals = condition_residuals(psi1, psi2);
  report.classification = classify_equivalence(psi1, psi2, tol);
  return report;
}

ParamBox scenario_box(Scenario s, const Params& psi0, const ParamBox& base) {
  switch (s) {
    case Scenario::theta_only:
      return base.pin(Param::sigma1_sq, psi0.sigma1_sq())
          .pin(Param::sigma2_sq, psi0.sigma2_sq())
          .pin(Param::rho, psi0.rho());
    case Scenario::theta_rho:
      return base.pin(Param::sigma1_sq, psi0.sigma1_sq()).pin(Param::sigma2_sq, psi0.sigma2_sq());
    case Scenario::full:
      return base;
  }
  return base;
}

AsymCov asym_cov(Scenario scenario, const Params& psi0) {
  const double t = psi0.theta();
  const double r = psi0.rho();
  const double one_minus = 1.0 - r * r;
  AsymCov out{scenario, {}, {}};
  switch (scenario) {
    case Scenario::theta_only:
      out.matrix = Eigen::MatrixXd::Constant(1, 1, t * t);
      out.labels = {"theta"};
      break;
    case Scenario::theta_rho: {
      out.matrix.resize(2, 2);
      const double off = t * r * one_minus;
      out.matrix << t * t * (1.0 + r * r), off, off, one_minus * one_minus;
      out.labels = {"theta", "rho"};
      break;
    }
    case Scenario::full: {
      const double a1 = t * psi0.sigma1_sq();
      const double a2 = t * psi0.sigma2_sq();
      const double cross = t * r * psi0.sigma1() * psi0.sigma2();
      const double c1 = a1 * r * one_minus;
      const double c2 = a2 * r * one_minus;
      out.matrix.resize(3, 3);
      out.matrix << 2.0 * a1 * a1, 2.0 * cross * cross, c1,  //
          2.0 * cross * cross, 2.0 * a2 * a2, c2,             //
          c1, c2, one_minus * one_minus;
      out.labels = {"sigma1_sq_theta", "sigma2_sq_theta", "rho"};
      break;
    }
  }
  return out;
}

Eigen::Matrix3d xi_covariance(double rho0) {
  if (!(std::abs(rho0) < 1.0)) throw DomainError("xi_covariance: |rho0| must be < 1");
  const double c = 2.0 * rho0 / std::sqrt(1.0 + rho0 * rho0);
  Eigen::Matrix3d m;
  m << 2.0, 2.0 * rho0 * rho0, c,  //
      2.0 * rho0 * rho0, 2.0, c,   //
      c, c, 1.0;
  return m;
}

DiagnosticStats compute_diagnostics(const BivariateSample& sample, const Params& psi0) {
  const std::size_t n = sample.size();
  if (n < 2) throw DomainError("compute_diagnostics: at least two observations are required");
  const auto z1 = sample.z1();
  const auto z2 = sample.z2();
  const auto deltas = sample.grid().deltas();
  const double rho0 = psi0.rho();
  const double norm_y = std::sqrt(1.0 + rho0 * rho0);
  const double mean_y0 = rho0 / norm_y;

  DiagnosticStats d;
  const std::size_t m = n - 1;
  d.y_values.resize(m);
  for (auto& w : d.w_values) w.resize(m);
  for (auto& x : d.xi_values) x.resize(m);
  for (std::size_t i = 1; i < n; ++i) {
    const auto [decay, q] = step_decay(psi0.theta(), deltas[i - 1]);
    const double w1 = (z1[i] - decay * z1[i - 1]) / std::sqrt(psi0.sigma1_sq() * q);
    const double w2 = (z2[i] - decay * z2[i - 1]) / std::sqrt(psi0.sigma2_sq() * q);
    const double y = w1 * w2 / norm_y;
    d.w_values[0][i - 1] = w1;
    d.w_values[1][i - 1] = w2;
    d.y_values[i - 1] = y;
    d.xi_values[0][i - 1] = w1 * w1 - 1.0;
    d.xi_values[1][i - 1] = w2 * w2 - 1.0;
    d.xi_values[2][i - 1] = y - mean_y0;
  }

  const double mm = static_cast<double>(m);
  auto mean = [&](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / mm;
  };
  auto& sm = d.sample_moments;
  sm.mean_y = mean(d.y_values);
  double m2 = 0.0, m4 = 0.0;
  for (double y : d.y_values) {
    const double c = y - sm.mean_y;
    m2 += c * c;
    m4 += c * c * c * c;
  }
  m2 /= mm;
  m4 /= mm;
  sm.var_y = m > 1 ? m2 * mm / (mm - 1.0) : 0.0;
  sm.se_mean_y = std::sqrt(m2 / mm);
  sm.se_var_y = std::sqrt(std::max(m4 - m2 * m2, 0.0) / mm);
  double w12 = 0.0;
  for (int k = 0; k < 2; ++k) {
    sm.mean_w[k] = mean(d.w_values[k]);
    double v = 0.0;
    for (double w : d.w_values[k]) v += (w - sm.mean_w[k]) * (w - sm.mean_w[k]);
    sm.var_w[k] = m > 1 ? v / (mm - 1.0) : 0.0;
  }
  for (std::size_t i = 0; i < m; ++i) w12 += d.w_values[0][i] * d.w_values[1][i];
  sm.mean_w1w2 = w12 / mm;
  for (int k = 0; k < 3; ++k) sm.mean_xi(k) = mean(d.xi_values[k]);
  sm.cov_xi.setZero();
  for (std::size_t i = 0; i < m; ++i) {
    Eigen::Vector3d c(d.xi_values[0][i] - sm.mean_xi(0), d.xi_values[1][i] - sm.mean_xi(1),
                      d.xi_values[2][i] - sm.mean_xi(2));
    sm.cov_xi += c * c.transpose();
  }
  if (m > 1) sm.cov_xi /= (mm - 1.0);
  return d;
}

std::vector<double> standardize(const FitResult& fit, const Params& psi0, Scenario scenario, std::size_t n) {
  const auto& pinned = fit.pinned;
  const bool vars_pinned = pinned[0] && pinned[1];
  const bool rho_pinned = pinned[2];
  const bool theta_free = !pinned[3];
  bool ok = false;
  switch (scenario) {
    case Scenario::theta_only: ok = vars_pinned && rho_pinned && theta_free; break;
    case Scenario::theta_rho: ok = vars_pinned && !rho_pinned && theta_free; break;
    case Scenario::full: ok = !pinned[0] && !pinned[1] && !rho_pinned && theta_free; break;
  }
  if (!ok) {
    throw DomainError("standardize: fit's pinned parameters do not match scenario " + std::string(to_string(scenario)));
  }
  const double root_n = std::sqrt(static_cast<double>(n));
  const double t0 = psi0.theta();
  const double r0 = psi0.rho();
  const Params& est = fit.psi_hat;
  const double rho_sd = 1.0 - r0 * r0;  // sqrt((rho0^2 - 1)^2)
  switch (scenario) {
    case Scenario::theta_only:
      return {root_n * (est.theta() - t0) / t0};
    case Scenario::theta_rho:
      return {root_n * (est.theta() - t0) / (t0 * std::sqrt(1.0 + r0 * r0)),
              root_n * (est.rho() - r0) / rho_sd};
    case Scenario::full: {
      const double a1 = psi0.sigma1_sq() * t0;
      const double a2 = psi0.sigma2_sq() * t0;
      return {root_n * (fit.microergodic.sigma1_sq_theta - a1) / (std::sqrt(2.0) * a1),
              root_n * (fit.microergodic.sigma2_sq_theta - a2) / (std::sqrt(2.0) * a2),
              root_n * (est.rho() - r0) / rho_sd};
    }
  }
  return {};
}

}  // namespace biexp
