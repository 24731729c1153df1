#include "biexp/likelihood.hpp"

#include <cmath>
#include <sstream>
#include <string>

namespace biexp {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;  // log(2 pi)

std::string echo(const Params& psi) {
  std::ostringstream os;
  os.precision(17);
  os << "(sigma1_sq=" << psi.sigma1_sq() << ", sigma2_sq=" << psi.sigma2_sq()
     << ", rho=" << psi.rho() << ", theta=" << psi.theta() << ")";
  return os.str();
}

}  // namespace

InnovationStats innovation_stats(double theta, const BivariateSample& sample,
                                 bool with_theta_derivatives) {
  const auto z1 = sample.z1();
  const auto z2 = sample.z2();
  const auto deltas = sample.grid().deltas();
  InnovationStats st;
  st.n = sample.size();
  st.s11 = z1[0] * z1[0];
  st.s22 = z2[0] * z2[0];
  st.s12 = z1[0] * z2[0];
  for (std::size_t i = 1; i < st.n; ++i) {
    const double delta = deltas[i - 1];
    const auto [decay, q] = step_decay(theta, delta);
    const double r1 = z1[i] - decay * z1[i - 1];
    const double r2 = z2[i] - decay * z2[i - 1];
    st.s11 += r1 * r1 / q;
    st.s22 += r2 * r2 / q;
    st.s12 += r1 * r2 / q;
    st.sum_log_innovation += std::log(q);
    if (with_theta_derivatives) {
      // d r_k / d theta = delta decay z_{k,i-1};  d q / d theta = 2 delta decay^2.
      const double dr1 = delta * decay * z1[i - 1];
      const double dr2 = delta * decay * z2[i - 1];
      const double dq_over_q = 2.0 * delta * decay * decay / q;
      st.ds11 += (2.0 * r1 * dr1 - r1 * r1 * dq_over_q) / q;
      st.ds22 += (2.0 * r2 * dr2 - r2 * r2 * dq_over_q) / q;
      st.ds12 += (dr1 * r2 + r1 * dr2 - r1 * r2 * dq_over_q) / q;
      st.dsum_log_innovation += dq_over_q;
    }
  }
  return st;
}

LikelihoodTerms neg_log_lik_from_stats(const InnovationStats& st, double sigma1_sq, double sigma2_sq,
                                       double rho) {
  const double n = static_cast<double>(st.n);
  const double one_minus_rho_sq = 1.0 - rho * rho;
  LikelihoodTerms t;
  t.log_det = n * (std::log(sigma1_sq) + std::log(sigma2_sq) + std::log(one_minus_rho_sq)) +
              2.0 * st.sum_log_innovation;
  t.quad_form = (st.s11 / sigma1_sq + st.s22 / sigma2_sq -
                 2.0 * rho * st.s12 / std::sqrt(sigma1_sq * sigma2_sq)) /
                one_minus_rho_sq;
  t.constant = 2.0 * n * kLog2Pi;
  t.total = t.log_det + t.quad_form + t.constant;
  return t;
}

LikelihoodTerms neg_log_lik_fast(const Params& psi, const BivariateSample& sample) {
  const auto st = innovation_stats(psi.theta(), sample);
  auto t = neg_log_lik_from_stats(st, psi.sigma1_sq(), psi.sigma2_sq(), psi.rho());
  if (!std::isfinite(t.total)) throw NumericError("neg_log_lik_fast: non-finite value at " + echo(psi));
  return t;
}

LikelihoodTerms neg_log_lik_dense(const Params& psi, const BivariateSample& sample) {
  const std::size_t n = sample.size();
  if (n > kMaxDenseSize) throw DomainError("neg_log_lik_dense: n exceeds the dense size guard (4096)");
  const Eigen::MatrixXd sigma = dense_covariance(psi, sample.grid());
  const Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) {
    throw NumericError("neg_log_lik_dense: covariance not numerically positive definite at " + echo(psi));
  }
  Eigen::VectorXd z(2 * static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    z(static_cast<Eigen::Index>(i)) = sample.z1()[i];
    z(static_cast<Eigen::Index>(n + i)) = sample.z2()[i];
  }
  const Eigen::VectorXd w = llt.matrixL().solve(z);
  LikelihoodTerms t;
  t.log_det = 2.0 * llt.matrixL().nestedExpression().diagonal().array().log().sum();
  t.quad_form = w.squaredNorm();
  t.constant = 2.0 * static_cast<double>(n) * kLog2Pi;
  t.total = t.log_det + t.quad_form + t.constant;
  return t;
}

Eigen::Vector4d neg_log_lik_gradient(const Params& psi, const BivariateSample& sample) {
  const auto st = innovation_stats(psi.theta(), sample, true);
  const double n = static_cast<double>(st.n);
  const double s1sq = psi.sigma1_sq();
  const double s2sq = psi.sigma2_sq();
  const double s1s2 = std::sqrt(s1sq * s2sq);
  const double rho = psi.rho();
  const double c = 1.0 / (1.0 - rho * rho);

  // l = n log(s1sq s2sq (1-rho^2)) + 2 sum log q + c (a - 2 rho b) + const,
  // a = s11/s1sq + s22/s2sq, b = s12/(s1 s2).
  const double a = st.s11 / s1sq + st.s22 / s2sq;
  const double b = st.s12 / s1s2;

  Eigen::Vector4d g;
  g(0) = n / s1sq + c * (-st.s11 / (s1sq * s1sq) + rho * b / s1sq);
  g(1) = n / s2sq + c * (-st.s22 / (s2sq * s2sq) + rho * b / s2sq);
  g(2) = -2.0 * n * rho * c + 2.0 * rho * c * c * (a - 2.0 * rho * b) - 2.0 * b * c;
  g(3) = 2.0 * st.dsum_log_innovation +
         c * (st.ds11 / s1sq + st.ds22 / s2sq - 2.0 * rho * st.ds12 / s1s2);
  if (!g.allFinite()) throw NumericError("neg_log_lik_gradient: non-finite value at " + echo(psi));
  return g;
}

ProfiledCrossCovariance profile_A_hat(double theta, const BivariateSample& sample) {
  if (sample.size() < 2) throw DomainError("profile_A_hat: at least two observations are required");
  if (!(theta > 0.0) || !std::isfinite(theta)) throw DomainError("profile_A_hat: theta must be > 0");
  const auto st = innovation_stats(theta, sample);
  const double n = static_cast<double>(st.n);
  ProfiledCrossCovariance out;
  out.a_hat << st.s11 / n, st.s12 / n, st.s12 / n, st.s22 / n;
  out.sigma1_sq = out.a_hat(0, 0);
  out.sigma2_sq = out.a_hat(1, 1);
  if (!(out.sigma1_sq > 0.0) || !(out.sigma2_sq > 0.0) || !out.a_hat.allFinite()) {
    throw EstimationError("profile_A_hat: degenerate data, profiled variances are not positive");
  }
  const double r = out.a_hat(0, 1) / std::sqrt(out.sigma1_sq * out.sigma2_sq);
  out.rho_boundary = std::abs(r) >= kRhoClip;
  out.rho = out.rho_boundary ? std::copysign(kRhoClip, r) : r;
  return out;
}

}  // namespace biexp
