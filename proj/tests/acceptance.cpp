// Acceptance suite: one PASS/FAIL line per criterion; nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "biexp/asymptotics.hpp"
#include "biexp/estimate.hpp"
#include "biexp/likelihood.hpp"
#include "biexp/montecarlo.hpp"
#include "biexp/simulate.hpp"
#include "support.hpp"

using namespace biexp;

namespace {

struct Verdict {
  bool pass;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt_list(const std::vector<double>& v) {
  std::ostringstream os;
  os.precision(4);
  os << "(";
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << ")";
  return os.str();
}

unsigned worker_count() { return std::max(1u, std::thread::hardware_concurrency()); }

Verdict oracle_equivalence() {
  const auto start = Clock::now();
  auto e = rng::make_engine(1001);
  std::uniform_int_distribution<std::size_t> size(1, 200);
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    const auto truth = testing::random_params(e);
    const auto s = testing::simulated(truth, size(e), 5000 + k);
    const auto psi = k % 2 == 0 ? truth : testing::random_params(e);
    const auto fast = neg_log_lik_fast(psi, s);
    const auto dense = neg_log_lik_dense(psi, s);
    for (auto [a, b] : {std::pair{fast.total, dense.total}, std::pair{fast.log_det, dense.log_det},
                        std::pair{fast.quad_form, dense.quad_form}}) {
      worst = std::max(worst, std::abs(a - b) / (1.0 + std::abs(b)));
    }
  }
  const double secs = seconds_since(start);
  std::ostringstream os;
  os << "200 instances, worst relative gap " << worst << ", " << secs << " s";
  return {worst <= 1e-8 && secs < 30.0, os.str()};
}

Verdict gradient_check() {
  auto e = rng::make_engine(1002);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const auto psi = testing::random_params(e);
    const auto s = testing::simulated(testing::random_params(e), 10 + 4 * k, 6000 + k);
    const auto g = neg_log_lik_gradient(psi, s);
    const auto x = psi.to_array();
    for (std::size_t j = 0; j < kNumParams; ++j) {
      const double h = 1e-6 * std::max(std::abs(x[j]), 0.1);
      auto up = x, dn = x;
      up[j] += h;
      dn[j] -= h;
      const double fd = (neg_log_lik_fast(Params::from_array(up), s).total -
                         neg_log_lik_fast(Params::from_array(dn), s).total) /
                        (2.0 * h);
      worst = std::max(worst, std::abs(g[static_cast<Eigen::Index>(j)] - fd) / std::max(1.0, std::abs(fd)));
    }
  }
  std::ostringstream os;
  os << "50 instances, worst relative gap " << worst;
  return {worst <= 1e-4, os.str()};
}

Verdict simulator_exactness() {
  // Algebraic part: propagate the recursion's covariance on (0, 0.4, 1).
  const SamplingGrid g3({0.0, 0.4, 1.0});
  double worst_alg = 0.0;
  for (const Params& psi : {Params(1, 1, 0.5, 3), Params(2, 0.5, -0.7, 15)}) {
    const auto c = recursion_coefficients(psi, g3);
    Eigen::Matrix2d corr;
    corr << 1.0, psi.rho(), psi.rho(), 1.0;
    std::vector<Eigen::Matrix2d> var{psi.cross_covariance()};
    for (int i = 1; i < 3; ++i) {
      const Eigen::Matrix2d d = Eigen::Vector2d(c.innovation_sd1[i - 1], c.innovation_sd2[i - 1]).asDiagonal();
      var.push_back(c.decay[i - 1] * c.decay[i - 1] * var.back() + d * corr * d);
    }
    Eigen::MatrixXd rec(6, 6);
    for (int i = 0; i < 3; ++i) {
      for (int j = i; j < 3; ++j) {
        double prod = 1.0;
        for (int k = i + 1; k <= j; ++k) prod *= c.decay[k - 1];
        for (int a = 0; a < 2; ++a) {
          for (int b = 0; b < 2; ++b) {
            rec(a * 3 + i, b * 3 + j) = prod * var[i](a, b);
            rec(b * 3 + j, a * 3 + i) = prod * var[i](a, b);
          }
        }
      }
    }
    const auto dense = dense_covariance(psi, g3);
    worst_alg = std::max(worst_alg, (rec - dense).cwiseAbs().maxCoeff() / dense.cwiseAbs().maxCoeff());
  }

  // Distributional part: per-coordinate two-sample KS, 1% family-wise level.
  auto e = rng::make_engine(1003, 1);
  const Params psi(1, 2, -0.4, 8);
  const auto grid = SamplingGrid::uniform(50, e);
  const std::size_t reps = 2000;
  std::vector<std::vector<double>> rec(100, std::vector<double>(reps)), den(100, std::vector<double>(reps));
  for (std::size_t r = 0; r < reps; ++r) {
    const auto a = simulate_recursive({psi, grid, 70000 + 2 * r});
    const auto b = simulate_dense({psi, grid, 70001 + 2 * r, SimMethod::dense});
    for (std::size_t i = 0; i < 50; ++i) {
      rec[i][r] = a.z1()[i];
      rec[50 + i][r] = a.z2()[i];
      den[i][r] = b.z1()[i];
      den[50 + i][r] = b.z2()[i];
    }
  }
  const double crit = testing::ks_critical(0.01 / 100.0, reps, reps);
  double worst_ks = 0.0;
  for (std::size_t c = 0; c < 100; ++c) worst_ks = std::max(worst_ks, testing::ks_statistic(rec[c], den[c]));
  std::ostringstream os;
  os << "n=3 max relative gap " << worst_alg << "; max KS " << worst_ks << " vs critical " << crit;
  return {worst_alg <= 8.0 * std::numeric_limits<double>::epsilon() && worst_ks < crit, os.str()};
}

Verdict innovation_moments() {
  const auto start = Clock::now();
  bool ok = true;
  std::ostringstream os;
  int k = 0;
  for (double rho : {0.0, 0.2, 0.5}) {
    const Params psi(1, 1, rho, 15);
    const auto s = testing::simulated(psi, 5000, 7000 + k++);
    const auto m = compute_diagnostics(s, psi).sample_moments;
    const double target = rho / std::sqrt(1 + rho * rho);
    const double zm = (m.mean_y - target) / m.se_mean_y;
    const double zv = (m.var_y - 1.0) / m.se_var_y;
    ok = ok && std::abs(zm) < 4.0 && std::abs(zv) < 4.0;
    os << "rho0=" << rho << ": z(mean)=" << zm << " z(var)=" << zv << "; ";
  }
  const double secs = seconds_since(start);
  os << secs << " s";
  return {ok && secs < 10.0, os.str()};
}

Verdict entropy_dichotomy() {
  auto e = rng::make_engine(1005);
  const auto g100 = SamplingGrid::equispaced(100);
  const auto g400 = SamplingGrid::equispaced(400);
  double worst_eq = 0.0, worst_orth = 1e300;
  for (int k = 0; k < 10; ++k) {
    const auto a = testing::random_params(e);
    const double c = testing::log_uniform(e, 0.25, 4.0);
    const Params b(c * a.sigma1_sq(), c * a.sigma2_sq(), a.rho(), a.theta() / c);
    worst_eq = std::max(worst_eq, symmetrized_entropy(a, b, g400).i_n / symmetrized_entropy(a, b, g100).i_n);
  }
  for (int k = 0; k < 10; ++k) {
    const auto a = testing::random_params(e);
    // A clear mismatch in a microergodic coordinate (rho, or a variance at fixed theta).
    const Params b = k % 2 == 0 ? Params(a.sigma1_sq(), a.sigma2_sq(), a.rho() > 0 ? a.rho() - 0.3 : a.rho() + 0.3,
                                         a.theta())
                                : Params(2.0 * a.sigma1_sq(), a.sigma2_sq(), a.rho(), a.theta());
    worst_orth = std::min(worst_orth, symmetrized_entropy(a, b, g400).i_n / symmetrized_entropy(a, b, g100).i_n);
  }
  double worst_rel = 0.0;
  std::uniform_int_distribution<std::size_t> size(2, 200);
  for (int k = 0; k < 20; ++k) {
    const auto a = testing::random_params(e);
    const auto b = testing::random_params(e);
    const auto g = SamplingGrid::uniform(size(e), e);
    const double fast = symmetrized_entropy(a, b, g).i_n;
    const double dense = symmetrized_entropy(a, b, g, EntropyMethod::dense).i_n;
    worst_rel = std::max(worst_rel, std::abs(fast - dense) / std::abs(dense));
  }
  std::ostringstream os;
  os << "equivalent max I400/I100 " << worst_eq << "; orthogonal min I400/I100 " << worst_orth
     << "; closed form vs dense worst " << worst_rel;
  return {worst_eq <= 1.25 && worst_orth >= 2.0 && worst_rel <= 1e-6, os.str()};
}

Verdict quantile_match(const ExperimentSpec& spec, std::size_t row, const std::vector<double>& target,
                       double target_var) {
  const auto start = Clock::now();
  const auto table = run_experiment(spec, worker_count());
  const auto& r = table.rows.at(row);
  double worst = 0.0;
  for (std::size_t k = 0; k < target.size(); ++k) worst = std::max(worst, std::abs(r.quantiles[k] - target[k]));
  const double var_rel = std::abs(r.variance - target_var) / target_var;
  std::ostringstream os;
  os << r.statistic << " quantiles " << fmt_list(r.quantiles) << " max gap " << worst << "; variance " << r.variance
     << " (rel " << var_rel << "); failures " << r.failures << "; " << seconds_since(start) << " s";
  return {worst <= 0.15 && var_rel <= 0.25, os.str()};
}

Verdict rho_quantiles() {
  const ExperimentSpec spec{Params::from_practical_range(1, 1, 0, 0.2), 500, 1000, Scenario::theta_rho, 20240101};
  return quantile_match(spec, 1, {-1.6416, -0.6255, 0.0022, 0.6675, 1.6499}, 0.0019);
}

Verdict variance_theta_quantiles() {
  const ExperimentSpec spec{Params::from_practical_range(0.5, 0.5, 0, 0.2), 1000, 1000, Scenario::full, 20240101};
  auto v = quantile_match(spec, 0, {-1.6085, -0.6291, 0.0338, 0.7331, 1.6527}, 0.1102);
  // Quick variant: n=200, m=300 against N(0,1) within 0.35.
  const ExperimentSpec quick{spec.psi0, 200, 300, Scenario::full, 20240101};
  const auto row = run_experiment(quick, worker_count()).rows[0];
  const auto z = normal_quantiles(quick.quantile_probs);
  double worst = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) worst = std::max(worst, std::abs(row.quantiles[k] - z[k]));
  std::ostringstream os;
  os << v.detail << "; quick n=200 m=300 max gap to N(0,1) " << worst;
  return {v.pass && worst <= 0.35, os.str()};
}

Verdict covariance_formulas() {
  auto e = rng::make_engine(1008);
  int not_psd = 0;
  for (int k = 0; k < 1000; ++k) {
    const auto psi = testing::random_params(e);
    for (auto s : {Scenario::theta_only, Scenario::theta_rho, Scenario::full}) {
      const auto m = asym_cov(s, psi).matrix;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
      if (es.eigenvalues().minCoeff() < -1e-12 * m.cwiseAbs().maxCoeff()) ++not_psd;
    }
  }
  bool exact = true;
  for (int k = 0; k < 100; ++k) {
    const auto r = testing::random_params(e);
    const Params psi(r.sigma1_sq(), r.sigma2_sq(), 0.0, r.theta());
    const double t = psi.theta();
    Eigen::Matrix3d f = Eigen::Matrix3d::Zero();
    f(0, 0) = 2.0 * (t * psi.sigma1_sq()) * (t * psi.sigma1_sq());
    f(1, 1) = 2.0 * (t * psi.sigma2_sq()) * (t * psi.sigma2_sq());
    f(2, 2) = 1.0;
    Eigen::Matrix2d tr = Eigen::Matrix2d::Zero();
    tr(0, 0) = t * t;
    tr(1, 1) = 1.0;
    exact = exact && asym_cov(Scenario::full, psi).matrix == Eigen::MatrixXd(f) &&
            asym_cov(Scenario::theta_rho, psi).matrix == Eigen::MatrixXd(tr);
  }
  std::ostringstream os;
  os << "non-PSD matrices " << not_psd << " of 3000; rho0=0 diagonal forms exact: " << (exact ? "yes" : "no");
  return {not_psd == 0 && exact, os.str()};
}

Verdict consistency() {
  const auto r = consistency_sweep(Params(1, 1, 0.5, 15), {100, 400, 1600}, 200, 20240101, worker_count());
  bool ok = true;
  std::ostringstream os;
  const char* names[] = {"theta*sigma1^2", "theta*sigma2^2", "rho"};
  for (int k = 0; k < 3; ++k) {
    os << names[k] << " " << fmt_list({r.rows[0].median_abs_error[k], r.rows[1].median_abs_error[k],
                                       r.rows[2].median_abs_error[k]})
       << "; ";
    ok = ok && r.rows[1].median_abs_error[k] < r.rows[0].median_abs_error[k] &&
         r.rows[2].median_abs_error[k] < r.rows[1].median_abs_error[k];
  }
  os << "sd(theta-hat) " << fmt_list({r.rows[0].theta_hat_sd, r.rows[1].theta_hat_sd, r.rows[2].theta_hat_sd});
  return {ok, os.str()};
}

Verdict determinism() {
  bool ok = true;
  for (auto scenario : {Scenario::theta_rho, Scenario::full}) {
    const ExperimentSpec spec{Params(1, 1, 0.3, 15), 300, 64, scenario, 4242};
    const auto base = run_replications(spec, 0, spec.m, 1);
    for (unsigned w : {4u, 16u}) {
      const auto other = run_replications(spec, 0, spec.m, w);
      for (std::size_t i = 0; i < base.outcomes.size(); ++i) {
        ok = ok && base.outcomes[i].standardized == other.outcomes[i].standardized &&
             base.outcomes[i].raw == other.outcomes[i].raw;
      }
    }
    auto half = run_replications(spec, 0, spec.m / 2, 3);
    half.merge(run_replications(spec, spec.m / 2, spec.m, 5));
    const auto a = aggregate(spec, base);
    const auto b = aggregate(spec, half);
    for (std::size_t k = 0; k < a.rows.size(); ++k) {
      ok = ok && a.rows[k].quantiles == b.rows[k].quantiles && a.rows[k].variance == b.rows[k].variance;
    }
  }
  return {ok, "workers 1/4/16 and split batches, theta_rho and full scenarios"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"fast vs dense likelihood", oracle_equivalence},
      {"analytic gradient vs finite differences", gradient_check},
      {"recursive simulator exactness", simulator_exactness},
      {"cross-product statistic moments", innovation_moments},
      {"entropy bounded vs divergent", entropy_dichotomy},
      {"standardised rho-hat quantiles, psi0=(1,1,0,15), n=500", rho_quantiles},
      {"standardised sigma1^2*theta quantiles, psi0=(0.5,0.5,0,15), n=1000", variance_theta_quantiles},
      {"limiting covariance formulas", covariance_formulas},
      {"microergodic consistency sweep", consistency},
      {"determinism across worker counts", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    if (!v.pass) ++failed;
    std::printf("criterion %2zu %s: %s | %s\n", i + 1, v.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
