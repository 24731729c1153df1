#include "biexp/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include <boost/math/distributions/normal.hpp>

#include "biexp/rng.hpp"
#include "biexp/simulate.hpp"

namespace biexp {

namespace {

// Stream ids under a replication seed.
constexpr std::uint64_t kGridStream = 1;
constexpr std::uint64_t kFrozenGridStream = 0x6672'6f7a'656eULL;

double sample_variance(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size() - 1);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size();
  if (m == 0) return std::nan("");
  return m % 2 == 1 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
}

unsigned resolve_workers(unsigned workers) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  return workers;
}

std::vector<double> raw_statistics(Scenario s, const FitResult& fit) {
  switch (s) {
    case Scenario::theta_only: return {fit.psi_hat.theta()};
    case Scenario::theta_rho: return {fit.psi_hat.theta(), fit.psi_hat.rho()};
    case Scenario::full:
      return {fit.microergodic.sigma1_sq_theta, fit.microergodic.sigma2_sq_theta, fit.psi_hat.rho()};
  }
  return {};
}

}  // namespace

std::string_view to_string(GridPolicy p) noexcept { return p == GridPolicy::redraw ? "redraw" : "frozen"; }

GridPolicy parse_grid_policy(std::string_view name) {
  if (name == "redraw") return GridPolicy::redraw;
  if (name == "frozen") return GridPolicy::frozen;
  throw DomainError("unknown grid policy '" + std::string(name) + "' (expected redraw or frozen)");
}

void ExperimentSpec::validate() const {
  if (m < 1) throw DomainError("experiment: m must be >= 1");
  if (m > kMaxReplications) throw DomainError("experiment: m exceeds 100000");
  if (n < 2) throw DomainError("experiment: n must be >= 2");
  if (quantile_probs.empty()) throw DomainError("experiment: quantile_probs must not be empty");
  for (std::size_t i = 0; i < quantile_probs.size(); ++i) {
    const double p = quantile_probs[i];
    if (!(p > 0.0 && p < 1.0)) throw DomainError("experiment: quantile probabilities must lie in (0, 1)");
    if (i > 0 && !(p > quantile_probs[i - 1])) {
      throw DomainError("experiment: quantile probabilities must be strictly increasing");
    }
  }
  if (!scenario_box(scenario, psi0, base_box).contains(psi0)) {
    throw DomainError("experiment: true parameters lie outside the search box");
  }
}

void ReplicationBatch::merge(ReplicationBatch other) {
  if (outcomes.empty()) {
    *this = std::move(other);
    return;
  }
  if (other.first != first + outcomes.size()) {
    throw DomainError("ReplicationBatch::merge: batches are not contiguous");
  }
  outcomes.insert(outcomes.end(), std::make_move_iterator(other.outcomes.begin()),
                  std::make_move_iterator(other.outcomes.end()));
}

std::vector<std::string> statistic_names(Scenario s) {
  return asym_cov(s, Params(1.0, 1.0, 0.0, 1.0)).labels;
}

ReplicationOutcome run_replication(const ExperimentSpec& spec, std::size_t r) {
  ReplicationOutcome out;
  try {
    const std::uint64_t seed = rng::derive_seed(spec.master_seed, r);
    SamplingGrid grid = [&] {
      if (spec.grid_policy == GridPolicy::frozen) {
        auto engine = rng::make_engine(spec.master_seed, kFrozenGridStream);
        return SamplingGrid::uniform(spec.n, engine);
      }
      auto engine = rng::make_engine(seed, kGridStream);
      return SamplingGrid::uniform(spec.n, engine);
    }();
    const auto sample = simulate_recursive({spec.psi0, std::move(grid), seed, SimMethod::recursive});
    auto fit = fit_mle(sample, scenario_box(spec.scenario, spec.psi0, spec.base_box), spec.fit_options);
    out.standardized = standardize(fit, spec.psi0, spec.scenario, spec.n);
    out.raw = raw_statistics(spec.scenario, fit);
    out.ok = fit.converged;
    if (!fit.converged) out.error = "fit did not converge";
    out.fit = std::move(fit);
  } catch (const std::exception& e) {
    out.ok = false;
    out.error = e.what();
  }
  return out;
}

ReplicationBatch run_replications(const ExperimentSpec& spec, std::size_t begin, std::size_t end,
                                  unsigned workers) {
  spec.validate();
  if (end < begin) throw DomainError("run_replications: end < begin");
  ReplicationBatch batch;
  batch.first = begin;
  batch.outcomes.resize(end - begin);
  const unsigned w = std::min<unsigned>(resolve_workers(workers), static_cast<unsigned>(std::max<std::size_t>(end - begin, 1)));
  std::atomic<std::size_t> next{begin};
  auto work = [&] {
    for (std::size_t r = next++; r < end; r = next++) batch.outcomes[r - begin] = run_replication(spec, r);
  };
  if (w <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(w);
    for (unsigned i = 0; i < w; ++i) pool.emplace_back(work);
  }
  return batch;
}

double empirical_quantile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw DomainError("empirical_quantile: empty sample");
  const double m = static_cast<double>(sorted.size());
  // Guard against m p landing a rounding error above an integer.
  auto k = static_cast<std::size_t>(std::ceil(m * p - 1e-9));
  k = std::clamp<std::size_t>(k, 1, sorted.size());
  return sorted[k - 1];
}

std::vector<double> normal_quantiles(const std::vector<double>& probs) {
  const boost::math::normal_distribution<double> std_normal;
  std::vector<double> q;
  q.reserve(probs.size());
  for (double p : probs) q.push_back(boost::math::quantile(std_normal, p));
  return q;
}

void QuantileTable::append(const QuantileTable& other) {
  if (rows.empty()) probs = other.probs;
  if (probs != other.probs) throw DomainError("QuantileTable::append: quantile probabilities differ");
  rows.insert(rows.end(), other.rows.begin(), other.rows.end());
}

QuantileTable aggregate(const ExperimentSpec& spec, const ReplicationBatch& batch) {
  const auto names = statistic_names(spec.scenario);
  std::vector<std::vector<double>> standardized(names.size()), raw(names.size());
  std::size_t failures = 0;
  std::string first_error;
  for (const auto& o : batch.outcomes) {
    if (!o.ok) {
      if (failures++ == 0) first_error = o.error;
      continue;
    }
    for (std::size_t k = 0; k < names.size(); ++k) {
      standardized[k].push_back(o.standardized[k]);
      raw[k].push_back(o.raw[k]);
    }
  }
  const std::size_t total = batch.outcomes.size();
  if (total == 0 || static_cast<double>(failures) > 0.05 * static_cast<double>(total)) {
    std::ostringstream os;
    os << "experiment failed: " << failures << " of " << total << " replications failed (n=" << spec.n
       << ", theta0=" << spec.psi0.theta() << ", rho0=" << spec.psi0.rho() << ", scenario=" << to_string(spec.scenario)
       << ")";
    if (!first_error.empty()) os << "; first error: " << first_error;
    throw EstimationError(os.str());
  }

  QuantileTable table;
  table.probs = spec.quantile_probs;
  for (std::size_t k = 0; k < names.size(); ++k) {
    auto sorted = standardized[k];
    std::sort(sorted.begin(), sorted.end());
    QuantileRow row{spec.n,
                    spec.psi0.theta(),
                    spec.psi0.rho(),
                    spec.psi0.sigma1_sq(),
                    spec.psi0.sigma2_sq(),
                    spec.scenario,
                    names[k],
                    {},
                    sample_variance(raw[k]),
                    total - failures,
                    failures};
    for (double p : spec.quantile_probs) row.quantiles.push_back(empirical_quantile(sorted, p));
    table.rows.push_back(std::move(row));
  }
  return table;
}

QuantileTable run_experiment(const ExperimentSpec& spec, unsigned workers) {
  return aggregate(spec, run_replications(spec, 0, spec.m, workers));
}

ConsistencyReport consistency_sweep(const Params& psi0, const std::vector<std::size_t>& ns, std::size_t m,
                                    std::uint64_t master_seed, unsigned workers) {
  for (std::size_t i = 1; i < ns.size(); ++i) {
    if (ns[i] <= ns[i - 1]) throw DomainError("consistency_sweep: sample sizes must be increasing");
  }
  ConsistencyReport report{psi0, m, {}};
  const auto truth = microergodic(psi0);
  for (std::size_t n : ns) {
    ExperimentSpec spec{psi0, n, m, Scenario::full, rng::derive_seed(master_seed, n)};
    const auto batch = run_replications(spec, 0, m, workers);
    std::array<std::vector<double>, 3> errs;
    std::vector<double> thetas;
    std::size_t failures = 0;
    for (const auto& o : batch.outcomes) {
      if (!o.ok) {
        ++failures;
        continue;
      }
      errs[0].push_back(std::abs(o.fit->microergodic.sigma1_sq_theta - truth.sigma1_sq_theta));
      errs[1].push_back(std::abs(o.fit->microergodic.sigma2_sq_theta - truth.sigma2_sq_theta));
      errs[2].push_back(std::abs(o.fit->microergodic.rho - truth.rho));
      thetas.push_back(o.fit->psi_hat.theta());
    }
    if (static_cast<double>(failures) > 0.05 * static_cast<double>(m)) {
      throw EstimationError("consistency_sweep: more than 5% of fits failed at n=" + std::to_string(n));
    }
    report.rows.push_back({n, {median(errs[0]), median(errs[1]), median(errs[2])}, std::sqrt(sample_variance(thetas)),
                           failures});
  }
  return report;
}

NormalityScreen anderson_darling_standard_normal(std::vector<double> x) {
  if (x.empty()) throw DomainError("anderson_darling_standard_normal: empty sample");
  std::sort(x.begin(), x.end());
  const std::size_t m = x.size();
  const double md = static_cast<double>(m);
  auto log_cdf = [](double v) { return std::log(std::max(0.5 * std::erfc(-v / std::sqrt(2.0)), 1e-300)); };
  double s = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double w = 2.0 * static_cast<double>(i) + 1.0;
    s += w * (log_cdf(x[i]) + log_cdf(-x[m - 1 - i]));
  }
  const double a2 = -md - s / md;
  // Limiting null CDF of A^2 (Marsaglia & Marsaglia, 2004).
  double cdf;
  if (a2 <= 0.0) {
    cdf = 0.0;
  } else if (a2 < 2.0) {
    cdf = std::exp(-1.2337141 / a2) / std::sqrt(a2) *
          (2.00012 + (0.247105 - (0.0649821 - (0.0347962 - (0.011672 - 0.00168691 * a2) * a2) * a2) * a2) * a2);
  } else {
    cdf = std::exp(-std::exp(1.0776 - (2.30695 - (0.43424 - (0.082433 - (0.008056 - 0.0003146 * a2) * a2) * a2) * a2) * a2));
  }
  return {a2, std::clamp(1.0 - cdf, 0.0, 1.0)};
}

}  // namespace biexp
