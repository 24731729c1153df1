#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "biexp/errors.hpp"
#include "biexp/montecarlo.hpp"
#include "support.hpp"

using namespace biexp;
using Catch::Approx;

namespace {

bool same_outcomes(const ReplicationBatch& a, const ReplicationBatch& b) {
  if (a.first != b.first || a.outcomes.size() != b.outcomes.size()) return false;
  for (std::size_t i = 0; i < a.outcomes.size(); ++i) {
    const auto& x = a.outcomes[i];
    const auto& y = b.outcomes[i];
    if (x.ok != y.ok || x.standardized != y.standardized || x.raw != y.raw) return false;
  }
  return true;
}

bool same_table(const QuantileTable& a, const QuantileTable& b) {
  if (a.probs != b.probs || a.rows.size() != b.rows.size()) return false;
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    const auto& x = a.rows[i];
    const auto& y = b.rows[i];
    if (x.statistic != y.statistic || x.quantiles != y.quantiles || x.variance != y.variance ||
        x.replications != y.replications || x.failures != y.failures)
      return false;
  }
  return true;
}

}  // namespace

TEST_CASE("type-1 empirical quantiles") {
  const std::vector<double> v{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  CHECK(empirical_quantile(v, 0.05) == 1);
  CHECK(empirical_quantile(v, 0.1) == 1);
  CHECK(empirical_quantile(v, 0.11) == 2);
  CHECK(empirical_quantile(v, 0.5) == 5);
  CHECK(empirical_quantile(v, 0.95) == 10);
  CHECK(empirical_quantile({3.0}, 0.25) == 3.0);
  CHECK_THROWS_AS(empirical_quantile({}, 0.5), DomainError);
}

TEST_CASE("standard normal reference row") {
  const auto q = normal_quantiles(kDefaultQuantileProbs);
  CHECK(q[0] == Approx(-1.6448).margin(1e-4));
  CHECK(q[1] == Approx(-0.6744).margin(1e-4));
  CHECK(q[2] == Approx(0.0).margin(1e-15));
  CHECK(q[3] == Approx(0.6744).margin(1e-4));
  CHECK(q[4] == Approx(1.6448).margin(1e-4));
}

TEST_CASE("experiment spec validation") {
  ExperimentSpec spec{Params(1, 1, 0, 15), 100, 10, Scenario::full, 1};
  CHECK_NOTHROW(spec.validate());
  auto bad = spec;
  bad.m = 0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = spec;
  bad.quantile_probs = {0.5, 0.25};
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = spec;
  bad.quantile_probs = {0.0, 0.5};
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = spec;
  bad.m = kMaxReplications + 1;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  CHECK(parse_grid_policy("frozen") == GridPolicy::frozen);
  CHECK_THROWS_AS(parse_grid_policy("sometimes"), DomainError);
}

TEST_CASE("results do not depend on the worker count") {
  const ExperimentSpec spec{Params(1, 1, 0.3, 15), 200, 48, Scenario::theta_rho, 99};
  const auto one = run_replications(spec, 0, spec.m, 1);
  for (unsigned w : {4u, 16u}) CHECK(same_outcomes(one, run_replications(spec, 0, spec.m, w)));
  CHECK(same_table(aggregate(spec, one), run_experiment(spec, 16)));
}

TEST_CASE("two half batches merge into the full batch") {
  const ExperimentSpec spec{Params(1, 1, 0, 15), 150, 30, Scenario::full, 7};
  const auto full = run_replications(spec, 0, 30, 2);
  auto first = run_replications(spec, 0, 15, 1);
  first.merge(run_replications(spec, 15, 30, 3));
  CHECK(same_outcomes(full, first));
  CHECK(same_table(aggregate(spec, full), aggregate(spec, first)));

  auto gap = run_replications(spec, 0, 5, 1);
  CHECK_THROWS_AS(gap.merge(run_replications(spec, 6, 8, 1)), DomainError);
}

TEST_CASE("frozen grid policy reuses one grid") {
  ExperimentSpec spec{Params(1, 1, 0, 15), 50, 4, Scenario::full, 5};
  spec.grid_policy = GridPolicy::frozen;
  const auto b = run_replications(spec, 0, 4, 1);
  // Same grid, different data.
  CHECK(b.outcomes[0].raw != b.outcomes[1].raw);
  spec.grid_policy = GridPolicy::redraw;
  CHECK(run_replications(spec, 0, 4, 1).outcomes[0].raw != b.outcomes[0].raw);
}

TEST_CASE("table rows are monotone and non-negative") {
  for (auto scenario : {Scenario::theta_only, Scenario::theta_rho, Scenario::full}) {
    const ExperimentSpec spec{Params(1, 2, 0.4, 10), 120, 40, scenario, 11};
    const auto t = run_experiment(spec, 1);
    REQUIRE(t.rows.size() == statistic_names(scenario).size());
    for (const auto& row : t.rows) {
      CHECK(std::is_sorted(row.quantiles.begin(), row.quantiles.end()));
      CHECK(row.variance >= 0.0);
      CHECK(row.replications + row.failures == 40);
    }
  }
}

TEST_CASE("a single replication collapses the quantiles") {
  const ExperimentSpec spec{Params(1, 1, 0, 15), 100, 1, Scenario::theta_rho, 3};
  const auto t = run_experiment(spec, 1);
  for (const auto& row : t.rows) {
    CHECK(row.variance == 0.0);
    for (double q : row.quantiles) CHECK(q == row.quantiles[0]);
  }
}

TEST_CASE("too many failed replications abort the experiment") {
  const ExperimentSpec spec{Params(1, 1, 0, 15), 100, 20, Scenario::theta_rho, 3};
  auto batch = run_replications(spec, 0, 20, 1);
  batch.outcomes[0].ok = false;
  CHECK_NOTHROW(aggregate(spec, batch));
  CHECK(aggregate(spec, batch).rows[0].failures == 1);
  batch.outcomes[1].ok = false;
  CHECK_THROWS_AS(aggregate(spec, batch), EstimationError);
}

TEST_CASE("quick full-scenario run is close to normal") {
  const ExperimentSpec spec{Params(0.5, 0.5, 0, 15), 200, 300, Scenario::full, 2024};
  const auto t = run_experiment(spec, 1);
  const auto z = normal_quantiles(spec.quantile_probs);
  for (const auto& row : t.rows) {
    for (std::size_t k = 0; k < z.size(); ++k) CHECK(std::abs(row.quantiles[k] - z[k]) <= 0.35);
  }
}

TEST_CASE("standardised statistics pass a normality screen at n = 1000") {
  const ExperimentSpec spec{Params(0.5, 0.5, 0, 15), 1000, 1000, Scenario::full, 31337};
  const auto batch = run_replications(spec, 0, spec.m, 1);
  for (std::size_t k = 0; k < 3; ++k) {
    std::vector<double> v;
    for (const auto& o : batch.outcomes) {
      if (o.ok) v.push_back(o.standardized[k]);
    }
    const auto ad = anderson_darling_standard_normal(v);
    INFO("coordinate " << k << " A2 = " << ad.statistic);
    CHECK(ad.p_value > 0.001);
  }
}

TEST_CASE("anderson-darling detects a shifted sample") {
  auto e = rng::make_engine(8);
  std::normal_distribution<double> nd;
  std::vector<double> good(1000), shifted(1000);
  for (std::size_t i = 0; i < 1000; ++i) {
    good[i] = nd(e);
    shifted[i] = nd(e) + 0.3;
  }
  CHECK(anderson_darling_standard_normal(good).p_value > 0.001);
  CHECK(anderson_darling_standard_normal(shifted).p_value < 0.001);
}

TEST_CASE("microergodic errors shrink with n") {
  const auto r = consistency_sweep(Params(1, 1, 0.5, 15), {100, 400, 1600}, 200, 555, 1);
  REQUIRE(r.rows.size() == 3);
  for (int k = 0; k < 3; ++k) {
    CHECK(r.rows[1].median_abs_error[k] < r.rows[0].median_abs_error[k]);
    CHECK(r.rows[2].median_abs_error[k] < r.rows[1].median_abs_error[k]);
  }
  for (std::size_t i = 1; i < 3; ++i) {
    const double ratio = r.rows[i - 1].median_abs_error[2] / r.rows[i].median_abs_error[2];
    CHECK(ratio >= 1.5);
    CHECK(ratio <= 2.7);
  }
  CHECK_THROWS_AS(consistency_sweep(Params(1, 1, 0, 15), {400, 100}, 10, 1), DomainError);
}
