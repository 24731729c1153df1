#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "biexp/asymptotics.hpp"
#include "biexp/estimate.hpp"
#include "biexp/model.hpp"

namespace biexp {

enum class GridPolicy { redraw, frozen };

[[nodiscard]] std::string_view to_string(GridPolicy p) noexcept;
[[nodiscard]] GridPolicy parse_grid_policy(std::string_view name);

inline const std::vector<double> kDefaultQuantileProbs{0.05, 0.25, 0.5, 0.75, 0.95};

// Raw values are kept for every replication; this bounds memory.
inline constexpr std::size_t kMaxReplications = 100000;

struct ExperimentSpec {
  Params psi0;
  std::size_t n;
  std::size_t m;
  Scenario scenario;
  std::uint64_t master_seed;
  GridPolicy grid_policy = GridPolicy::redraw;
  std::vector<double> quantile_probs = kDefaultQuantileProbs;
  // Parameters the scenario treats as known are pinned inside this box.
  ParamBox base_box = ParamBox::defaults();
  FitOptions fit_options = {};

  void validate() const;
};

/// One simulate -> fit -> standardise pass.
struct ReplicationOutcome {
  bool ok = false;
  std::string error;
  std::optional<FitResult> fit;
  // Per scenario statistic, standardised and raw (un-standardised) estimate.
  std::vector<double> standardized;
  std::vector<double> raw;
};

/// Outcomes for replication indices [first, first + outcomes.size()).
struct ReplicationBatch {
  std::size_t first = 0;
  std::vector<ReplicationOutcome> outcomes;

  // Appends a batch that starts where this one ends.
  void merge(ReplicationBatch other);
};

// Names of the per-replication statistics for a scenario (AsymCov labels).
[[nodiscard]] std::vector<std::string> statistic_names(Scenario s);

// Replication r uses streams derived from (master_seed, r) only, so the
// result does not depend on the worker count or the batch split.
[[nodiscard]] ReplicationOutcome run_replication(const ExperimentSpec& spec, std::size_t r);

[[nodiscard]] ReplicationBatch run_replications(const ExperimentSpec& spec, std::size_t begin, std::size_t end,
                                                unsigned workers = 1);

struct QuantileRow {
  std::size_t n;
  double theta0;
  double rho0;
  double sigma1_sq0;
  double sigma2_sq0;
  Scenario scenario;
  std::string statistic;
  // Type-1 (inverted CDF) empirical quantiles of the standardised statistic.
  std::vector<double> quantiles;
  // Sample variance (m - 1 denominator) of the raw estimator; 0 when m = 1.
  double variance;
  std::size_t replications;
  std::size_t failures;
};

struct QuantileTable {
  std::vector<double> probs;
  std::vector<QuantileRow> rows;

  void append(const QuantileTable& other);
};

// Throws EstimationError if more than 5% of replications failed.
[[nodiscard]] QuantileTable aggregate(const ExperimentSpec& spec, const ReplicationBatch& batch);

[[nodiscard]] QuantileTable run_experiment(const ExperimentSpec& spec, unsigned workers = 1);

// Inverted-CDF quantile: smallest x_(k) with k >= m p. Input must be sorted.
[[nodiscard]] double empirical_quantile(const std::vector<double>& sorted, double p);

// N(0, 1) quantiles at the given probabilities.
[[nodiscard]] std::vector<double> normal_quantiles(const std::vector<double>& probs);

struct ConsistencyRow {
  std::size_t n;
  // Median |estimate - truth| of (theta sigma1^2, theta sigma2^2, rho).
  std::array<double, 3> median_abs_error;
  // Spread of theta-hat alone; reported, not expected to shrink.
  double theta_hat_sd;
  std::size_t failures;
};

struct ConsistencyReport {
  Params psi0;
  std::size_t m;
  std::vector<ConsistencyRow> rows;
};

/// Full-scenario fits at each n; median errors of the microergodic functionals.
[[nodiscard]] ConsistencyReport consistency_sweep(const Params& psi0, const std::vector<std::size_t>& ns,
                                                  std::size_t m, std::uint64_t master_seed, unsigned workers = 1);

/// Anderson-Darling test of a sample against the fully specified N(0, 1).
struct NormalityScreen {
  double statistic;
  double p_value;
};

[[nodiscard]] NormalityScreen anderson_darling_standard_normal(std::vector<double> values);

}  // namespace biexp
