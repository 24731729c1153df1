#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "biexp/asymptotics.hpp"
#include "biexp/estimate.hpp"
#include "biexp/model.hpp"
#include "biexp/montecarlo.hpp"

namespace biexp::io {

using nlohmann::json;

// Sample CSV: header "s,z1,z2", one row per location in grid order.
void write_sample_csv(std::ostream& out, const BivariateSample& sample);
[[nodiscard]] BivariateSample read_sample_csv(std::istream& in, const std::string& source = "<stream>");
[[nodiscard]] BivariateSample read_sample_csv(const std::filesystem::path& path);

[[nodiscard]] json to_json(const Params& psi);
[[nodiscard]] json to_json(const ParamBox& box);
[[nodiscard]] json to_json(const FitResult& fit);
[[nodiscard]] json to_json(const EntropyReport& report);
[[nodiscard]] json to_json(const AsymCov& cov);
[[nodiscard]] json to_json(const ConsistencyReport& report);

// Quantile columns are named q<p>, e.g. q0.05.
[[nodiscard]] std::vector<std::string> quantile_table_header(const std::vector<double>& probs);
void write_quantile_table_csv(std::ostream& out, const QuantileTable& table);

/// Experiment config. Top-level keys (master_seed, m, scenario, grid_policy,
/// quantile_probs) are defaults that each entry of "experiments" may override.
/// Each entry needs n, sigma1_sq, sigma2_sq, rho and one of theta or
/// practical_range.
[[nodiscard]] std::vector<ExperimentSpec> parse_experiment_config(const json& config);
[[nodiscard]] json read_json_file(const std::filesystem::path& path);

[[nodiscard]] json experiment_summary(const std::vector<ExperimentSpec>& specs, const QuantileTable& table);

}  // namespace biexp::io
