#include "biexp/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

#include "biexp/errors.hpp"

namespace biexp::io {

namespace {

// Shortest representation that round-trips.
std::string fmt(double x) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view field, const std::string& where) {
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) field.remove_suffix(1);
  double v = 0.0;
  auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size() || !std::isfinite(v)) {
    throw DomainError(where + ": not a finite number: '" + std::string(field) + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

json pinned_json(const std::array<bool, kNumParams>& pinned) {
  json j = json::array();
  for (std::size_t k = 0; k < kNumParams; ++k) {
    if (pinned[k]) j.push_back(std::string(param_name(static_cast<Param>(k))));
  }
  return j;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

template <typename T>
T get_or(const json& entry, const json& defaults, const char* key, T fallback) {
  if (entry.contains(key)) return entry.at(key).get<T>();
  if (defaults.contains(key)) return defaults.at(key).get<T>();
  return fallback;
}

}  // namespace

void write_sample_csv(std::ostream& out, const BivariateSample& sample) {
  out << "s,z1,z2\n";
  const auto s = sample.grid().points();
  for (std::size_t i = 0; i < sample.size(); ++i) {
    out << fmt(s[i]) << ',' << fmt(sample.z1()[i]) << ',' << fmt(sample.z2()[i]) << '\n';
  }
}

BivariateSample read_sample_csv(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t lineno = 0;
  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };
  if (!next_line()) throw DomainError(source + ": empty sample file");
  if (line != "s,z1,z2") throw DomainError(source + ":1: expected header 's,z1,z2', got '" + line + "'");

  std::vector<double> s, z1, z2;
  while (next_line()) {
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(lineno);
    const auto fields = split(line, ',');
    if (fields.size() != 3) throw DomainError(where + ": expected 3 fields, got " + std::to_string(fields.size()));
    s.push_back(parse_double(fields[0], where));
    z1.push_back(parse_double(fields[1], where));
    z2.push_back(parse_double(fields[2], where));
  }
  if (s.empty()) throw DomainError(source + ": sample has no rows");
  try {
    return BivariateSample(SamplingGrid(std::move(s)), std::move(z1), std::move(z2));
  } catch (const DomainError& e) {
    throw DomainError(source + ": " + e.what());
  }
}

BivariateSample read_sample_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return read_sample_csv(in, path.string());
}

json to_json(const Params& psi) {
  return {{"sigma1_sq", psi.sigma1_sq()}, {"sigma2_sq", psi.sigma2_sq()}, {"rho", psi.rho()}, {"theta", psi.theta()}};
}

json to_json(const ParamBox& box) {
  json j = json::object();
  for (std::size_t k = 0; k < kNumParams; ++k) {
    const auto p = static_cast<Param>(k);
    j[std::string(param_name(p))] = {box[p].lo, box[p].hi};
  }
  return j;
}

json to_json(const FitResult& fit) {
  return {{"psi_hat", to_json(fit.psi_hat)},
          {"microergodic",
           {{"sigma1_sq_theta", fit.microergodic.sigma1_sq_theta},
            {"sigma2_sq_theta", fit.microergodic.sigma2_sq_theta},
            {"rho", fit.microergodic.rho}}},
          {"nll_at_min", fit.nll_at_min},
          {"nll_at_start", fit.nll_at_start},
          {"converged", fit.converged},
          {"n_evals", fit.n_evals},
          {"projected_gradient_norm", fit.projected_gradient_norm},
          {"boundary_hit", fit.boundary_hit},
          {"pinned", pinned_json(fit.pinned)},
          {"profile_clipped", fit.profile_clipped}};
}

json to_json(const EntropyReport& report) {
  return {{"i_n", report.i_n},
          {"n", report.n},
          {"classification", std::string(to_string(report.classification))},
          {"condition_residuals", report.condition_residuals}};
}

json to_json(const AsymCov& cov) {
  return {{"scenario", std::string(to_string(cov.scenario))}, {"labels", cov.labels}, {"matrix", matrix_json(cov.matrix)}};
}

json to_json(const ConsistencyReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"n", r.n},
                    {"median_abs_error",
                     {{"sigma1_sq_theta", r.median_abs_error[0]},
                      {"sigma2_sq_theta", r.median_abs_error[1]},
                      {"rho", r.median_abs_error[2]}}},
                    {"theta_hat_sd", r.theta_hat_sd},
                    {"failures", r.failures}});
  }
  return {{"psi0", to_json(report.psi0)}, {"m", report.m}, {"rows", rows}};
}

std::vector<std::string> quantile_table_header(const std::vector<double>& probs) {
  std::vector<std::string> h{"n", "theta0", "rho0", "sigma1_sq0", "sigma2_sq0", "scenario", "statistic"};
  for (double p : probs) h.push_back("q" + fmt(p));
  h.insert(h.end(), {"variance", "replications", "failures"});
  return h;
}

void write_quantile_table_csv(std::ostream& out, const QuantileTable& table) {
  const auto header = quantile_table_header(table.probs);
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& r : table.rows) {
    out << r.n << ',' << fmt(r.theta0) << ',' << fmt(r.rho0) << ',' << fmt(r.sigma1_sq0) << ',' << fmt(r.sigma2_sq0)
        << ',' << to_string(r.scenario) << ',' << r.statistic;
    for (double q : r.quantiles) out << ',' << fmt(q);
    out << ',' << fmt(r.variance) << ',' << r.replications << ',' << r.failures << '\n';
  }
}

std::vector<ExperimentSpec> parse_experiment_config(const json& config) {
  try {
    if (!config.is_object()) throw DomainError("config must be a JSON object");
    if (!config.contains("experiments") || !config.at("experiments").is_array() || config.at("experiments").empty()) {
      throw DomainError("config needs a non-empty 'experiments' array");
    }
    std::vector<ExperimentSpec> specs;
    std::size_t idx = 0;
    for (const auto& e : config.at("experiments")) {
      const std::string where = "experiments[" + std::to_string(idx++) + "]";
      for (const char* key : {"n", "sigma1_sq", "sigma2_sq", "rho"}) {
        if (!e.contains(key)) throw DomainError(where + ": missing '" + key + "'");
      }
      const bool has_theta = e.contains("theta");
      if (has_theta == e.contains("practical_range")) {
        throw DomainError(where + ": give exactly one of 'theta' or 'practical_range'");
      }
      const double s1 = e.at("sigma1_sq").get<double>();
      const double s2 = e.at("sigma2_sq").get<double>();
      const double rho = e.at("rho").get<double>();
      Params psi0 = has_theta ? Params(s1, s2, rho, e.at("theta").get<double>())
                              : Params::from_practical_range(s1, s2, rho, e.at("practical_range").get<double>());
      ExperimentSpec spec{psi0,
                          e.at("n").get<std::size_t>(),
                          get_or<std::size_t>(e, config, "m", 1000),
                          parse_scenario(get_or<std::string>(e, config, "scenario", "full")),
                          get_or<std::uint64_t>(e, config, "master_seed", 20240101),
                          parse_grid_policy(get_or<std::string>(e, config, "grid_policy", "redraw")),
                          get_or<std::vector<double>>(e, config, "quantile_probs", kDefaultQuantileProbs)};
      try {
        spec.validate();
      } catch (const DomainError& err) {
        throw DomainError(where + ": " + err.what());
      }
      specs.push_back(std::move(spec));
    }
    return specs;
  } catch (const json::exception& e) {
    throw DomainError(std::string("config: ") + e.what());
  }
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw DomainError(path.string() + ": " + e.what());
  }
}

json experiment_summary(const std::vector<ExperimentSpec>& specs, const QuantileTable& table) {
  json experiments = json::array();
  for (const auto& s : specs) {
    experiments.push_back({{"psi0", to_json(s.psi0)},
                           {"n", s.n},
                           {"m", s.m},
                           {"scenario", std::string(to_string(s.scenario))},
                           {"master_seed", s.master_seed},
                           {"grid_policy", std::string(to_string(s.grid_policy))}});
  }
  json rows = json::array();
  for (const auto& r : table.rows) {
    rows.push_back({{"n", r.n},
                    {"theta0", r.theta0},
                    {"rho0", r.rho0},
                    {"sigma1_sq0", r.sigma1_sq0},
                    {"sigma2_sq0", r.sigma2_sq0},
                    {"scenario", std::string(to_string(r.scenario))},
                    {"statistic", r.statistic},
                    {"quantiles", r.quantiles},
                    {"variance", r.variance},
                    {"replications", r.replications},
                    {"failures", r.failures}});
  }
  return {{"experiments", experiments},
          {"quantile_probs", table.probs},
          {"rows", rows},
          {"normal_quantiles", normal_quantiles(table.probs)}};
}

}  // namespace biexp::io
