// biexp: command-line front end (simulate, fit, entropy, asymcov, montecarlo).
//
// Exit codes: 0 success, 2 usage or invalid input, 3 numeric/estimation
// failure, 4 IO failure.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "biexp/asymptotics.hpp"
#include "biexp/errors.hpp"
#include "biexp/estimate.hpp"
#include "biexp/io.hpp"
#include "biexp/model.hpp"
#include "biexp/montecarlo.hpp"
#include "biexp/rng.hpp"
#include "biexp/simulate.hpp"

using namespace biexp;
using biexp::io::json;

namespace {

constexpr std::uint64_t kDefaultSeed = 20240101;
constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;

struct ParamFlags {
  double sigma1_sq = 1.0;
  double sigma2_sq = 1.0;
  double rho = 0.0;
  std::optional<double> theta;
  std::optional<double> practical_range;

  void add_to(CLI::App* app) {
    app->add_option("--sigma1-sq", sigma1_sq, "variance of component 1")->capture_default_str();
    app->add_option("--sigma2-sq", sigma2_sq, "variance of component 2")->capture_default_str();
    app->add_option("--rho", rho, "colocated correlation")->capture_default_str();
    auto* t = app->add_option("--theta", theta, "decay parameter");
    auto* x = app->add_option("--practical-range", practical_range, "practical range x (theta = 3/x)");
    t->excludes(x);
  }

  [[nodiscard]] Params params() const {
    if (theta) return Params(sigma1_sq, sigma2_sq, rho, *theta);
    if (practical_range) return Params::from_practical_range(sigma1_sq, sigma2_sq, rho, *practical_range);
    throw DomainError("one of --theta or --practical-range is required");
  }
};

// "s1,s2,rho,theta"
Params parse_param_list(const std::string& text, const std::string& flag) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw DomainError(flag + ": not a number: '" + item + "'");
    }
  }
  if (v.size() != kNumParams) throw DomainError(flag + ": expected sigma1_sq,sigma2_sq,rho,theta");
  return Params(v[0], v[1], v[2], v[3]);
}

SamplingGrid make_grid(const std::string& kind, std::size_t n, std::uint64_t seed) {
  if (kind == "equispaced") return SamplingGrid::equispaced(n);
  auto engine = rng::make_engine(seed, 1);
  return SamplingGrid::uniform(n, engine);
}

unsigned default_workers() {
  if (const char* env = std::getenv("BIEXP_WORKERS")) {
    try {
      const int w = std::stoi(env);
      if (w >= 1) return static_cast<unsigned>(w);
    } catch (const std::exception&) {
    }
    throw DomainError("BIEXP_WORKERS must be a positive integer");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// Whole output is produced in memory first, so a failure leaves no partial file.
void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << content;
  out.close();
  if (!out) throw IoError("failed writing '" + path + "'");
}

void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
  } else {
    write_file(path, content);
  }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation, estimation and asymptotic checks for a bivariate exponential-covariance process"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "biexp 1.0.0");

  // simulate
  auto* sim = app.add_subcommand("simulate", "simulate a sample and write it as CSV (s,z1,z2)");
  ParamFlags sim_params;
  std::size_t sim_n = 0;
  std::uint64_t sim_seed = kDefaultSeed;
  std::string sim_grid = "uniform", sim_method = "recursive", sim_out;
  sim_params.add_to(sim);
  sim->add_option("--n", sim_n, "number of locations")->required()->check(CLI::PositiveNumber);
  sim->add_option("--seed", sim_seed, "random seed")->capture_default_str();
  sim->add_option("--grid", sim_grid, "uniform or equispaced")
      ->check(CLI::IsMember({"uniform", "equispaced"}))
      ->capture_default_str();
  sim->add_option("--method", sim_method, "recursive or dense")
      ->check(CLI::IsMember({"recursive", "dense"}))
      ->capture_default_str();
  sim->add_option("--out", sim_out, "CSV output path (default stdout)");

  // fit
  auto* fit = app.add_subcommand("fit", "maximum-likelihood fit of a CSV sample; prints JSON");
  std::string fit_in;
  std::vector<std::string> fit_pins;
  std::string fit_out;
  fit->add_option("--in", fit_in, "sample CSV (s,z1,z2)")->required();
  fit->add_option("--pin", fit_pins, "fix a parameter, e.g. --pin rho=0 (repeatable)");
  fit->add_option("--out", fit_out, "JSON output path (default stdout)");

  // entropy
  auto* ent = app.add_subcommand("entropy", "symmetrised KL divergence between two parameter vectors");
  std::string ent_psi1, ent_psi2, ent_grid = "equispaced", ent_method = "closed-form";
  std::size_t ent_n = 0;
  std::uint64_t ent_seed = kDefaultSeed;
  double ent_tol = kEquivalenceTolerance;
  ent->add_option("--psi1", ent_psi1, "sigma1_sq,sigma2_sq,rho,theta")->required();
  ent->add_option("--psi2", ent_psi2, "sigma1_sq,sigma2_sq,rho,theta")->required();
  ent->add_option("--n", ent_n, "number of locations")->required()->check(CLI::Range(std::size_t{2}, std::size_t{1} << 24));
  ent->add_option("--grid", ent_grid, "equispaced or uniform")
      ->check(CLI::IsMember({"uniform", "equispaced"}))
      ->capture_default_str();
  ent->add_option("--seed", ent_seed, "seed for a uniform grid")->capture_default_str();
  ent->add_option("--method", ent_method, "closed-form or dense")
      ->check(CLI::IsMember({"closed-form", "dense"}))
      ->capture_default_str();
  ent->add_option("--tol", ent_tol, "tolerance of the equivalence conditions")->capture_default_str();

  // asymcov
  auto* acov = app.add_subcommand("asymcov", "limiting covariance of the standardised estimators");
  ParamFlags acov_params;
  std::string acov_scenario = "full";
  acov_params.add_to(acov);
  acov->add_option("--scenario", acov_scenario, "theta_only, theta_rho or full")->capture_default_str();

  // montecarlo
  auto* mc = app.add_subcommand("montecarlo", "replicated simulate/fit experiments; writes a quantile table CSV");
  std::string mc_config, mc_out, mc_summary;
  std::optional<unsigned> mc_workers;
  std::optional<std::size_t> mc_m;
  std::optional<std::uint64_t> mc_seed;
  mc->add_option("--config", mc_config, "experiment config JSON")->required();
  mc->add_option("--out", mc_out, "CSV output path (default stdout)");
  mc->add_option("--summary", mc_summary, "JSON summary output path");
  mc->add_option("--workers", mc_workers, "worker threads (default $BIEXP_WORKERS or all cores)")
      ->check(CLI::PositiveNumber);
  mc->add_option("--m", mc_m, "override the replication count")->check(CLI::PositiveNumber);
  mc->add_option("--seed", mc_seed, "override the master seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*sim) {
      const Params psi = sim_params.params();
      SimConfig cfg{psi, make_grid(sim_grid, sim_n, sim_seed), sim_seed,
                    sim_method == "dense" ? SimMethod::dense : SimMethod::recursive};
      const auto sample = simulate(cfg);
      std::ostringstream csv;
      io::write_sample_csv(csv, sample);
      const json meta = {{"command", "simulate"}, {"params", io::to_json(psi)}, {"n", sim_n},
                         {"seed", sim_seed},      {"grid", sim_grid},          {"method", sim_method},
                         {"out", sim_out.empty() ? "-" : sim_out}};
      if (sim_out.empty() || sim_out == "-") {
        std::cout << csv.str();
        std::cerr << meta.dump() << "\n";
      } else {
        write_file(sim_out, csv.str());
        std::cout << dump(meta);
      }
    } else if (*fit) {
      ParamBox box = ParamBox::defaults();
      for (const auto& pin : fit_pins) {
        const auto eq = pin.find('=');
        if (eq == std::string::npos) throw DomainError("--pin expects name=value, got '" + pin + "'");
        double value = 0.0;
        try {
          std::size_t used = 0;
          value = std::stod(pin.substr(eq + 1), &used);
          if (used != pin.size() - eq - 1) throw std::invalid_argument(pin);
        } catch (const std::exception&) {
          throw DomainError("--pin: not a number in '" + pin + "'");
        }
        box = box.pin(parse_param(pin.substr(0, eq)), value);
      }
      BivariateSample sample = [&] {
        try {
          return io::read_sample_csv(std::filesystem::path(fit_in));
        } catch (const DomainError& e) {
          throw IoError(e.what());
        }
      }();
      const auto result = fit_mle(sample, box);
      const json out = {{"command", "fit"}, {"input", fit_in}, {"n", sample.size()}, {"box", io::to_json(box)},
                        {"fit", io::to_json(result)}};
      emit(fit_out, dump(out));
    } else if (*ent) {
      const Params psi1 = parse_param_list(ent_psi1, "--psi1");
      const Params psi2 = parse_param_list(ent_psi2, "--psi2");
      const auto grid = make_grid(ent_grid, ent_n, ent_seed);
      const auto report = symmetrized_entropy(
          psi1, psi2, grid, ent_method == "dense" ? EntropyMethod::dense : EntropyMethod::closed_form, ent_tol);
      json out = {{"command", "entropy"}, {"psi1", io::to_json(psi1)}, {"psi2", io::to_json(psi2)},
                  {"grid", ent_grid},     {"method", ent_method},      {"entropy", io::to_json(report)}};
      if (ent_grid == "uniform") out["seed"] = ent_seed;
      std::cout << dump(out);
    } else if (*acov) {
      const Params psi0 = acov_params.params();
      const auto cov = asym_cov(parse_scenario(acov_scenario), psi0);
      std::cout << dump({{"command", "asymcov"}, {"params", io::to_json(psi0)}, {"asymcov", io::to_json(cov)}});
    } else if (*mc) {
      auto specs = io::parse_experiment_config(io::read_json_file(mc_config));
      for (auto& s : specs) {
        if (mc_m) s.m = *mc_m;
        if (mc_seed) s.master_seed = *mc_seed;
        s.validate();
      }
      const unsigned workers = mc_workers ? *mc_workers : default_workers();
      QuantileTable table;
      for (const auto& s : specs) table.append(run_experiment(s, workers));
      std::ostringstream csv;
      io::write_quantile_table_csv(csv, table);
      const std::string summary = mc_summary.empty() ? "" : dump(io::experiment_summary(specs, table));
      emit(mc_out, csv.str());
      if (!mc_summary.empty()) write_file(mc_summary, summary);
    }
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const DomainError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    // NumericError, EstimationError and anything unexpected from the numerics.
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return 0;
}
