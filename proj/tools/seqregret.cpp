// seqregret: simulate, bounds, impossibility and validate front end.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "seqregret/experiments.hpp"
#include "seqregret/validate.hpp"

namespace {

using namespace seqregret;

// SEQREGRET_SEED wins over flags and config files so CI runs stay pinned.
void apply_seed_override(std::uint64_t& seed) {
  const char* env = std::getenv("SEQREGRET_SEED");
  if (!env || !*env) return;
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(env, &used, 10);
    if (used != std::string(env).size()) throw std::invalid_argument("trailing characters");
    seed = v;
  } catch (const std::exception&) {
    throw InvalidInput(std::string("SEQREGRET_SEED is not an unsigned integer: '") + env + "'");
  }
}

int cmd_simulate(SimulateConfig config, const std::string& output) {
  apply_seed_override(config.seed);
  const RegretSummary summary = run_simulation(config);
  std::ofstream csv(output);
  if (!csv) throw IoError("cannot write '" + output + "'");
  write_summary_csv(csv, summary);
  csv.close();
  if (!csv) throw IoError("failed closing '" + output + "'");
  const std::string meta_path = metadata_path(output);
  std::ofstream meta(meta_path);
  if (!meta) throw IoError("cannot write '" + meta_path + "'");
  write_metadata(meta, config);
  std::cout << "wrote " << output << " (" << summary.horizon() << " rows, " << summary.runs << " runs) and "
            << meta_path << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mismatched and universal sequence prediction: regret simulation and bound checks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kArtifactVersion);

  // simulate
  SimulateConfig sim;
  std::string output = "regret.csv";
  std::string predictor = "exact";
  auto* simulate = app.add_subcommand("simulate", "Average regret of the mixture learner on a memory-m chain");
  // Settings files are read by the top-level app; subcommand options live in
  // a [simulate] section, which is exactly what the metadata file contains.
  app.set_config("--config", "", "Replay a metadata file or read key=value settings");
  app.allow_config_extras(CLI::config_extras_mode::ignore);
  simulate->fallthrough();
  simulate->allow_config_extras(CLI::config_extras_mode::ignore);
  simulate->add_option("--states", sim.states, "Number of states S")->check(CLI::Range(2, 1 << 20));
  simulate->add_option("--memory", sim.memory, "Chain memory m")->check(CLI::Range(1, 64));
  simulate->add_option("--runs", sim.runs, "Independent episodes")->check(CLI::PositiveNumber);
  simulate->add_option("--horizon", sim.horizon, "Rounds T per episode")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sim.seed, "Base seed (SEQREGRET_SEED overrides)");
  simulate->add_option("--predictor", predictor, "exact (Laplace mixture) or mcmc")
      ->check(CLI::IsMember({"exact", "mcmc"}));
  simulate->add_option("--theta-file", sim.theta_file, "Ground-truth transition file")->check(CLI::ExistingFile);
  simulate->add_flag("--resample-theta", sim.resample_theta, "Draw a new ground truth for every run");
  simulate->add_option("--output", output, "CSV path; metadata goes next to it");
  simulate->add_option("--threads", sim.threads, "Worker threads")->check(CLI::PositiveNumber);
  simulate->add_option("--mcmc-chain", sim.mcmc.chain_length, "MCMC iterations per prediction");
  simulate->add_option("--mcmc-burn-in", sim.mcmc.burn_in, "MCMC burn-in iterations");
  simulate->add_option("--mcmc-thin", sim.mcmc.thinning, "Keep every k-th state");
  simulate->add_option("--mcmc-scale", sim.mcmc.proposal_scale, "Width of the uniform proposal step");
  simulate->add_option("--mcmc-seed", sim.mcmc.seed, "Seed of the MCMC chains");

  // bounds
  std::string instance;
  double phi = 0.25;
  double psi = 0.125;
  ManualBoundInputs manual;
  double vt = 0.0;
  double kl = 0.0;
  double vhat = 0.0;
  auto* bounds = app.add_subcommand("bounds", "Evaluate the regret bounds");
  bounds->add_option("--instance", instance, "Built-in instance")->check(CLI::IsMember({"impossibility"}));
  bounds->add_option("--phi", phi, "phi of the impossibility instance");
  bounds->add_option("--psi", psi, "psi of the impossibility instance");
  bounds->add_option("--horizon", manual.horizon, "Horizon T")->check(CLI::PositiveNumber);
  bounds->add_option("--delta", manual.delta, "Confidence parameter delta in (0, 1]");
  bounds->add_option("--loss-bound", manual.loss_bound, "Loss bound L");
  auto* vt_opt = bounds->add_option("--vt", vt, "Expected variational distance V_T");
  auto* kl_opt = bounds->add_option("--kl", kl, "KL(P||Q); 'inf' allowed");
  auto* vhat_opt = bounds->add_option("--vhat", vhat, "Path average hat V_T");

  // impossibility
  double c = 1.0;
  double alpha = 0.5;
  double beta = 0.25;
  std::string epsilon = "inv-sqrt";
  std::size_t episodes = 10'000;
  std::uint64_t imp_seed = 0;
  std::size_t imp_threads = 1;
  ParameterSearchLimits limits;
  auto* impossibility = app.add_subcommand("impossibility", "Choose and verify lower-bound parameters");
  impossibility->add_option("--C", c, "Constant C > 0");
  impossibility->add_option("--alpha", alpha, "Exponent alpha in [0, 1)");
  impossibility->add_option("--beta", beta, "Exponent beta in [0, 1/2)");
  impossibility->add_option("--epsilon", epsilon, "zero, inv-sqrt, inv-linear or log-over-sqrt");
  impossibility->add_option("--episodes", episodes, "Simulated episodes (0 skips simulation)");
  impossibility->add_option("--seed", imp_seed, "Base seed (SEQREGRET_SEED overrides)");
  impossibility->add_option("--threads", imp_threads, "Worker threads")->check(CLI::PositiveNumber);
  impossibility->add_option("--max-horizon", limits.max_horizon, "Cap on T_n");
  impossibility->add_option("--max-n", limits.max_n, "Cap on n");

  // validate
  std::vector<std::string> suites;
  ValidateOptions vopts;
  std::size_t trials = 0;
  double vdelta = 0.0;
  std::string json_out;
  auto* validate = app.add_subcommand("validate", "Run the self-check suites; JSON report");
  std::vector<std::string> allowed = suite_names();
  allowed.push_back("all");
  validate->add_option("--suite", suites, "Suite(s) to run (default all)")->check(CLI::IsMember(allowed));
  auto* trials_opt = validate->add_option("--trials", trials, "Override the suite's sample size");
  auto* vdelta_opt = validate->add_option("--delta", vdelta, "Single delta for the coverage suite");
  validate->add_option("--seed", vopts.seed, "Base seed (SEQREGRET_SEED overrides)");
  validate->add_option("--threads", vopts.threads, "Worker threads")->check(CLI::PositiveNumber);
  validate->add_option("--output", json_out, "Write the JSON report here instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      sim.predictor = predictor == "mcmc" ? Predictor::mcmc : Predictor::exact;
      return cmd_simulate(sim, output);
    }
    if (bounds->parsed()) {
      std::vector<BoundReport> reports;
      if (instance == "impossibility") {
        reports = impossibility_bounds(phi, psi, manual.horizon, manual.delta);
      } else {
        if (*vt_opt) manual.v_expected = vt;
        if (*kl_opt) manual.kl = kl;
        if (*vhat_opt) manual.v_hat = vhat;
        reports = manual_bounds(manual);
      }
      write_bound_reports(std::cout, reports);
      return 0;
    }
    if (impossibility->parsed()) {
      apply_seed_override(imp_seed);
      const auto witness = choose_parameters(c, alpha, beta, epsilon_by_name(epsilon), limits);
      const auto report = verify_theorem6(witness, episodes, imp_seed, imp_threads);
      write_theorem6(std::cout, witness, report);
      const bool ok = report.holds && (episodes == 0 || report.within_three_sigma);
      return ok ? 0 : 1;
    }
    if (validate->parsed()) {
      apply_seed_override(vopts.seed);
      if (*trials_opt) vopts.trials = trials;
      if (*vdelta_opt) vopts.delta = vdelta;
      if (suites.empty() || std::find(suites.begin(), suites.end(), "all") != suites.end()) suites = suite_names();
      std::vector<SuiteResult> results;
      for (const auto& name : suites) {
        results.push_back(run_suite(name, vopts));
        std::cerr << name << ": " << (results.back().passed ? "pass" : "FAIL") << '\n';
      }
      const auto report = validation_report(results);
      if (json_out.empty()) {
        std::cout << report.dump(2) << '\n';
      } else {
        std::ofstream out(json_out);
        if (!out) throw IoError("cannot write '" + json_out + "'");
        out << report.dump(2) << '\n';
      }
      return report["passed"].get<bool>() ? 0 : 1;
    }
  } catch (const CapacityError& e) {
    std::cerr << "capacity: " << e.what() << '\n';
    return 3;
  } catch (const IoError& e) {
    std::cerr << "i/o: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
