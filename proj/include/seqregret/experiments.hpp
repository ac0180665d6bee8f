#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "seqregret/impossibility.hpp"
#include "seqregret/markov.hpp"
#include "seqregret/regret.hpp"

namespace seqregret {

inline constexpr const char* kArtifactVersion = "1.0.0";

// Exact CSV header of a regret summary.
inline constexpr const char* kSummaryHeader = "t,mean,p05,p25,p50,p75,p95";

enum class Predictor { exact, mcmc };

struct SimulateConfig {
  std::size_t states = 2;
  std::size_t memory = 3;
  std::size_t runs = 4000;
  std::size_t horizon = 1000;
  std::uint64_t seed = 0;
  Predictor predictor = Predictor::exact;
  // Ground truth read from this file when set, otherwise drawn from the
  // uniform prior.
  std::string theta_file;
  // Draw a fresh ground truth per run instead of one per experiment.
  bool resample_theta = false;
  std::size_t threads = 1;
  McmcConfig mcmc;
};

// Seed of the ground-truth draw for `run` (ignored unless resampling, where
// every run gets its own).
std::uint64_t theta_seed(std::uint64_t base_seed, std::optional<std::size_t> run = std::nullopt);

// Plays `runs` episodes of a memory-m chain against the chosen mixture
// learner under classification loss.
RegretSummary run_simulation(const SimulateConfig& config);

// One row per round, 17 significant digits.
void write_summary_csv(std::ostream& out, const RegretSummary& summary);

// key=value lines that, fed back through --config, replay the run.
void write_metadata(std::ostream& out, const SimulateConfig& config);

// "out.csv" -> "out.meta".
std::string metadata_path(const std::string& csv_path);

// Fixed-width text tables for the bounds and impossibility commands.
struct ManualBoundInputs {
  double loss_bound = 1.0;
  std::size_t horizon = 1;
  double delta = 1.0;
  std::optional<double> v_expected;
  std::optional<double> kl;
  std::optional<double> v_hat;
};

std::vector<BoundReport> manual_bounds(const ManualBoundInputs& inputs);
std::vector<BoundReport> impossibility_bounds(double phi, double psi, std::size_t horizon, double delta);
void write_bound_reports(std::ostream& out, const std::vector<BoundReport>& reports);

void write_theorem6(std::ostream& out, const Theorem6Witness& witness, const Theorem6Report& report);

// Named epsilon functions accepted by the CLI: zero, inv-sqrt (1/sqrt T),
// inv-linear (1/T), log-over-sqrt (ln(e T) / sqrt T).
EpsilonFn epsilon_by_name(const std::string& name);

}  // namespace seqregret
