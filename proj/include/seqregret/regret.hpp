#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "seqregret/core.hpp"
#include "seqregret/divergences.hpp"
#include "seqregret/predictors.hpp"

namespace seqregret {

// One simulated episode of the prediction game.
struct RegretTrace {
  Sequence outcomes;
  std::vector<Symbol> learner_predictions;
  std::vector<Symbol> optimal_predictions;
  std::vector<double> losses_learner;
  std::vector<double> losses_optimal;
  std::vector<double> cumulative;  // Delta_t, t = 1..T
  double average = 0.0;            // Delta = Delta_T / T
  std::optional<DivergenceTrace> divergence;
  std::uint64_t seed = 0;
};

// Plays one episode: Z ~ P drawn with `seed`, both policies see each prefix.
// When `surrogate` is given, the per-round divergences between P and it are
// recorded as well.
RegretTrace run_episode(const SequentialDistribution& p, const Policy& learner, const Policy& optimal,
                        const LossFunction& loss, std::uint64_t seed,
                        const SequentialDistribution* surrogate = nullptr);

inline constexpr std::array<double, 5> kSummaryQuantiles{0.05, 0.25, 0.5, 0.75, 0.95};

// Per-round statistics of the running average regret Delta_t / t.
struct RegretSummary {
  std::vector<double> mean;
  std::vector<std::array<double, kSummaryQuantiles.size()>> quantiles;
  std::size_t runs = 0;
  std::uint64_t base_seed = 0;

  std::size_t horizon() const noexcept { return mean.size(); }
};

// Linear-interpolation quantile of an ascending-sorted sample.
double sorted_quantile(std::span<const double> sorted, double level);

// Builds the summary from per-run curves of Delta_t / t (all equal length).
RegretSummary summarize_curves(const std::vector<std::vector<double>>& curves, std::uint64_t base_seed);

// Running average regret Delta_t / t of one trace.
std::vector<double> running_average(const RegretTrace& trace);

struct BatchOptions {
  std::size_t runs = 1;
  std::uint64_t base_seed = 0;
  std::size_t workers = 1;
};

// Seed of episode `run` in a batch.
inline std::uint64_t episode_seed(std::uint64_t base_seed, std::size_t run) noexcept {
  return derive_seed(base_seed, run);
}

// Runs `runs` episodes; results are stored and returned in run order.
std::vector<RegretTrace> run_batch(const SequentialDistribution& p, const Policy& learner, const Policy& optimal,
                                   const LossFunction& loss, const BatchOptions& options,
                                   const SequentialDistribution* surrogate = nullptr);

RegretSummary monte_carlo_summary(const SequentialDistribution& p, const Policy& learner,
                                  const Policy& optimal, const LossFunction& loss,
                                  const BatchOptions& options);

// --- bounds -----------------------------------------------------------------

// E Delta <= L V_T.
double bound_thm2(double loss_bound, double v_expected);
// E Delta <= L sqrt(KL / (2T)).
double bound_cor1(double loss_bound, std::size_t horizon, double kl);
// Delta < 2L hatV_T + (2 sqrt2 L / sqrt T) sqrt(ln(1/delta)) w.p. >= 1 - delta.
double bound_lemma5(double loss_bound, std::size_t horizon, double delta, double v_hat);
// Delta < 4L V_T / delta + (2 sqrt2 L / sqrt T) sqrt(ln(2/delta)).
double bound_thm4_tv(double loss_bound, std::size_t horizon, double delta, double v_expected);
// Delta < 2L sqrt(KL/T) / sqrt(delta) + (2 sqrt2 L / sqrt T) sqrt(ln(2/delta)).
double bound_thm4_kl(double loss_bound, std::size_t horizon, double delta, double kl);

enum class BoundKind {
  thm2,
  cor1,
  lemma5,
  thm4_tv,
  thm4_kl,
  lemma6_tv,  // event hatV_T >= V_T / delta
  lemma6_kl,  // event hatV_T >= sqrt(D_T / (2 delta))
};

std::string_view to_string(BoundKind kind);

// Inputs of a bound. Quantities not used by `kind` are ignored.
struct BoundSpec {
  BoundKind kind = BoundKind::lemma5;
  double loss_bound = 1.0;
  std::size_t horizon = 1;
  double delta = 1.0;
  double v_expected = 0.0;  // V_T
  double d_expected = 0.0;  // D_T
  double kl = 0.0;          // KL(P || Q)
  double v_hat = 0.0;       // hat V_T (lemma5 only; per-trace in coverage)
};

struct BoundReport {
  BoundSpec inputs;
  double value = 0.0;
  std::optional<double> violation_fraction;
};

// Right-hand side for the given inputs.
BoundReport evaluate_bound(const BoundSpec& spec);

// Fraction of traces violating the bound. A violation is Delta >= bound
// (strict inequalities in the guarantees). For lemma5 the bound uses each
// trace's own hatV_T; for lemma6_* the event concerns hatV_T rather than
// Delta. Traces missing divergence data are rejected for lemma5/lemma6.
double empirical_coverage(const std::vector<RegretTrace>& traces, const BoundSpec& spec);

}  // namespace seqregret
