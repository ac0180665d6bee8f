#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "seqregret/core.hpp"
#include "seqregret/divergences.hpp"

namespace seqregret {

// Transition probabilities lambda(s | s_1..s_m) of a memory-m chain on S
// states. Rows are indexed by the context (s_1, ..., s_m) in lexicographic
// order, s_1 being the oldest symbol. Before the first observation the
// context is padded with state 0.
class MarkovParams {
 public:
  MarkovParams(std::size_t memory, std::size_t states, std::vector<double> transitions);

  static MarkovParams uniform(std::size_t memory, std::size_t states);

  std::size_t memory() const noexcept { return memory_; }
  std::size_t states() const noexcept { return states_; }
  std::size_t contexts() const noexcept { return transitions_.size() / states_; }

  double prob(std::size_t context, Symbol next) const { return transitions_[context * states_ + next]; }
  std::span<const double> row(std::size_t context) const {
    return std::span<const double>(transitions_).subspan(context * states_, states_);
  }
  Pmf row_pmf(std::size_t context) const;
  std::span<const double> transitions() const noexcept { return transitions_; }

 private:
  std::size_t memory_;
  std::size_t states_;
  std::vector<double> transitions_;
};

// S^m, throwing CapacityError above 2^24 contexts.
std::size_t context_count(std::size_t memory, std::size_t states);

// Context of the next symbol after `history`: its last m symbols, left-padded
// with state 0.
std::size_t context_index(std::size_t memory, std::size_t states, History history);

// Context after appending `next` to a path whose current context is `context`.
inline std::size_t next_context(std::size_t context, Symbol next, std::size_t states,
                                std::size_t contexts) noexcept {
  return (context * states + next) % contexts;
}

// Transition counts n(s | context) of an observed path.
class ContextCounts {
 public:
  ContextCounts(std::size_t memory, std::size_t states);

  static ContextCounts from_history(std::size_t memory, std::size_t states, History history);

  void observe(Symbol next);

  std::size_t memory() const noexcept { return memory_; }
  std::size_t states() const noexcept { return states_; }
  std::size_t contexts() const noexcept { return totals_.size(); }
  std::size_t current_context() const noexcept { return context_; }

  std::uint64_t count(std::size_t context, Symbol next) const { return counts_[context * states_ + next]; }
  std::uint64_t total(std::size_t context) const { return totals_[context]; }
  std::uint64_t observations() const noexcept { return observations_; }

 private:
  std::size_t memory_;
  std::size_t states_;
  std::size_t context_ = 0;
  std::uint64_t observations_ = 0;
  std::vector<std::uint64_t> counts_;
  std::vector<std::uint64_t> totals_;
};

Pmf markov_kernel(const MarkovParams& params, History history);

SequentialDistribution make_markov(MarkovParams params, std::size_t horizon);

// Posterior predictive of the uniform-prior mixture over all memory-m chains:
// (n(s|c) + 1) / (n(c) + S) for the current context c.
Pmf laplace_predictive(const ContextCounts& counts);
Pmf laplace_mixture_predictive(std::size_t memory, std::size_t states, History history);

// The mixture itself as a process; its cursor updates counts in O(1).
SequentialDistribution make_laplace_mixture(std::size_t memory, std::size_t states, std::size_t horizon);

struct McmcConfig {
  std::size_t chain_length = 60'000;
  std::size_t burn_in = 10'000;
  std::size_t thinning = 5;
  // Width of the symmetric uniform step applied to each free coordinate.
  double proposal_scale = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct McmcEstimate {
  Pmf predictive;
  double acceptance_rate = 0.0;
  // Mean absolute change of the current context's row per iteration.
  double mean_move = 0.0;
  std::size_t kept_samples = 0;

  // The chain accepted nearly everything yet never went anywhere.
  bool stuck() const noexcept { return acceptance_rate > 0.99 && mean_move < 1e-9; }
};

// Metropolis-Hastings estimate of the mixture predictive. Each iteration
// sweeps every context row with a symmetric uniform step on its first S-1
// coordinates; steps leaving the simplex are rejected. The target is the
// unnormalized posterior prod_c prod_s theta_c(s)^n(s|c).
McmcEstimate mcmc_mixture_predictive(std::size_t memory, std::size_t states, History history,
                                     const McmcConfig& config = {});

// Mixture process whose kernels come from mcmc_mixture_predictive. The chain
// seed for a history is derived from config.seed and the history itself, so
// kernels stay deterministic.
SequentialDistribution make_mcmc_mixture(std::size_t memory, std::size_t states, std::size_t horizon,
                                         McmcConfig config);

// Each context row drawn from the flat Dirichlet.
MarkovParams sample_theta(std::size_t memory, std::size_t states, std::uint64_t seed);

// Exact V_T, D_T and KL(P||Q) for two chains of equal memory by propagating
// the distribution of the current context forward in time.
ExpectedDivergences markov_expected_quantities(const MarkovParams& p, const MarkovParams& q,
                                               std::size_t horizon);

// Plain-text parameter file: one context per line in lexicographic order,
// S whitespace-separated probabilities. Blank lines and '#' comments are
// skipped.
MarkovParams read_theta(std::istream& in, std::size_t memory, std::size_t states);
void write_theta(std::ostream& out, const MarkovParams& params);

}  // namespace seqregret
