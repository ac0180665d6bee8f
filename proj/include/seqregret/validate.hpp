#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "seqregret/core.hpp"
#include "seqregret/markov.hpp"
#include "seqregret/predictors.hpp"

namespace seqregret {

// Self-checks run by `seqregret validate`. Each suite reports measured
// statistics next to the tolerance it was judged against.
struct SuiteResult {
  std::string name;
  bool passed = false;
  nlohmann::ordered_json stats;
  double seconds = 0.0;
};

struct ValidateOptions {
  // Overrides the suite's main sample size (pairs, episodes or trials).
  std::optional<std::size_t> trials;
  // Restricts the coverage suite to one confidence level.
  std::optional<double> delta;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

const std::vector<std::string>& suite_names();

// Throws InvalidInput for an unknown name.
SuiteResult run_suite(const std::string& name, const ValidateOptions& options);

nlohmann::ordered_json validation_report(const std::vector<SuiteResult>& results);

// --- instance generators shared with the tests --------------------------------

struct MarkovPair {
  MarkovParams p;
  MarkovParams q;
};

// P drawn from the flat prior; every row of Q is (1 - mix) P + mix R with R
// another flat draw, so P << Q.
MarkovPair random_markov_pair(std::size_t memory, std::size_t states, std::uint64_t seed, double mix = 0.3);

struct TabularPair {
  SequentialDistribution p;
  SequentialDistribution q;
};

// Random joint tables; P has some zero entries, Q has full support.
TabularPair random_tabular_pair(std::size_t states, std::size_t horizon, std::uint64_t seed);

// Random pmf of the given size; with `sparse` some entries are zeroed.
Pmf random_pmf(std::size_t size, Rng& rng, bool sparse = false);

// Policy given by an explicit table over all histories of length <= depth
// (lexicographic within each length).
Policy table_policy(std::size_t states, std::size_t depth, std::vector<Symbol> table);
Policy random_table_policy(std::size_t states, std::size_t depth, std::uint64_t seed);

// Midpoint-rule evaluation of the uniform-prior mixture predictive for a
// two-state chain: each context's parameter is integrated on `points` nodes.
Pmf quadrature_mixture_predictive(std::size_t memory, History history, std::size_t points = 10'000);

}  // namespace seqregret
