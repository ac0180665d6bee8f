#include "seqregret/validate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "seqregret/divergences.hpp"
#include "seqregret/experiments.hpp"
#include "seqregret/impossibility.hpp"
#include "seqregret/parallel.hpp"
#include "seqregret/regret.hpp"

namespace seqregret {

using nlohmann::ordered_json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::size_t trials_or(const ValidateOptions& o, std::size_t fallback) { return o.trials.value_or(fallback); }

double binomial_slack(double delta, std::size_t n) {
  return 3.0 * std::sqrt(delta * (1.0 - delta) / static_cast<double>(n));
}

// JSON has no infinity; report it as a string.
ordered_json number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

SuiteResult pinsker_suite(const ValidateOptions& o) {
  const std::size_t trials = trials_or(o, 100'000);
  Rng rng(derive_seed(o.seed, 1));
  std::size_t finite = 0;
  std::size_t violations = 0;
  double max_gap = -kInf;
  for (std::size_t i = 0; i < trials; ++i) {
    const std::size_t size = 2 + static_cast<std::size_t>(rng.uniform() * 5.0);
    const Pmf p = random_pmf(size, rng, i % 3 == 0);
    const Pmf q = random_pmf(size, rng, i % 7 == 0);
    const double kl = kl_divergence(p, q);
    if (std::isinf(kl)) continue;
    ++finite;
    const double gap = tv_distance(p, q) - std::sqrt(kl / 2.0);
    max_gap = std::max(max_gap, gap);
    if (gap > 0.0) ++violations;
  }
  SuiteResult r{"pinsker", violations == 0, {}, 0.0};
  r.stats = {{"pairs", trials}, {"finite_kl_pairs", finite}, {"violations", violations},
             {"max_tv_minus_sqrt_half_kl", number(max_gap)}};
  return r;
}

SuiteResult tensorization_suite(const ValidateOptions& o) {
  const std::size_t pairs = trials_or(o, 50);
  constexpr double kTol = 1e-9;
  double max_err = 0.0;
  double max_pinsker_gap = -kInf;
  for (std::size_t i = 0; i < pairs; ++i) {
    const std::size_t states = 2 + i % 2;
    const std::size_t horizon = 1 + (i / 2) % 6;
    const auto pair = random_tabular_pair(states, horizon, derive_seed(o.seed, 100 + i));
    const auto e = expected_quantities(pair.p, pair.q);
    max_err = std::max(max_err, std::abs(e.joint_kl - static_cast<double>(horizon) * e.d_expected));
    max_pinsker_gap = std::max(max_pinsker_gap, e.v_expected - std::sqrt(e.d_expected / 2.0));
  }
  SuiteResult r{"tensorization", max_err <= kTol && max_pinsker_gap <= 0.0, {}, 0.0};
  r.stats = {{"pairs", pairs}, {"max_abs_joint_kl_minus_T_D_T", max_err}, {"tolerance", kTol},
             {"max_V_T_minus_sqrt_half_D_T", max_pinsker_gap}};
  return r;
}

SuiteResult closed_forms_suite(const ValidateOptions&) {
  constexpr double phi = 0.25;
  constexpr double psi = 0.125;
  constexpr std::size_t horizon = 9;
  constexpr double kTol = 1e-9;
  const auto inst = build_instance(phi, psi, horizon);
  const auto e = expected_quantities(inst.p, inst.q);
  const double vt = closed_form_vt(phi, psi, horizon);
  const double kl = closed_form_kl(phi, psi, horizon);
  const double err_v = std::abs(e.v_expected - vt);
  const double err_kl = std::abs(e.joint_kl - kl);
  const double err_d = std::abs(e.d_expected - kl / horizon);
  SuiteResult r{"closed-forms", err_v <= kTol && err_kl <= kTol && err_d <= kTol, {}, 0.0};
  r.stats = {{"phi", phi},       {"psi", psi},         {"horizon", horizon},  {"V_T_enumerated", e.v_expected},
             {"V_T_closed", vt}, {"KL_enumerated", e.joint_kl}, {"KL_closed", kl}, {"D_T_enumerated", e.d_expected},
             {"max_abs_error", std::max({err_v, err_kl, err_d})}, {"tolerance", kTol}};
  return r;
}

SuiteResult theorem6_suite(const ValidateOptions& o) {
  const std::size_t episodes = trials_or(o, 10'000);
  const auto witness = choose_parameters(1.0, 0.5, 0.25, epsilon_by_name("inv-sqrt"));
  const auto report = verify_theorem6(witness, episodes, derive_seed(o.seed, 6), o.threads);
  const bool exact = std::abs(report.exact_probability_r1 - witness.delta) <= 1e-12 &&
                     std::abs(report.exact_probability_r2 - witness.delta) <= 1e-12;
  SuiteResult r{"theorem6", exact && report.holds && report.within_three_sigma, {}, 0.0};
  r.stats = {{"C", 1.0},
             {"alpha", 0.5},
             {"beta", 0.25},
             {"epsilon", "1/sqrt(T)"},
             {"n", witness.n},
             {"delta_n", witness.delta},
             {"T_n", witness.horizon},
             {"R1", witness.r1},
             {"R2", witness.r2},
             {"exact_probability_r1", report.exact_probability_r1},
             {"exact_probability_r2", report.exact_probability_r2},
             {"episodes", episodes},
             {"simulated_r1", report.simulated_r1},
             {"simulated_r2", report.simulated_r2},
             {"sigma", report.sigma}};
  return r;
}

SuiteResult coverage_suite(const ValidateOptions& o) {
  constexpr std::size_t kPairs = 5;
  constexpr std::size_t kStates = 3;
  constexpr std::size_t kHorizon = 50;
  const std::size_t episodes = trials_or(o, 10'000);
  const std::vector<double> deltas =
      o.delta ? std::vector<double>{*o.delta} : std::vector<double>{0.01, 0.05, 0.1, 0.25};
  const std::vector<BoundKind> kinds{BoundKind::lemma5, BoundKind::thm4_tv, BoundKind::thm4_kl,
                                     BoundKind::lemma6_tv, BoundKind::lemma6_kl};
  const LossFunction loss = LossFunction::classification(Alphabet(kStates));

  bool passed = true;
  ordered_json rows = ordered_json::array();
  for (std::size_t i = 0; i < kPairs; ++i) {
    const auto pair = random_markov_pair(1, kStates, derive_seed(o.seed, 200 + i));
    const auto p = make_markov(pair.p, kHorizon);
    const auto q = make_markov(pair.q, kHorizon);
    const auto exact = markov_expected_quantities(pair.p, pair.q, kHorizon);
    const auto traces = run_batch(p, mismatched_policy(q, loss), optimal_policy(p, loss), loss,
                                  BatchOptions{episodes, derive_seed(o.seed, 300 + i), o.threads}, &q);
    for (double delta : deltas) {
      const double limit = delta + binomial_slack(delta, episodes);
      for (BoundKind kind : kinds) {
        BoundSpec spec;
        spec.kind = kind;
        spec.loss_bound = loss.bound();
        spec.horizon = kHorizon;
        spec.delta = delta;
        spec.v_expected = exact.v_expected;
        spec.d_expected = exact.d_expected;
        spec.kl = exact.joint_kl;
        const double fraction = empirical_coverage(traces, spec);
        const bool ok = fraction <= limit;
        passed = passed && ok;
        rows.push_back({{"pair", i},
                        {"delta", delta},
                        {"bound", std::string(to_string(kind))},
                        {"violation_fraction", fraction},
                        {"allowed", limit},
                        {"ok", ok}});
      }
    }
  }
  SuiteResult r{"coverage", passed, {}, 0.0};
  r.stats = {{"pairs", kPairs}, {"states", kStates}, {"horizon", kHorizon}, {"episodes", episodes}, {"rows", rows}};
  return r;
}

SuiteResult expected_regret_suite(const ValidateOptions& o) {
  constexpr std::size_t kPairs = 5;
  constexpr std::size_t kStates = 3;
  constexpr std::size_t kHorizon = 50;
  const std::size_t episodes = trials_or(o, 10'000);
  const LossFunction loss = LossFunction::classification(Alphabet(kStates));
  bool passed = true;
  ordered_json rows = ordered_json::array();
  for (std::size_t i = 0; i < kPairs; ++i) {
    const auto pair = random_markov_pair(1, kStates, derive_seed(o.seed, 200 + i));
    const auto p = make_markov(pair.p, kHorizon);
    const auto q = make_markov(pair.q, kHorizon);
    const auto exact = markov_expected_quantities(pair.p, pair.q, kHorizon);
    const auto traces = run_batch(p, mismatched_policy(q, loss), optimal_policy(p, loss), loss,
                                  BatchOptions{episodes, derive_seed(o.seed, 300 + i), o.threads});
    double sum = 0.0;
    double sum_sq = 0.0;
    for (const auto& t : traces) {
      sum += t.average;
      sum_sq += t.average * t.average;
    }
    const double n = static_cast<double>(episodes);
    const double mean = sum / n;
    const double var = n > 1 ? std::max(0.0, (sum_sq - n * mean * mean) / (n - 1)) : 0.0;
    const double se = std::sqrt(var / n);
    const double thm2 = bound_thm2(loss.bound(), exact.v_expected);
    const double cor1 = bound_cor1(loss.bound(), kHorizon, exact.joint_kl);
    const bool ok = mean <= thm2 + 3 * se && mean <= cor1 + 3 * se;
    passed = passed && ok;
    rows.push_back({{"pair", i}, {"mean_regret", mean}, {"stderr", se}, {"thm2", thm2}, {"cor1", cor1}, {"ok", ok}});
  }
  SuiteResult r{"expected-regret", passed, {}, 0.0};
  r.stats = {{"episodes", episodes}, {"rows", rows}};
  return r;
}

Sequence random_history(Rng& rng, std::size_t states, std::size_t max_len) {
  const auto len = static_cast<std::size_t>(rng.uniform() * static_cast<double>(max_len + 1));
  Sequence h(len);
  for (auto& s : h) s = static_cast<Symbol>(rng.uniform() * static_cast<double>(states));
  return h;
}

SuiteResult mixture_suite(const ValidateOptions& o) {
  const std::size_t histories = trials_or(o, 20);
  constexpr double kTol = 1e-4;
  Rng rng(derive_seed(o.seed, 7));
  double max_err = 0.0;
  for (std::size_t i = 0; i < histories; ++i) {
    const Sequence h = random_history(rng, 2, 6);
    const Pmf exact = laplace_mixture_predictive(1, 2, h);
    const Pmf quad = quadrature_mixture_predictive(1, h);
    for (Symbol s = 0; s < 2; ++s) max_err = std::max(max_err, std::abs(exact[s] - quad[s]));
  }
  SuiteResult r{"mixture", max_err <= kTol, {}, 0.0};
  r.stats = {{"histories", histories}, {"quadrature_points", 10'000}, {"max_abs_error", max_err}, {"tolerance", kTol}};
  return r;
}

SuiteResult mcmc_suite(const ValidateOptions& o) {
  const std::size_t histories = trials_or(o, 20);
  constexpr std::size_t kSeeds = 3;
  constexpr double kTol = 0.02;
  Rng rng(derive_seed(o.seed, 8));
  struct Case {
    std::size_t memory;
    Sequence history;
  };
  std::vector<Case> cases;
  for (std::size_t i = 0; i < histories; ++i) cases.push_back({1 + i % 2, random_history(rng, 2, 8)});
  std::vector<double> tv(cases.size() * kSeeds);
  std::vector<double> acceptance(tv.size());
  parallel_for(tv.size(), o.threads, [&](std::size_t k) {
    const Case& c = cases[k / kSeeds];
    McmcConfig config;
    config.seed = derive_seed(o.seed, 1000 + k);
    const auto est = mcmc_mixture_predictive(c.memory, 2, c.history, config);
    tv[k] = tv_distance(est.predictive, laplace_mixture_predictive(c.memory, 2, c.history));
    acceptance[k] = est.acceptance_rate;
  });
  const double max_tv = *std::max_element(tv.begin(), tv.end());
  const auto [lo, hi] = std::minmax_element(acceptance.begin(), acceptance.end());
  const McmcConfig defaults;
  SuiteResult r{"mcmc", max_tv <= kTol, {}, 0.0};
  r.stats = {{"histories", histories},
             {"seeds_per_history", kSeeds},
             {"chain_length", defaults.chain_length},
             {"burn_in", defaults.burn_in},
             {"thinning", defaults.thinning},
             {"proposal_scale", defaults.proposal_scale},
             {"max_tv", max_tv},
             {"tolerance", kTol},
             {"acceptance_min", *lo},
             {"acceptance_max", *hi}};
  return r;
}

SuiteResult representation_suite(const ValidateOptions& o) {
  const std::size_t policies = trials_or(o, 100);
  constexpr std::size_t kStates = 3;
  constexpr std::size_t kDepth = 3;
  const LossFunction loss = LossFunction::classification(Alphabet(kStates));
  std::size_t recovered = 0;
  for (std::size_t i = 0; i < policies; ++i) {
    const Policy pi = random_table_policy(kStates, kDepth, derive_seed(o.seed, 400 + i));
    const auto q = q_from_policy_classification(pi, 0.5, 0.5, Alphabet(kStates), kDepth + 1);
    const Policy back = mismatched_policy(q, loss);
    bool same = true;
    std::uint64_t level = 1;
    for (std::size_t d = 0; d <= kDepth && same; ++d, level *= kStates) {
      for (std::uint64_t idx = 0; idx < level && same; ++idx) {
        const Sequence h = sequence_at(kStates, d, idx);
        same = back.decide(h) == pi.decide(h);
      }
    }
    recovered += same;
  }

  constexpr std::size_t kCrossTrials = 1000;
  Rng rng(derive_seed(o.seed, 9));
  std::size_t selected = 0;
  for (std::size_t i = 0; i < kCrossTrials; ++i) {
    const std::size_t size = 2 + static_cast<std::size_t>(rng.uniform() * 4.0);
    const Pmf p = random_pmf(size, rng);
    std::vector<Pmf> candidates;
    const std::size_t count = 1 + static_cast<std::size_t>(rng.uniform() * 20.0);
    for (std::size_t c = 0; c < count; ++c) candidates.push_back(random_pmf(size, rng));
    const auto where = static_cast<std::size_t>(rng.uniform() * static_cast<double>(count + 1));
    candidates.insert(candidates.begin() + static_cast<std::ptrdiff_t>(where), p);
    selected += cross_entropy_argmin_check(p, candidates) == where;
  }
  SuiteResult r{"representation", recovered == policies && selected == kCrossTrials, {}, 0.0};
  r.stats = {{"policies", policies},
             {"recovered", recovered},
             {"cross_entropy_trials", kCrossTrials},
             {"cross_entropy_selected", selected}};
  return r;
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"pinsker",  "tensorization", "closed-forms",  "theorem6",
                                              "coverage", "expected-regret", "mixture", "mcmc", "representation"};
  return names;
}

SuiteResult run_suite(const std::string& name, const ValidateOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  SuiteResult r;
  if (name == "pinsker") r = pinsker_suite(options);
  else if (name == "tensorization") r = tensorization_suite(options);
  else if (name == "closed-forms") r = closed_forms_suite(options);
  else if (name == "theorem6") r = theorem6_suite(options);
  else if (name == "coverage") r = coverage_suite(options);
  else if (name == "expected-regret") r = expected_regret_suite(options);
  else if (name == "mixture") r = mixture_suite(options);
  else if (name == "mcmc") r = mcmc_suite(options);
  else if (name == "representation") r = representation_suite(options);
  else throw InvalidInput("unknown suite '" + name + "'");
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

ordered_json validation_report(const std::vector<SuiteResult>& results) {
  ordered_json suites = ordered_json::array();
  bool all = true;
  for (const auto& r : results) {
    all = all && r.passed;
    suites.push_back({{"name", r.name}, {"passed", r.passed}, {"seconds", r.seconds}, {"stats", r.stats}});
  }
  return {{"artifact_version", kArtifactVersion}, {"passed", all}, {"suites", suites}};
}

MarkovPair random_markov_pair(std::size_t memory, std::size_t states, std::uint64_t seed, double mix) {
  if (!(mix > 0.0 && mix <= 1.0)) throw InvalidInput("mix must lie in (0, 1]");
  MarkovParams p = sample_theta(memory, states, derive_seed(seed, 0));
  const MarkovParams other = sample_theta(memory, states, derive_seed(seed, 1));
  std::vector<double> rows(p.transitions().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i] = (1.0 - mix) * p.transitions()[i] + mix * other.transitions()[i];
  }
  return {std::move(p), MarkovParams(memory, states, std::move(rows))};
}

Pmf random_pmf(std::size_t size, Rng& rng, bool sparse) {
  std::vector<double> w(size);
  double total = 0.0;
  for (auto& x : w) {
    x = rng.exponential();
    if (sparse && rng.uniform() < 0.3) x = 0.0;
    total += x;
  }
  if (total == 0.0) {
    w[static_cast<std::size_t>(rng.uniform() * static_cast<double>(size))] = 1.0;
    total = 1.0;
  }
  for (auto& x : w) x /= total;
  return Pmf(std::move(w));
}

TabularPair random_tabular_pair(std::size_t states, std::size_t horizon, std::uint64_t seed) {
  Alphabet alphabet(states);
  const std::uint64_t count = sequence_count(alphabet, horizon);
  Rng rng(seed);
  const Pmf p = random_pmf(count, rng, true);
  const Pmf q = random_pmf(count, rng, false);
  return {make_tabular(alphabet, horizon, {p.probs().begin(), p.probs().end()}),
          make_tabular(alphabet, horizon, {q.probs().begin(), q.probs().end()})};
}

Policy table_policy(std::size_t states, std::size_t depth, std::vector<Symbol> table) {
  std::vector<std::uint64_t> offsets(depth + 2, 0);
  std::uint64_t level = 1;
  for (std::size_t d = 0; d <= depth; ++d, level *= states) offsets[d + 1] = offsets[d] + level;
  if (table.size() != offsets[depth + 1]) throw InvalidInput("policy table has the wrong number of entries");
  for (Symbol s : table) {
    if (s >= states) throw InvalidInput("policy table entry outside the alphabet");
  }
  return Policy(
      [states, depth, offsets, table = std::move(table)](History h) {
        if (h.size() > depth) throw InvalidInput("history deeper than the policy table");
        return table[offsets[h.size()] + sequence_index(states, h)];
      },
      states, "table policy of depth " + std::to_string(depth));
}

Policy random_table_policy(std::size_t states, std::size_t depth, std::uint64_t seed) {
  std::uint64_t size = 0;
  std::uint64_t level = 1;
  for (std::size_t d = 0; d <= depth; ++d, level *= states) size += level;
  Rng rng(seed);
  std::vector<Symbol> table(size);
  for (auto& s : table) s = static_cast<Symbol>(rng.uniform() * static_cast<double>(states));
  return table_policy(states, depth, std::move(table));
}

Pmf quadrature_mixture_predictive(std::size_t memory, History history, std::size_t points) {
  if (points < 1) throw InvalidInput("quadrature needs at least one node");
  const ContextCounts counts = ContextCounts::from_history(memory, 2, history);
  const std::size_t current = counts.current_context();
  // prod over contexts of int x^n0 (1-x)^n1 dx; the factor for `current`
  // additionally carries x (symbol 0) or 1-x (symbol 1) in the numerators.
  double evidence = 1.0;
  double with0 = 1.0;
  double with1 = 1.0;
  const double h = 1.0 / static_cast<double>(points);
  for (std::size_t c = 0; c < counts.contexts(); ++c) {
    const auto n0 = static_cast<double>(counts.count(c, 0));
    const auto n1 = static_cast<double>(counts.count(c, 1));
    double base = 0.0;
    double m0 = 0.0;
    double m1 = 0.0;
    for (std::size_t k = 0; k < points; ++k) {
      const double x = (static_cast<double>(k) + 0.5) * h;
      const double w = std::pow(x, n0) * std::pow(1.0 - x, n1) * h;
      base += w;
      m0 += x * w;
      m1 += (1.0 - x) * w;
    }
    evidence *= base;
    with0 *= c == current ? m0 : base;
    with1 *= c == current ? m1 : base;
  }
  return Pmf({with0 / evidence, with1 / evidence});
}

}  // namespace seqregret
