#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "seqregret/impossibility.hpp"
#include "seqregret/markov.hpp"
#include "seqregret/regret.hpp"
#include "seqregret/validate.hpp"

using namespace seqregret;

namespace {

const double kInf = std::numeric_limits<double>::infinity();
const double kSecondTerm100 = 2.0 * std::sqrt(2.0) / 10.0;  // 2 sqrt2 L / sqrt T at L=1, T=100

struct ImpossibilityGame {
  ImpossibilityInstance inst;
  LossFunction loss = LossFunction::classification(Alphabet(3));
  Policy learner;
  Policy optimal;

  ImpossibilityGame(double phi, double psi, std::size_t horizon)
      : inst(build_instance(phi, psi, horizon)),
        learner(mismatched_policy(inst.q, loss)),
        optimal(optimal_policy(inst.p, loss)) {}
};

}  // namespace

TEST_CASE("run_episode with Q = P has zero regret") {
  const auto cls = LossFunction::classification(Alphabet(3));
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto pair = random_markov_pair(1, 3, seed);
    const auto p = make_markov(pair.p, 40);
    const Policy a = optimal_policy(p, cls);
    const Policy b = mismatched_policy(p, cls);
    for (std::uint64_t s = 0; s < 25; ++s) {
      const auto tr = run_episode(p, b, a, cls, s, &p);
      CHECK(tr.average == 0.0);
      CHECK(tr.divergence->avg_tv == 0.0);
    }
  }
}

TEST_CASE("impossibility episodes match the closed form") {
  const ImpossibilityGame g(0.25, 0.125, 9);
  std::size_t high = 0;
  constexpr std::size_t n = 10'000;
  for (std::uint64_t seed = 0; seed < n; ++seed) {
    const auto tr = run_episode(g.inst.p, g.learner, g.optimal, g.loss, seed);
    CHECK(tr.average == regret_closed_form(tr.outcomes[0], 9));
    if (tr.outcomes[0] == 0) {
      CHECK(tr.average == doctest::Approx(8.0 / 9.0));
      ++high;
    } else {
      CHECK(tr.average == 0.0);
    }
  }
  CHECK(oracle::within_three_sigma(static_cast<double>(high) / n, 0.25, n));
}

TEST_CASE("trace invariants") {
  const auto pair = random_markov_pair(2, 3, 5);
  const auto p = make_markov(pair.p, 60);
  const auto q = make_markov(pair.q, 60);
  const auto table = LossFunction::table({{0.0, 2.0, 1.0}, {1.5, 0.0, 2.0}, {2.0, 0.5, 0.0}}, 2.0);
  const Policy learner = mismatched_policy(q, table);
  const Policy optimal = optimal_policy(p, table);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto tr = run_episode(p, learner, optimal, table, seed, &q);
    double running = 0.0;
    for (std::size_t t = 0; t < 60; ++t) {
      const double inc = tr.losses_learner[t] - tr.losses_optimal[t];
      CHECK(inc >= -2.0);
      CHECK(inc <= 2.0);
      CHECK(tr.losses_learner[t] == table(tr.learner_predictions[t], tr.outcomes[t]));
      running += inc;
      CHECK(tr.cumulative[t] == doctest::Approx(running));
    }
    CHECK(tr.average == doctest::Approx(tr.cumulative.back() / 60.0));
    CHECK(std::abs(tr.average) <= 2.0);
    CHECK(tr.seed == seed);
    REQUIRE(tr.divergence.has_value());
    CHECK(tr.divergence->tv.size() == 60);
  }
}

TEST_CASE("summaries") {
  SUBCASE("constant curves") {
    const std::vector<std::vector<double>> curves(7, std::vector<double>{0.3, 0.3, 0.3});
    const auto s = summarize_curves(curves, 1);
    for (std::size_t t = 0; t < 3; ++t) {
      CHECK(s.mean[t] == doctest::Approx(0.3));
      for (double q : s.quantiles[t]) CHECK(q == doctest::Approx(0.3));
    }
    CHECK(s.runs == 7);
  }
  SUBCASE("a single run") {
    const auto s = summarize_curves({{0.1, -0.2, 0.5}}, 0);
    for (std::size_t t = 0; t < 3; ++t) {
      for (double q : s.quantiles[t]) CHECK(q == s.mean[t]);
    }
  }
  SUBCASE("sorted_quantile interpolates") {
    const std::vector<double> v{1.0, 2.0, 3.0, 4.0, 5.0};
    CHECK(sorted_quantile(v, 0.0) == 1.0);
    CHECK(sorted_quantile(v, 0.5) == 3.0);
    CHECK(sorted_quantile(v, 0.1) == doctest::Approx(1.4));
    CHECK(sorted_quantile(v, 1.0) == 5.0);
  }
  SUBCASE("quantiles are monotone in level") {
    const ImpossibilityGame g(0.25, 0.125, 12);
    const auto s = monte_carlo_summary(g.inst.p, g.learner, g.optimal, g.loss, {500, 9, 1});
    CHECK(s.runs == 500);
    CHECK(s.horizon() == 12);
    for (const auto& q : s.quantiles) CHECK(std::is_sorted(q.begin(), q.end()));
  }
  SUBCASE("empty batches are rejected") {
    const ImpossibilityGame g(0.25, 0.125, 4);
    CHECK_THROWS_AS(monte_carlo_summary(g.inst.p, g.learner, g.optimal, g.loss, {0, 0, 1}), InvalidInput);
  }
}

TEST_CASE("fraction of high-regret runs over 10^5 episodes") {
  const ImpossibilityGame g(0.25, 0.125, 9);
  const auto s = monte_carlo_summary(g.inst.p, g.learner, g.optimal, g.loss, {100'000, 2, 1});
  // Delta_T / T is either 8/9 or 0, so the final mean is 8/9 times the fraction.
  const double fraction = s.mean.back() / (8.0 / 9.0);
  CHECK(std::abs(fraction - 0.25) <= 0.01);
}

TEST_CASE("batches are independent of the worker count") {
  const auto pair = random_markov_pair(1, 2, 3);
  const auto p = make_markov(pair.p, 30);
  const auto q = make_markov(pair.q, 30);
  const auto cls = LossFunction::classification(Alphabet(2));
  const Policy l = mismatched_policy(q, cls);
  const Policy o = optimal_policy(p, cls);
  const auto one = monte_carlo_summary(p, l, o, cls, {300, 77, 1});
  const auto four = monte_carlo_summary(p, l, o, cls, {300, 77, 4});
  CHECK(one.mean == four.mean);
  for (std::size_t t = 0; t < 30; ++t) CHECK(one.quantiles[t] == four.quantiles[t]);
  const auto traces = run_batch(p, l, o, cls, {5, 77, 2});
  for (std::size_t r = 0; r < 5; ++r) CHECK(traces[r].seed == episode_seed(77, r));
}

TEST_CASE("bound_thm2") {
  CHECK(bound_thm2(2.0, 0.3) == doctest::Approx(0.6));
  CHECK(bound_thm2(1.0, 0.0) == 0.0);
  CHECK(bound_thm2(1.0, closed_form_vt(0.25, 0.125, 9)) == doctest::Approx(0.194444).epsilon(1e-5));
}

TEST_CASE("bound_cor1") {
  CHECK(bound_cor1(1.0, 100, 2.0) == doctest::Approx(0.1));
  CHECK(bound_cor1(1.0, 100, 0.0) == 0.0);
  CHECK(bound_cor1(1.0, 100, kInf) == kInf);
}

TEST_CASE("bound_lemma5") {
  const double value = bound_lemma5(1.0, 100, 0.1, 0.05);
  // The quoted six-digit value, and the exact expression.
  CHECK(std::abs(value - 0.529200) <= 1e-5);
  CHECK(std::abs(value - (0.1 + kSecondTerm100 * std::sqrt(std::log(10.0)))) <= 1e-12);
  CHECK(bound_lemma5(3.0, 57, 1.0, 0.2) == 2.0 * 3.0 * 0.2);
  const double t = bound_lemma5(1.0, 100, 0.3, 0.0);
  CHECK(bound_lemma5(1.0, 400, 0.3, 0.0) == doctest::Approx(t / 2.0).epsilon(1e-14));
  CHECK_THROWS_AS(bound_lemma5(1.0, 100, 0.0, 0.1), InvalidInput);
  CHECK_THROWS_AS(bound_lemma5(1.0, 100, 1.5, 0.1), InvalidInput);
}

TEST_CASE("bound_thm4") {
  const double kl = bound_thm4_kl(1.0, 100, 0.25, 1.0);
  CHECK(std::abs(kl - 0.807870) <= 1e-5);
  CHECK(std::abs(kl - (0.4 + kSecondTerm100 * std::sqrt(std::log(8.0)))) <= 1e-12);

  const double tv = bound_thm4_tv(1.0, 100, 0.27, 0.0);
  CHECK(std::abs(tv - kSecondTerm100 * std::sqrt(std::log(2.0 / 0.27))) <= 1e-12);
  CHECK(std::abs(tv - 0.4002) <= 1e-4);

  const double reduced = kSecondTerm100 * std::sqrt(std::log(2.0));
  CHECK(bound_thm4_tv(1.0, 100, 1.0, 0.0) == doctest::Approx(reduced).epsilon(1e-14));
  CHECK(bound_thm4_kl(1.0, 100, 1.0, 0.0) == doctest::Approx(reduced).epsilon(1e-14));
  CHECK(bound_thm4_kl(1.0, 100, 0.5, kInf) == kInf);
  CHECK_THROWS_AS(bound_thm4_tv(1.0, 100, 0.0, 0.1), InvalidInput);
  CHECK_THROWS_AS(bound_thm4_kl(1.0, 100, -0.1, 0.1), InvalidInput);
}

TEST_CASE("thm4 bounds are nonincreasing in delta") {
  Rng rng(4);
  for (int i = 0; i < 1000; ++i) {
    const double l = 0.5 + 2.0 * rng.uniform();
    const std::size_t horizon = 1 + static_cast<std::size_t>(rng.uniform() * 500);
    const double v = rng.uniform();
    const double k = 5.0 * rng.uniform();
    const double d1 = 1e-4 + rng.uniform() * (1.0 - 1e-4);
    const double d2 = d1 + rng.uniform() * (1.0 - d1);
    CHECK(bound_thm4_tv(l, horizon, d1, v) >= bound_thm4_tv(l, horizon, d2, v));
    CHECK(bound_thm4_kl(l, horizon, d1, k) >= bound_thm4_kl(l, horizon, d2, k));
    CHECK(bound_thm4_tv(l, horizon, d1, v) >= bound_thm4_tv(l, horizon, 1.0, v));
    CHECK(bound_thm4_kl(l, horizon, d1, k) >= bound_thm4_kl(l, horizon, 1.0, k));
  }
}

TEST_CASE("evaluate_bound dispatches") {
  BoundSpec spec;
  spec.kind = BoundKind::thm4_kl;
  spec.horizon = 100;
  spec.delta = 0.25;
  spec.kl = 1.0;
  CHECK(evaluate_bound(spec).value == bound_thm4_kl(1.0, 100, 0.25, 1.0));
  spec.kind = BoundKind::cor1;
  spec.kl = 2.0;
  CHECK(evaluate_bound(spec).value == doctest::Approx(0.1));
  CHECK(to_string(BoundKind::thm4_tv) == "thm4-tv");
}

TEST_CASE("empirical_coverage") {
  SUBCASE("zero regret never violates") {
    const auto pair = random_markov_pair(1, 2, 9);
    const auto p = make_markov(pair.p, 20);
    const auto cls = LossFunction::classification(Alphabet(2));
    const Policy o = optimal_policy(p, cls);
    const auto traces = run_batch(p, o, o, cls, {50, 0, 1}, &p);
    BoundSpec spec;
    spec.kind = BoundKind::lemma5;
    spec.horizon = 20;
    spec.delta = 0.5;
    CHECK(empirical_coverage(traces, spec) == 0.0);
  }
  SUBCASE("a single violating trace") {
    const ImpossibilityGame g(0.25, 0.125, 9);
    RegretTrace bad;
    for (std::uint64_t seed = 0;; ++seed) {
      bad = run_episode(g.inst.p, g.learner, g.optimal, g.loss, seed, &g.inst.q);
      if (bad.outcomes[0] == 0) break;
    }
    BoundSpec spec;
    spec.kind = BoundKind::thm2;
    spec.v_expected = 0.1;
    CHECK(empirical_coverage({bad}, spec) == 1.0);
  }
  SUBCASE("missing divergence data is rejected") {
    const ImpossibilityGame g(0.25, 0.125, 9);
    const auto tr = run_episode(g.inst.p, g.learner, g.optimal, g.loss, 1);
    BoundSpec spec;
    spec.kind = BoundKind::lemma5;
    spec.horizon = 9;
    spec.delta = 0.1;
    CHECK_THROWS_AS(empirical_coverage({tr}, spec), InvalidInput);
    spec.kind = BoundKind::lemma6_tv;
    CHECK_THROWS_AS(empirical_coverage({tr}, spec), InvalidInput);
  }
  SUBCASE("impossibility pair against lemma5 at delta 0.05") {
    const ImpossibilityGame g(0.25, 0.125, 9);
    const auto traces = run_batch(g.inst.p, g.learner, g.optimal, g.loss, {10'000, 13, 1}, &g.inst.q);
    BoundSpec spec;
    spec.kind = BoundKind::lemma5;
    spec.horizon = 9;
    spec.delta = 0.05;
    CHECK(empirical_coverage(traces, spec) <= 0.05 + 0.007);
  }
}
