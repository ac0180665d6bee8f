#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "seqregret/divergences.hpp"
#include "seqregret/markov.hpp"
#include "seqregret/validate.hpp"

using namespace seqregret;

TEST_CASE("MarkovParams validation") {
  CHECK_THROWS_AS(MarkovParams(0, 2, {0.5, 0.5}), InvalidInput);
  CHECK_THROWS_AS(MarkovParams(1, 2, {0.5, 0.5}), InvalidInput);  // needs two rows
  CHECK_THROWS_AS(MarkovParams(1, 2, {0.5, 0.6, 0.5, 0.5}), InvalidInput);
  const auto u = MarkovParams::uniform(2, 3);
  CHECK(u.contexts() == 9);
  CHECK(u.prob(4, 2) == doctest::Approx(1.0 / 3.0));
  CHECK_THROWS_AS(context_count(30, 2), CapacityError);
}

TEST_CASE("context indexing with padding") {
  // Two-state memory-2: padding with state 0, oldest symbol most significant.
  CHECK(context_index(2, 2, Sequence{}) == 0);
  CHECK(context_index(2, 2, Sequence{1}) == 1);     // (0, 1)
  CHECK(context_index(2, 2, Sequence{1, 0}) == 2);  // (1, 0)
  CHECK(context_index(2, 2, Sequence{0, 1, 1}) == 3);
  CHECK(context_index(3, 3, Sequence{2, 1}) == 0 * 9 + 2 * 3 + 1);
  std::size_t ctx = 0;
  const Sequence path{2, 0, 1, 1, 2, 0};
  for (std::size_t t = 0; t < path.size(); ++t) {
    CHECK(ctx == context_index(2, 3, History(path.data(), t)));
    ctx = next_context(ctx, path[t], 3, 9);
  }
}

TEST_CASE("markov_kernel examples") {
  SUBCASE("padding makes the first context state 1") {
    const MarkovParams p(1, 2, {0.9, 0.1, 0.3, 0.7});
    const Pmf k = markov_kernel(p, {});
    CHECK(k[0] == doctest::Approx(0.9));
    CHECK(k[1] == doctest::Approx(0.1));
  }
  SUBCASE("memory 2 after one observation of state 2") {
    const MarkovParams p(2, 2, {0.1, 0.9, 0.2, 0.8, 0.3, 0.7, 0.4, 0.6});
    // Paper history [2] is internal [1]; the context is (1, 2), row index 1.
    const Pmf k = markov_kernel(p, Sequence{1});
    CHECK(k[0] == doctest::Approx(0.2));
  }
  SUBCASE("deterministic chain") {
    const MarkovParams p(1, 3, {0, 1, 0, 0, 0, 1, 1, 0, 0});
    CHECK(markov_kernel(p, Sequence{2, 1}) == Pmf::dirac(3, 2));
    const auto d = make_markov(p, 6);
    CHECK(sample_sequence(d, 5) == Sequence{1, 2, 0, 1, 2, 0});
  }
  SUBCASE("make_markov agrees with markov_kernel") {
    const auto theta = sample_theta(2, 3, 1);
    const auto d = make_markov(theta, 8);
    const Sequence path = sample_sequence(d, 9);
    auto cursor = d.cursor();
    for (std::size_t t = 0; t < path.size(); ++t) {
      CHECK(cursor->current() == markov_kernel(theta, History(path.data(), t)));
      CHECK(kernel_eval(d, History(path.data(), t)) == markov_kernel(theta, History(path.data(), t)));
      cursor->advance(path[t]);
    }
    CHECK(d.tag() == DistributionTag::markov_memory);
  }
}

TEST_CASE("context counts") {
  const Sequence h{1, 1, 0, 1};
  const auto c = ContextCounts::from_history(1, 2, h);
  CHECK(c.observations() == 4);
  std::uint64_t sum = 0;
  for (std::size_t ctx = 0; ctx < c.contexts(); ++ctx) {
    for (Symbol s = 0; s < 2; ++s) sum += c.count(ctx, s);
  }
  CHECK(sum == 4);
  // Padded context 0 produced the first 1; then 1->1, 1->0, 0->1.
  CHECK(c.count(0, 1) == 2);
  CHECK(c.count(1, 1) == 1);
  CHECK(c.count(1, 0) == 1);
  CHECK(c.current_context() == 1);
}

TEST_CASE("laplace_mixture_predictive examples") {
  for (std::size_t m = 1; m <= 3; ++m) {
    const Pmf k = laplace_mixture_predictive(m, 2, {});
    CHECK(k[0] == 0.5);
  }
  // Paper history [1,1,1] is internal [0,0,0]: three 0->0 transitions.
  const Pmf k = laplace_mixture_predictive(1, 2, Sequence{0, 0, 0});
  CHECK(k[0] == doctest::Approx(0.8));
  CHECK(k[1] == doctest::Approx(0.2));
  CHECK(oracle::beta_predictive_zero(3, 0) == doctest::Approx(0.8).epsilon(1e-6));
  // Paper [1,2]: the current context is state 2 with no observations.
  const Pmf u = laplace_mixture_predictive(1, 2, Sequence{0, 1});
  CHECK(u[0] == doctest::Approx(0.5));
}

TEST_CASE("laplace predictive matches quadrature") {
  Rng rng(31);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    Sequence h(static_cast<std::size_t>(rng.uniform() * 7));
    for (auto& s : h) s = rng.uniform() < 0.5 ? 0 : 1;
    const auto counts = ContextCounts::from_history(1, 2, h);
    const std::size_t c = counts.current_context();
    const double ref = oracle::beta_predictive_zero(counts.count(c, 0), counts.count(c, 1));
    worst = std::max(worst, std::abs(laplace_mixture_predictive(1, 2, h)[0] - ref));
    // The library's own midpoint-rule evaluator, used by the validate suite.
    worst = std::max(worst, std::abs(quadrature_mixture_predictive(1, h)[0] - ref));
  }
  CHECK(worst <= 1e-4);
}

TEST_CASE("laplace predictive is exchangeable within contexts") {
  // Reversing the interior of a path often keeps every transition count; when
  // it does the predictive must not change.
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    Sequence h(8);
    for (auto& s : h) s = static_cast<Symbol>(rng.uniform() * 3);
    Sequence g = h;
    std::reverse(g.begin() + 1, g.end() - 1);
    const auto ch = ContextCounts::from_history(1, 3, h);
    const auto cg = ContextCounts::from_history(1, 3, g);
    bool same = ch.current_context() == cg.current_context();
    for (std::size_t c = 0; c < 3 && same; ++c) {
      for (Symbol s = 0; s < 3; ++s) same = same && ch.count(c, s) == cg.count(c, s);
    }
    if (same) CHECK(laplace_mixture_predictive(1, 3, h) == laplace_mixture_predictive(1, 3, g));
  }
  // A fixed pair with equal counts: 0,1,0,2,0 and 0,2,0,1,0.
  CHECK(laplace_mixture_predictive(1, 3, Sequence{0, 1, 0, 2, 0}) ==
        laplace_mixture_predictive(1, 3, Sequence{0, 2, 0, 1, 0}));
}

TEST_CASE("appending an observation raises its predictive probability") {
  Rng rng(12);
  int compared = 0;
  for (int trial = 0; trial < 600; ++trial) {
    const std::size_t m = 1 + trial % 2;
    Sequence h(static_cast<std::size_t>(rng.uniform() * 10));
    for (auto& s : h) s = static_cast<Symbol>(rng.uniform() * 2);
    const Symbol s = rng.uniform() < 0.5 ? 0 : 1;
    Sequence longer = h;
    longer.push_back(s);
    // Only comparable when the longer path returns to the same context.
    if (context_index(m, 2, longer) != context_index(m, 2, h)) continue;
    ++compared;
    CHECK(laplace_mixture_predictive(m, 2, longer)[s] > laplace_mixture_predictive(m, 2, h)[s]);
  }
  CHECK(compared >= 100);
}

TEST_CASE("mixture process cursor") {
  const auto mix = make_laplace_mixture(2, 3, 15);
  CHECK(mix.tag() == DistributionTag::mixture);
  const Sequence path{2, 2, 1, 0, 0, 2, 1, 1, 1, 0, 2, 2, 0, 1};
  auto cursor = mix.cursor();
  for (std::size_t t = 0; t < path.size(); ++t) {
    const Pmf expect = laplace_mixture_predictive(2, 3, History(path.data(), t));
    for (Symbol s = 0; s < 3; ++s) CHECK(cursor->current()[s] == doctest::Approx(expect[s]).epsilon(1e-15));
    cursor->advance(path[t]);
  }
}

TEST_CASE("mcmc_mixture_predictive") {
  SUBCASE("empty history") {
    const auto est = mcmc_mixture_predictive(1, 2, {});
    CHECK(tv_distance(est.predictive, Pmf::uniform(2)) <= 0.02);
    CHECK(est.kept_samples == (McmcConfig{}.chain_length - McmcConfig{}.burn_in) / McmcConfig{}.thinning);
    CHECK_FALSE(est.stuck());
  }
  SUBCASE("history of three state-1 symbols") {
    const auto est = mcmc_mixture_predictive(1, 2, Sequence{0, 0, 0});
    CHECK(tv_distance(est.predictive, Pmf({0.8, 0.2})) <= 0.02);
  }
  SUBCASE("deterministic given the seed") {
    McmcConfig cfg;
    cfg.chain_length = 3000;
    cfg.burn_in = 500;
    cfg.seed = 42;
    const Sequence h{1, 0, 1, 1};
    CHECK(mcmc_mixture_predictive(2, 2, h, cfg).predictive == mcmc_mixture_predictive(2, 2, h, cfg).predictive);
  }
  SUBCASE("vanishing proposal width freezes the chain") {
    McmcConfig cfg;
    cfg.chain_length = 2000;
    cfg.burn_in = 100;
    cfg.proposal_scale = 1e-300;
    const auto est = mcmc_mixture_predictive(1, 2, Sequence{0, 0, 1}, cfg);
    CHECK(est.stuck());
    CHECK(est.predictive[0] == doctest::Approx(0.5));
  }
  SUBCASE("config validation") {
    McmcConfig bad;
    bad.burn_in = bad.chain_length;
    CHECK_THROWS_AS(bad.validate(), InvalidInput);
    McmcConfig thin;
    thin.thinning = 0;
    CHECK_THROWS_AS(thin.validate(), InvalidInput);
    McmcConfig scale;
    scale.proposal_scale = 0.0;
    CHECK_THROWS_AS(scale.validate(), InvalidInput);
  }
  SUBCASE("three states, memory 1") {
    const Sequence h{0, 2, 2, 1, 2, 0, 2};
    McmcConfig cfg;
    cfg.seed = 3;
    const auto est = mcmc_mixture_predictive(1, 3, h, cfg);
    CHECK(tv_distance(est.predictive, laplace_mixture_predictive(1, 3, h)) <= 0.02);
  }
}

TEST_CASE("sample_theta") {
  double mean2 = 0.0;
  double mean3 = 0.0;
  constexpr int n = 10'000;
  for (int i = 0; i < n; ++i) {
    const auto t2 = sample_theta(1, 2, static_cast<std::uint64_t>(i));
    const auto t3 = sample_theta(1, 3, static_cast<std::uint64_t>(i) + 1'000'000);
    if (i < 1000) {
      for (std::size_t c = 0; c < t3.contexts(); ++c) {
        double sum = 0.0;
        for (double x : t3.row(c)) sum += x;
        CHECK(std::abs(sum - 1.0) <= 1e-12);
      }
    }
    mean2 += t2.prob(0, 0);
    mean3 += t3.prob(1, 2);
  }
  CHECK(std::abs(mean2 / n - 0.5) <= 0.02);
  CHECK(std::abs(mean3 / n - 1.0 / 3.0) <= 0.02);
  CHECK(sample_theta(3, 2, 7).transitions()[5] == sample_theta(3, 2, 7).transitions()[5]);
}

TEST_CASE("markov_expected_quantities agrees with enumeration") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const std::size_t m = 1 + seed % 2;
    const auto pair = random_markov_pair(m, 2 + seed % 2, seed);
    const std::size_t horizon = 5;
    const auto dp = markov_expected_quantities(pair.p, pair.q, horizon);
    const auto ref = oracle::expected_by_enumeration(make_markov(pair.p, horizon), make_markov(pair.q, horizon));
    CHECK(std::abs(dp.v_expected - ref.v) <= 1e-12);
    CHECK(std::abs(dp.d_expected - ref.d) <= 1e-12);
    CHECK(std::abs(dp.joint_kl - ref.kl) <= 1e-10);
  }
  CHECK_THROWS_AS(markov_expected_quantities(MarkovParams::uniform(1, 2), MarkovParams::uniform(2, 2), 4),
                  InvalidInput);
}

TEST_CASE("theta files") {
  const auto theta = sample_theta(2, 3, 19);
  std::stringstream ss;
  write_theta(ss, theta);
  const auto back = read_theta(ss, 2, 3);
  for (std::size_t i = 0; i < theta.transitions().size(); ++i) {
    CHECK(back.transitions()[i] == theta.transitions()[i]);
  }

  std::istringstream commented("# two states, memory 1\n0.9 0.1\n\n0.3   0.7\n");
  CHECK(read_theta(commented, 1, 2).prob(1, 1) == doctest::Approx(0.7));

  std::istringstream short_file("0.5 0.5\n");
  CHECK_THROWS_AS(read_theta(short_file, 1, 2), InvalidInput);
  std::istringstream bad_row("0.5 0.5\n0.5 0.6\n");
  CHECK_THROWS_AS(read_theta(bad_row, 1, 2), InvalidInput);
  std::istringstream junk("0.5 abc\n0.5 0.5\n");
  CHECK_THROWS_AS(read_theta(junk, 1, 2), InvalidInput);
  std::istringstream wide("0.5 0.25 0.25\n0.5 0.5\n");
  CHECK_THROWS_AS(read_theta(wide, 1, 2), InvalidInput);
}
