#include "seqregret/regret.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "seqregret/parallel.hpp"

namespace seqregret {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_delta(double delta) {
  if (!(delta > 0.0 && delta <= 1.0)) throw InvalidInput("delta must lie in (0, 1], got " + std::to_string(delta));
}

void require_loss_bound(double loss_bound) {
  if (!(loss_bound >= 0.0) || !std::isfinite(loss_bound)) throw InvalidInput("loss bound must be finite and >= 0");
}

void require_horizon(std::size_t horizon) {
  if (horizon < 1) throw InvalidInput("horizon must be at least 1");
}

double deviation_term(double loss_bound, std::size_t horizon, double log_arg) {
  return 2.0 * std::sqrt(2.0) * loss_bound / std::sqrt(static_cast<double>(horizon)) * std::sqrt(std::log(log_arg));
}

void check_episode_inputs(const SequentialDistribution& p, const Policy& learner, const Policy& optimal,
                          const LossFunction& loss, const SequentialDistribution* surrogate) {
  if (loss.outcomes() != p.alphabet().size()) throw InvalidInput("loss outcome domain does not match the alphabet");
  if (learner.prediction_domain() != loss.predictions() || optimal.prediction_domain() != loss.predictions()) {
    throw InvalidInput("policy prediction domains do not match the loss");
  }
  if (surrogate && (surrogate->alphabet() != p.alphabet() || surrogate->horizon() != p.horizon())) {
    throw InvalidInput("surrogate must share the alphabet and horizon of P");
  }
}

}  // namespace

RegretTrace run_episode(const SequentialDistribution& p, const Policy& learner, const Policy& optimal,
                        const LossFunction& loss, std::uint64_t seed, const SequentialDistribution* surrogate) {
  check_episode_inputs(p, learner, optimal, loss, surrogate);
  const std::size_t horizon = p.horizon();
  RegretTrace trace;
  trace.seed = seed;
  trace.outcomes.reserve(horizon);
  trace.learner_predictions.reserve(horizon);
  trace.optimal_predictions.reserve(horizon);
  trace.losses_learner.reserve(horizon);
  trace.losses_optimal.reserve(horizon);
  trace.cumulative.reserve(horizon);

  Rng rng(seed);
  auto nature = p.cursor();
  auto learner_cursor = learner.cursor();
  auto optimal_cursor = optimal.cursor();
  std::unique_ptr<KernelCursor> surrogate_cursor = surrogate ? surrogate->cursor() : nullptr;
  std::optional<DivergenceAccumulator> divergence;
  if (surrogate) divergence.emplace(horizon);

  double cumulative = 0.0;
  for (std::size_t t = 0; t < horizon; ++t) {
    const Pmf kernel = nature->current();
    const Symbol b = learner_cursor->decide();
    const Symbol b_star = optimal_cursor->decide();
    if (divergence) divergence->add(kernel, surrogate_cursor->current());

    // Nature reveals Z_t only after both predictions are fixed.
    const Symbol z = sample_symbol(kernel, rng);
    const double l = loss(b, z);
    const double l_star = loss(b_star, z);
    cumulative += l - l_star;

    trace.outcomes.push_back(z);
    trace.learner_predictions.push_back(b);
    trace.optimal_predictions.push_back(b_star);
    trace.losses_learner.push_back(l);
    trace.losses_optimal.push_back(l_star);
    trace.cumulative.push_back(cumulative);

    nature->advance(z);
    learner_cursor->advance(z);
    optimal_cursor->advance(z);
    if (surrogate_cursor) surrogate_cursor->advance(z);
  }
  trace.average = cumulative / static_cast<double>(horizon);
  if (divergence) trace.divergence = std::move(*divergence).finish();
  return trace;
}

double sorted_quantile(std::span<const double> sorted, double level) {
  if (sorted.empty()) throw InvalidInput("quantile of an empty sample");
  if (!(level >= 0.0 && level <= 1.0)) throw InvalidInput("quantile level must lie in [0, 1]");
  const double pos = level * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  // Written so that equal neighbours reproduce their value exactly.
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

RegretSummary summarize_curves(const std::vector<std::vector<double>>& curves, std::uint64_t base_seed) {
  if (curves.empty()) throw InvalidInput("cannot summarize zero runs");
  const std::size_t horizon = curves.front().size();
  for (const auto& c : curves) {
    if (c.size() != horizon) throw InvalidInput("regret curves differ in length");
  }
  RegretSummary summary;
  summary.runs = curves.size();
  summary.base_seed = base_seed;
  summary.mean.resize(horizon);
  summary.quantiles.resize(horizon);
  std::vector<double> column(curves.size());
  for (std::size_t t = 0; t < horizon; ++t) {
    double sum = 0.0;
    for (std::size_t r = 0; r < curves.size(); ++r) {
      column[r] = curves[r][t];
      sum += column[r];
    }
    std::sort(column.begin(), column.end());
    // Clamp so a constant column reports exactly its value.
    summary.mean[t] = std::clamp(sum / static_cast<double>(curves.size()), column.front(), column.back());
    for (std::size_t q = 0; q < kSummaryQuantiles.size(); ++q) {
      summary.quantiles[t][q] = sorted_quantile(column, kSummaryQuantiles[q]);
    }
  }
  return summary;
}

std::vector<double> running_average(const RegretTrace& trace) {
  std::vector<double> curve(trace.cumulative.size());
  for (std::size_t t = 0; t < curve.size(); ++t) curve[t] = trace.cumulative[t] / static_cast<double>(t + 1);
  return curve;
}

std::vector<RegretTrace> run_batch(const SequentialDistribution& p, const Policy& learner, const Policy& optimal,
                                   const LossFunction& loss, const BatchOptions& options,
                                   const SequentialDistribution* surrogate) {
  if (options.runs < 1) throw InvalidInput("batch needs at least one run");
  std::vector<RegretTrace> traces(options.runs);
  parallel_for(options.runs, options.workers, [&](std::size_t r) {
    traces[r] = run_episode(p, learner, optimal, loss, episode_seed(options.base_seed, r), surrogate);
  });
  return traces;
}

RegretSummary monte_carlo_summary(const SequentialDistribution& p, const Policy& learner,
                                  const Policy& optimal, const LossFunction& loss,
                                  const BatchOptions& options) {
  if (options.runs < 1) throw InvalidInput("summary needs at least one run");
  std::vector<std::vector<double>> curves(options.runs);
  parallel_for(options.runs, options.workers, [&](std::size_t r) {
    curves[r] = running_average(run_episode(p, learner, optimal, loss, episode_seed(options.base_seed, r)));
  });
  return summarize_curves(curves, options.base_seed);
}

double bound_thm2(double loss_bound, double v_expected) {
  require_loss_bound(loss_bound);
  if (!(v_expected >= 0.0 && v_expected <= 1.0)) throw InvalidInput("V_T must lie in [0, 1]");
  return loss_bound * v_expected;
}

double bound_cor1(double loss_bound, std::size_t horizon, double kl) {
  require_loss_bound(loss_bound);
  require_horizon(horizon);
  if (!(kl >= 0.0)) throw InvalidInput("KL must be nonnegative");
  if (std::isinf(kl)) return kInf;
  return loss_bound * std::sqrt(kl / (2.0 * static_cast<double>(horizon)));
}

double bound_lemma5(double loss_bound, std::size_t horizon, double delta, double v_hat) {
  require_loss_bound(loss_bound);
  require_horizon(horizon);
  require_delta(delta);
  return 2.0 * loss_bound * v_hat + deviation_term(loss_bound, horizon, 1.0 / delta);
}

double bound_thm4_tv(double loss_bound, std::size_t horizon, double delta, double v_expected) {
  require_loss_bound(loss_bound);
  require_horizon(horizon);
  require_delta(delta);
  return 4.0 * loss_bound * v_expected / delta + deviation_term(loss_bound, horizon, 2.0 / delta);
}

double bound_thm4_kl(double loss_bound, std::size_t horizon, double delta, double kl) {
  require_loss_bound(loss_bound);
  require_horizon(horizon);
  require_delta(delta);
  if (!(kl >= 0.0)) throw InvalidInput("KL must be nonnegative");
  if (std::isinf(kl)) return kInf;
  const double t = static_cast<double>(horizon);
  return 2.0 * loss_bound * std::sqrt(kl / t) / std::sqrt(delta) + deviation_term(loss_bound, horizon, 2.0 / delta);
}

std::string_view to_string(BoundKind kind) {
  switch (kind) {
    case BoundKind::thm2: return "thm2";
    case BoundKind::cor1: return "cor1";
    case BoundKind::lemma5: return "lemma5";
    case BoundKind::thm4_tv: return "thm4-tv";
    case BoundKind::thm4_kl: return "thm4-kl";
    case BoundKind::lemma6_tv: return "lemma6-tv";
    case BoundKind::lemma6_kl: return "lemma6-kl";
  }
  return "unknown";
}

namespace {

// Threshold of the bound for a given hatV_T.
double threshold(const BoundSpec& s, double v_hat) {
  switch (s.kind) {
    case BoundKind::thm2: return bound_thm2(s.loss_bound, s.v_expected);
    case BoundKind::cor1: return bound_cor1(s.loss_bound, s.horizon, s.kl);
    case BoundKind::lemma5: return bound_lemma5(s.loss_bound, s.horizon, s.delta, v_hat);
    case BoundKind::thm4_tv: return bound_thm4_tv(s.loss_bound, s.horizon, s.delta, s.v_expected);
    case BoundKind::thm4_kl: return bound_thm4_kl(s.loss_bound, s.horizon, s.delta, s.kl);
    case BoundKind::lemma6_tv:
      require_delta(s.delta);
      return s.v_expected / s.delta;
    case BoundKind::lemma6_kl:
      require_delta(s.delta);
      return std::sqrt(s.d_expected / (2.0 * s.delta));
  }
  throw InvalidInput("unknown bound kind");
}

bool needs_trace_divergence(BoundKind kind) {
  return kind == BoundKind::lemma5 || kind == BoundKind::lemma6_tv || kind == BoundKind::lemma6_kl;
}

}  // namespace

BoundReport evaluate_bound(const BoundSpec& spec) {
  BoundReport report;
  report.inputs = spec;
  report.value = threshold(spec, spec.v_hat);
  return report;
}

double empirical_coverage(const std::vector<RegretTrace>& traces, const BoundSpec& spec) {
  if (traces.empty()) throw InvalidInput("coverage needs at least one trace");
  const bool per_trace = needs_trace_divergence(spec.kind);
  const bool on_v_hat = spec.kind == BoundKind::lemma6_tv || spec.kind == BoundKind::lemma6_kl;
  const double fixed = per_trace ? 0.0 : threshold(spec, 0.0);
  std::size_t violations = 0;
  for (const auto& trace : traces) {
    if (per_trace && !trace.divergence) {
      throw InvalidInput(std::string("bound ") + std::string(to_string(spec.kind)) +
                         " needs per-trace divergence data");
    }
    const double v_hat = per_trace ? trace.divergence->avg_tv : 0.0;
    const double limit = per_trace ? threshold(spec, v_hat) : fixed;
    const double observed = on_v_hat ? v_hat : trace.average;
    if (observed >= limit) ++violations;
  }
  return static_cast<double>(violations) / static_cast<double>(traces.size());
}

}  // namespace seqregret
