#include "seqregret/markov.hpp"

#include <cmath>
#include <istream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>

namespace seqregret {

namespace {

constexpr std::size_t kMaxContexts = std::size_t{1} << 24;

void check_shape(std::size_t memory, std::size_t states) {
  if (memory < 1) throw InvalidInput("markov memory must be at least 1");
  if (states < 2) throw InvalidInput("markov chain needs at least 2 states");
}

}  // namespace

std::size_t context_count(std::size_t memory, std::size_t states) {
  check_shape(memory, states);
  std::size_t count = 1;
  for (std::size_t i = 0; i < memory; ++i) {
    count *= states;
    if (count > kMaxContexts) throw CapacityError("S^m exceeds " + std::to_string(kMaxContexts) + " contexts");
  }
  return count;
}

MarkovParams::MarkovParams(std::size_t memory, std::size_t states, std::vector<double> transitions)
    : memory_(memory), states_(states), transitions_(std::move(transitions)) {
  const std::size_t contexts = context_count(memory, states);
  if (transitions_.size() != contexts * states) {
    throw InvalidInput("expected " + std::to_string(contexts * states) + " transition probabilities, got " +
                       std::to_string(transitions_.size()));
  }
  for (std::size_t c = 0; c < contexts; ++c) {
    auto first = transitions_.begin() + static_cast<std::ptrdiff_t>(c * states);
    // Pmf does the range check and renormalization.
    Pmf row(std::vector<double>(first, first + static_cast<std::ptrdiff_t>(states)));
    std::copy(row.probs().begin(), row.probs().end(), first);
  }
}

MarkovParams MarkovParams::uniform(std::size_t memory, std::size_t states) {
  const std::size_t contexts = context_count(memory, states);
  return MarkovParams(memory, states, std::vector<double>(contexts * states, 1.0 / static_cast<double>(states)));
}

Pmf MarkovParams::row_pmf(std::size_t context) const {
  const auto r = row(context);
  return Pmf(std::vector<double>(r.begin(), r.end()));
}

std::size_t context_index(std::size_t memory, std::size_t states, History history) {
  std::size_t idx = 0;
  const std::size_t start = history.size() > memory ? history.size() - memory : 0;
  // Padding symbols are state 0 and contribute nothing to the index.
  for (std::size_t i = start; i < history.size(); ++i) {
    if (history[i] >= states) throw InvalidInput("symbol outside the state space");
    idx = idx * states + history[i];
  }
  return idx;
}

ContextCounts::ContextCounts(std::size_t memory, std::size_t states)
    : memory_(memory),
      states_(states),
      counts_(context_count(memory, states) * states, 0),
      totals_(context_count(memory, states), 0) {}

ContextCounts ContextCounts::from_history(std::size_t memory, std::size_t states, History history) {
  ContextCounts counts(memory, states);
  for (Symbol z : history) counts.observe(z);
  return counts;
}

void ContextCounts::observe(Symbol next) {
  if (next >= states_) throw InvalidInput("symbol outside the state space");
  ++counts_[context_ * states_ + next];
  ++totals_[context_];
  ++observations_;
  context_ = next_context(context_, next, states_, totals_.size());
}

Pmf markov_kernel(const MarkovParams& params, History history) {
  return params.row_pmf(context_index(params.memory(), params.states(), history));
}

namespace {

class MarkovModel final : public KernelModel {
 public:
  explicit MarkovModel(MarkovParams params) : params_(std::move(params)) {}

  Pmf kernel(History history) const override { return markov_kernel(params_, history); }

  std::unique_ptr<KernelCursor> cursor() const override {
    class Cursor final : public KernelCursor {
     public:
      explicit Cursor(const MarkovParams& params) : params_(params) {}
      Pmf current() const override { return params_.row_pmf(context_); }
      void advance(Symbol z) override {
        context_ = next_context(context_, z, params_.states(), params_.contexts());
      }

     private:
      const MarkovParams& params_;
      std::size_t context_ = 0;
    };
    return std::make_unique<Cursor>(params_);
  }

 private:
  MarkovParams params_;
};

class LaplaceModel final : public KernelModel {
 public:
  LaplaceModel(std::size_t memory, std::size_t states) : memory_(memory), states_(states) {}

  Pmf kernel(History history) const override {
    return laplace_mixture_predictive(memory_, states_, history);
  }

  std::unique_ptr<KernelCursor> cursor() const override {
    class Cursor final : public KernelCursor {
     public:
      Cursor(std::size_t memory, std::size_t states) : counts_(memory, states) {}
      Pmf current() const override { return laplace_predictive(counts_); }
      void advance(Symbol z) override { counts_.observe(z); }

     private:
      ContextCounts counts_;
    };
    return std::make_unique<Cursor>(memory_, states_);
  }

 private:
  std::size_t memory_;
  std::size_t states_;
};

}  // namespace

SequentialDistribution make_markov(MarkovParams params, std::size_t horizon) {
  Alphabet alphabet(params.states());
  return SequentialDistribution(alphabet, horizon, DistributionTag::markov_memory,
                                std::make_shared<MarkovModel>(std::move(params)));
}

Pmf laplace_predictive(const ContextCounts& counts) {
  const std::size_t c = counts.current_context();
  const double denom = static_cast<double>(counts.total(c) + counts.states());
  std::vector<double> probs(counts.states());
  for (Symbol s = 0; s < counts.states(); ++s) {
    probs[s] = static_cast<double>(counts.count(c, s) + 1) / denom;
  }
  return Pmf(std::move(probs));
}

Pmf laplace_mixture_predictive(std::size_t memory, std::size_t states, History history) {
  return laplace_predictive(ContextCounts::from_history(memory, states, history));
}

SequentialDistribution make_laplace_mixture(std::size_t memory, std::size_t states, std::size_t horizon) {
  context_count(memory, states);
  return SequentialDistribution(Alphabet(states), horizon, DistributionTag::mixture,
                                std::make_shared<LaplaceModel>(memory, states));
}

void McmcConfig::validate() const {
  if (thinning < 1) throw InvalidInput("mcmc thinning must be at least 1");
  if (chain_length <= burn_in) throw InvalidInput("mcmc chain_length must exceed burn_in");
  if (!(proposal_scale > 0.0) || !std::isfinite(proposal_scale)) {
    throw InvalidInput("mcmc proposal_scale must be positive");
  }
}

McmcEstimate mcmc_mixture_predictive(std::size_t memory, std::size_t states, History history,
                                     const McmcConfig& config) {
  config.validate();
  const ContextCounts counts = ContextCounts::from_history(memory, states, history);
  const std::size_t contexts = counts.contexts();
  const std::size_t target = counts.current_context();
  const double half_width = 0.5 * config.proposal_scale;

  // Start at the centre of every simplex.
  std::vector<double> theta(contexts * states, 1.0 / static_cast<double>(states));
  std::vector<double> proposal(states);
  Rng rng(config.seed);

  std::vector<double> sum(states, 0.0);
  std::size_t kept = 0;
  std::size_t accepted = 0;
  double moved = 0.0;

  for (std::size_t iter = 0; iter < config.chain_length; ++iter) {
    for (std::size_t c = 0; c < contexts; ++c) {
      double* row = theta.data() + c * states;
      double free_sum = 0.0;
      bool inside = true;
      for (std::size_t s = 0; s + 1 < states; ++s) {
        proposal[s] = row[s] + rng.uniform(-half_width, half_width);
        if (proposal[s] < 0.0) inside = false;
        free_sum += proposal[s];
      }
      proposal[states - 1] = 1.0 - free_sum;
      if (proposal[states - 1] < 0.0) inside = false;
      // The log-uniform draw is consumed either way so streams stay aligned.
      const double log_u = std::log(rng.uniform_open_low());
      if (!inside) continue;

      double log_ratio = 0.0;
      for (std::size_t s = 0; s < states; ++s) {
        const auto n = counts.count(c, static_cast<Symbol>(s));
        if (n == 0) continue;
        if (proposal[s] <= 0.0) {
          log_ratio = -std::numeric_limits<double>::infinity();
          break;
        }
        log_ratio += static_cast<double>(n) * (std::log(proposal[s]) - std::log(row[s]));
      }
      if (log_u < log_ratio) {
        if (c == target) {
          for (std::size_t s = 0; s < states; ++s) moved += std::abs(proposal[s] - row[s]);
        }
        std::copy(proposal.begin(), proposal.end(), row);
        ++accepted;
      }
    }
    if (iter >= config.burn_in && (iter - config.burn_in) % config.thinning == 0) {
      const double* row = theta.data() + target * states;
      for (std::size_t s = 0; s < states; ++s) sum[s] += row[s];
      ++kept;
    }
  }

  for (double& v : sum) v /= static_cast<double>(kept);
  McmcEstimate out{Pmf(std::move(sum))};
  out.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(config.chain_length * contexts);
  out.mean_move = moved / static_cast<double>(config.chain_length);
  out.kept_samples = kept;
  return out;
}

namespace {

std::uint64_t history_hash(History history) {
  std::uint64_t h = mix64(history.size());
  for (Symbol s : history) h = mix64(h ^ (static_cast<std::uint64_t>(s) + 0x9e3779b97f4a7c15ULL));
  return h;
}

}  // namespace

SequentialDistribution make_mcmc_mixture(std::size_t memory, std::size_t states, std::size_t horizon,
                                         McmcConfig config) {
  config.validate();
  context_count(memory, states);
  return make_kernel_distribution(Alphabet(states), horizon, DistributionTag::mixture,
                                  [memory, states, config](History history) {
                                    McmcConfig local = config;
                                    local.seed = derive_seed(config.seed, history_hash(history));
                                    return mcmc_mixture_predictive(memory, states, history, local).predictive;
                                  });
}

MarkovParams sample_theta(std::size_t memory, std::size_t states, std::uint64_t seed) {
  const std::size_t contexts = context_count(memory, states);
  Rng rng(seed);
  std::vector<double> transitions(contexts * states);
  for (std::size_t c = 0; c < contexts; ++c) {
    double total = 0.0;
    for (std::size_t s = 0; s < states; ++s) {
      transitions[c * states + s] = rng.exponential();
      total += transitions[c * states + s];
    }
    for (std::size_t s = 0; s < states; ++s) transitions[c * states + s] /= total;
  }
  return MarkovParams(memory, states, std::move(transitions));
}

ExpectedDivergences markov_expected_quantities(const MarkovParams& p, const MarkovParams& q,
                                               std::size_t horizon) {
  if (p.memory() != q.memory() || p.states() != q.states()) {
    throw InvalidInput("markov pair must share memory and state count");
  }
  if (horizon < 1) throw InvalidInput("horizon must be at least 1");
  const std::size_t contexts = p.contexts();
  const std::size_t states = p.states();

  std::vector<double> row_tv(contexts), row_kl(contexts);
  for (std::size_t c = 0; c < contexts; ++c) {
    const Pmf pc = p.row_pmf(c);
    const Pmf qc = q.row_pmf(c);
    row_tv[c] = tv_distance(pc, qc);
    row_kl[c] = kl_divergence(pc, qc);
  }

  std::vector<double> occupancy(contexts, 0.0), next(contexts);
  occupancy[0] = 1.0;
  double tv_sum = 0.0;
  double kl_sum = 0.0;
  for (std::size_t t = 0; t < horizon; ++t) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t c = 0; c < contexts; ++c) {
      const double w = occupancy[c];
      if (w == 0.0) continue;
      tv_sum += w * row_tv[c];
      kl_sum += std::isinf(row_kl[c]) ? row_kl[c] : w * row_kl[c];
      for (std::size_t s = 0; s < states; ++s) {
        next[next_context(c, static_cast<Symbol>(s), states, contexts)] += w * p.prob(c, static_cast<Symbol>(s));
      }
    }
    occupancy.swap(next);
  }

  ExpectedDivergences out;
  out.mode = EvalMode::exact;
  const double n = static_cast<double>(horizon);
  out.v_expected = std::min(1.0, tv_sum / n);
  out.d_expected = kl_sum / n;
  // Chain rule: KL of the joint laws is the sum of expected per-round divergences.
  out.joint_kl = kl_sum;
  return out;
}

MarkovParams read_theta(std::istream& in, std::size_t memory, std::size_t states) {
  const std::size_t contexts = context_count(memory, states);
  std::vector<double> transitions;
  transitions.reserve(contexts * states);
  std::string line;
  std::size_t line_no = 0;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::vector<double> row;
    std::string token;
    while (fields >> token) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(token, &used));
        if (used != token.size()) throw std::invalid_argument(token);
      } catch (const std::exception&) {
        throw InvalidInput("theta line " + std::to_string(line_no) + ": cannot parse '" + token + "'");
      }
    }
    if (row.empty()) continue;
    if (row.size() != states) {
      throw InvalidInput("theta line " + std::to_string(line_no) + ": expected " + std::to_string(states) +
                         " probabilities, got " + std::to_string(row.size()));
    }
    if (++rows > contexts) throw InvalidInput("theta file has more than S^m context rows");
    transitions.insert(transitions.end(), row.begin(), row.end());
  }
  if (rows != contexts) {
    throw InvalidInput("theta file has " + std::to_string(rows) + " rows, expected " + std::to_string(contexts));
  }
  return MarkovParams(memory, states, std::move(transitions));
}

void write_theta(std::ostream& out, const MarkovParams& params) {
  const auto precision = out.precision(17);
  for (std::size_t c = 0; c < params.contexts(); ++c) {
    const auto row = params.row(c);
    for (std::size_t s = 0; s < row.size(); ++s) out << (s ? " " : "") << row[s];
    out << '\n';
  }
  out.precision(precision);
}

}  // namespace seqregret
