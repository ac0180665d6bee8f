#include "seqregret/predictors.hpp"

#include <cmath>
#include <limits>
#include <utility>

namespace seqregret {

namespace {

constexpr double kOptimalityTolerance = 1e-12;

class HistoryPolicyCursor final : public PolicyCursor {
 public:
  explicit HistoryPolicyCursor(Policy policy) : policy_(std::move(policy)) {}
  Symbol decide() const override { return policy_.decide(history_); }
  void advance(Symbol z) override { history_.push_back(z); }

 private:
  Policy policy_;
  Sequence history_;
};

class MinimizerCursor final : public PolicyCursor {
 public:
  MinimizerCursor(std::unique_ptr<KernelCursor> kernel, LossFunction loss)
      : kernel_(std::move(kernel)), loss_(std::move(loss)) {}
  Symbol decide() const override { return minimize_expected_loss(kernel_->current(), loss_); }
  void advance(Symbol z) override { kernel_->advance(z); }

 private:
  std::unique_ptr<KernelCursor> kernel_;
  LossFunction loss_;
};

}  // namespace

Symbol minimize_expected_loss(const Pmf& p, const LossFunction& loss) {
  if (p.size() != loss.outcomes()) throw InvalidInput("loss outcome domain does not match the alphabet");
  Symbol best = 0;
  double best_loss = loss.expected(0, p);
  for (Symbol b = 1; b < loss.predictions(); ++b) {
    const double l = loss.expected(b, p);
    if (l < best_loss) {
      best_loss = l;
      best = b;
    }
  }
  return best;
}

Policy::Policy(DecideFn decide, std::size_t prediction_domain, std::string description)
    : decide_(std::move(decide)), domain_(prediction_domain), description_(std::move(description)) {
  if (!decide_) throw InvalidInput("policy needs a decision function");
  if (domain_ < 1) throw InvalidInput("prediction domain must be nonempty");
}

Policy Policy::minimizer(SequentialDistribution dist, LossFunction loss, std::string description) {
  if (loss.outcomes() != dist.alphabet().size()) {
    throw InvalidInput("loss outcome domain does not match the alphabet");
  }
  auto state = std::make_shared<const Minimizer>(Minimizer{dist, loss});
  Policy policy(
      [state](History history) {
        return minimize_expected_loss(kernel_eval(state->dist, history), state->loss);
      },
      loss.predictions(), std::move(description));
  policy.backing_ = state->dist;
  policy.minimizer_ = std::move(state);
  return policy;
}

Symbol Policy::decide(History history) const {
  const Symbol b = decide_(history);
  if (b >= domain_) throw InvalidInput("policy returned a prediction outside its domain");
  return b;
}

std::unique_ptr<PolicyCursor> Policy::cursor() const {
  if (minimizer_) return std::make_unique<MinimizerCursor>(minimizer_->dist.cursor(), minimizer_->loss);
  return std::make_unique<HistoryPolicyCursor>(*this);
}

Policy optimal_policy(const SequentialDistribution& dist, const LossFunction& loss) {
  return Policy::minimizer(dist, loss, "optimal(" + std::string(to_string(dist.tag())) + ")");
}

Policy mismatched_policy(const SequentialDistribution& q, const LossFunction& loss) {
  return Policy::minimizer(q, loss, "mismatched(" + std::string(to_string(q.tag())) + ")");
}

SequentialDistribution q_from_policy_classification(const Policy& policy, double q, double r,
                                                    Alphabet alphabet, std::size_t horizon) {
  const double others = static_cast<double>(alphabet.size() - 1);
  if (!(q > 0.0 && q < 1.0 && r > 0.0 && r < 1.0)) throw InvalidInput("q and r must lie in (0, 1)");
  if (std::abs(q + r - 1.0) > kRenormalizeTolerance) throw InvalidInput("q + r must equal 1");
  if (!(q > r / others)) throw InvalidInput("q must exceed r/(S-1)");
  if (policy.prediction_domain() != alphabet.size()) {
    throw InvalidInput("policy domain must equal the alphabet for classification");
  }
  const std::size_t size = alphabet.size();
  const double rest = r / others;
  return make_kernel_distribution(alphabet, horizon, DistributionTag::policy_representation,
                                  [policy, q, rest, size](History history) {
                                    std::vector<double> probs(size, rest);
                                    probs[policy.decide(history)] = q;
                                    return Pmf(std::move(probs));
                                  });
}

bool verify_policy_representation(const SequentialDistribution& q, const Policy& policy,
                                  const LossFunction& loss, std::size_t max_depth, TieRule rule) {
  if (max_depth >= q.horizon()) throw InvalidInput("max_depth must be below the horizon");
  const std::size_t s = q.alphabet().size();
  std::uint64_t total = 0;
  std::uint64_t level = 1;
  for (std::size_t depth = 0; depth <= max_depth; ++depth) {
    total += level;
    if (total > kRepresentationHistoryCap) {
      throw CapacityError("representation check would visit more than " +
                          std::to_string(kRepresentationHistoryCap) + " histories");
    }
    level *= s;
  }

  level = 1;
  for (std::size_t depth = 0; depth <= max_depth; ++depth, level *= s) {
    for (std::uint64_t idx = 0; idx < level; ++idx) {
      const Sequence history = sequence_at(s, depth, idx);
      const Pmf kernel = kernel_eval(q, history);
      const Symbol decision = policy.decide(history);
      if (rule == TieRule::smallest_index) {
        if (decision != minimize_expected_loss(kernel, loss)) return false;
        continue;
      }
      double best = std::numeric_limits<double>::infinity();
      for (Symbol b = 0; b < loss.predictions(); ++b) best = std::min(best, loss.expected(b, kernel));
      if (loss.expected(decision, kernel) > best + kOptimalityTolerance) return false;
    }
  }
  return true;
}

std::size_t cross_entropy_argmin_check(const Pmf& p, const std::vector<Pmf>& candidates) {
  if (candidates.empty()) throw InvalidInput("no candidates supplied");
  std::size_t best = candidates.size();
  double best_value = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const Pmf& b = candidates[i];
    if (b.size() != p.size()) throw InvalidInput("candidate size differs from p");
    double ce = 0.0;
    for (Symbol z = 0; z < p.size(); ++z) {
      if (p[z] == 0.0) continue;
      if (b[z] == 0.0) {
        ce = std::numeric_limits<double>::infinity();
        break;
      }
      ce -= p[z] * std::log(b[z]);
    }
    if (ce < best_value) {
      best_value = ce;
      best = i;
    }
  }
  if (best == candidates.size()) throw DegenerateInput("every candidate has infinite cross-entropy");
  return best;
}

}  // namespace seqregret
