#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "seqregret/core.hpp"

namespace seqregret {

// Incremental decisions along one path.
class PolicyCursor {
 public:
  virtual ~PolicyCursor() = default;
  virtual Symbol decide() const = 0;
  virtual void advance(Symbol z) = 0;
};

// A deterministic learner's policy: history -> prediction in B.
class Policy {
 public:
  using DecideFn = std::function<Symbol(History)>;

  Policy(DecideFn decide, std::size_t prediction_domain, std::string description);

  // Decisions that minimize expected loss under `dist`'s kernels.
  static Policy minimizer(SequentialDistribution dist, LossFunction loss, std::string description);

  Symbol decide(History history) const;
  std::size_t prediction_domain() const noexcept { return domain_; }
  const std::string& description() const noexcept { return description_; }

  // Distribution whose kernels drive the decisions, if any.
  const std::optional<SequentialDistribution>& backing() const noexcept { return backing_; }

  std::unique_ptr<PolicyCursor> cursor() const;

 private:
  struct Minimizer {
    SequentialDistribution dist;
    LossFunction loss;
  };

  DecideFn decide_;
  std::size_t domain_;
  std::string description_;
  std::optional<SequentialDistribution> backing_;
  std::shared_ptr<const Minimizer> minimizer_;
};

// argmin_b E_p l(b, Z), ties broken toward the smallest index.
Symbol minimize_expected_loss(const Pmf& p, const LossFunction& loss);

// Bayes-optimal policy for the true process: minimizes expected loss under
// each kernel.
Policy optimal_policy(const SequentialDistribution& dist, const LossFunction& loss);

// Same construction driven by a surrogate Q.
Policy mismatched_policy(const SequentialDistribution& q, const LossFunction& loss);

// Q whose kernel puts mass q on the policy's decision and r/(S-1) on every
// other symbol. Requires q, r in (0,1), q + r = 1 and q > r/(S-1).
SequentialDistribution q_from_policy_classification(const Policy& policy, double q, double r,
                                                    Alphabet alphabet, std::size_t horizon);

enum class TieRule {
  any_minimizer,   // the decision only has to attain the minimum
  smallest_index,  // the decision must equal the smallest minimizer
};

inline constexpr std::uint64_t kRepresentationHistoryCap = 100'000;

// Checks, for every history of length 0..max_depth, that the policy's
// decision minimizes the Q-expected loss (within 1e-12).
bool verify_policy_representation(const SequentialDistribution& q, const Policy& policy,
                                  const LossFunction& loss, std::size_t max_depth,
                                  TieRule rule = TieRule::any_minimizer);

// Index of the candidate minimizing the cross-entropy -sum_z p(z) ln b(z).
// Ties go to the smallest index.
std::size_t cross_entropy_argmin_check(const Pmf& p, const std::vector<Pmf>& candidates);

}  // namespace seqregret
