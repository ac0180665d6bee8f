#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "seqregret/core.hpp"

namespace seqregret {

// Variational distance sup_F |p(F) - q(F)|, i.e. half the L1 distance.
double tv_distance(const Pmf& p, const Pmf& q);

// KL(p || q) in nats. 0 ln(0/q) = 0; p ln(p/0) = +inf for p > 0.
double kl_divergence(const Pmf& p, const Pmf& q);

// Per-round distances between the two kernels along one path.
struct DivergenceTrace {
  std::vector<double> tv;  // v_t
  std::vector<double> kl;  // d_t
  double avg_tv = 0.0;     // hat V_T
  double avg_kl = 0.0;     // hat D_T
};

DivergenceTrace instantaneous_trace(const SequentialDistribution& p, const SequentialDistribution& q,
                                    History seq);

// Accumulates v_t and d_t one round at a time; used by the episode harness so
// the kernels are not recomputed.
class DivergenceAccumulator {
 public:
  explicit DivergenceAccumulator(std::size_t horizon);
  void add(const Pmf& p_kernel, const Pmf& q_kernel);
  DivergenceTrace finish() &&;

 private:
  DivergenceTrace trace_;
};

enum class EvalMode { exact, monte_carlo };

struct ExpectedDivergences {
  double v_expected = 0.0;  // V_T
  double d_expected = 0.0;  // D_T
  double joint_kl = 0.0;    // KL(P || Q), possibly +inf
  EvalMode mode = EvalMode::exact;
  // Standard errors of the three estimates (monte-carlo only).
  double v_stderr = 0.0;
  double d_stderr = 0.0;
  double kl_stderr = 0.0;
};

// Largest S^T that exact mode will enumerate.
inline constexpr std::uint64_t kExactEnumerationCap = 1'000'000;

struct EvalOptions {
  EvalMode mode = EvalMode::exact;
  std::size_t samples = 10'000;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

// Exact mode walks the prefix tree of P in lexicographic order, never
// descending into prefixes of P-probability zero. Monte Carlo averages
// instantaneous traces over sampled paths (stderr = sample sd / sqrt(n)).
ExpectedDivergences expected_quantities(const SequentialDistribution& p, const SequentialDistribution& q,
                                        const EvalOptions& options = {});

// KL(P || Q) from the joint sequence probabilities.
double joint_kl(const SequentialDistribution& p, const SequentialDistribution& q,
                const EvalOptions& options = {});

}  // namespace seqregret
