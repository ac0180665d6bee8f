#include "seqregret/divergences.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "seqregret/parallel.hpp"

namespace seqregret {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_same_size(const Pmf& p, const Pmf& q) {
  if (p.size() != q.size()) {
    throw InvalidInput("pmf sizes differ: " + std::to_string(p.size()) + " vs " + std::to_string(q.size()));
  }
}

void require_compatible(const SequentialDistribution& p, const SequentialDistribution& q) {
  if (p.alphabet() != q.alphabet()) throw InvalidInput("distributions have different alphabets");
  if (p.horizon() != q.horizon()) throw InvalidInput("distributions have different horizons");
}

void require_enumerable(const SequentialDistribution& p) {
  const std::uint64_t count = sequence_count(p.alphabet(), p.horizon());
  if (count > kExactEnumerationCap) {
    throw CapacityError("exact mode would enumerate " + std::to_string(count) +
                        " sequences (cap " + std::to_string(kExactEnumerationCap) +
                        "); use monte-carlo mode");
  }
}

struct Moments {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t n = 0;
  void add(double x) {
    sum += x;
    sum_sq += x * x;
    ++n;
  }
  double mean() const { return sum / static_cast<double>(n); }
  double stderr_of_mean() const {
    if (n < 2) return 0.0;
    const double m = mean();
    if (!std::isfinite(m)) return kInf;
    const double var = (sum_sq - static_cast<double>(n) * m * m) / static_cast<double>(n - 1);
    return std::sqrt(std::max(var, 0.0) / static_cast<double>(n));
  }
};

// Depth-first walk over P's prefix tree accumulating the P-weighted sums of
// v_t and d_t.
struct PrefixWalk {
  const KernelModel& p;
  const KernelModel& q;
  std::size_t horizon;
  std::size_t alphabet_size;
  Sequence prefix;
  double tv_sum = 0.0;
  double kl_sum = 0.0;

  void visit(double weight) {
    const Pmf pk = p.kernel(prefix);
    const Pmf qk = q.kernel(prefix);
    tv_sum += weight * tv_distance(pk, qk);
    const double d = kl_divergence(pk, qk);
    kl_sum += d == kInf ? kInf : weight * d;
    if (prefix.size() + 1 == horizon) return;
    for (Symbol z = 0; z < alphabet_size; ++z) {
      if (pk[z] == 0.0) continue;
      prefix.push_back(z);
      visit(weight * pk[z]);
      prefix.pop_back();
    }
  }
};

struct PathSample {
  double avg_tv = 0.0;
  double avg_kl = 0.0;
  double log_ratio = 0.0;
};

PathSample sample_path(const SequentialDistribution& p, const SequentialDistribution& q, Rng& rng) {
  auto pc = p.cursor();
  auto qc = q.cursor();
  DivergenceAccumulator acc(p.horizon());
  PathSample out;
  for (std::size_t t = 0; t < p.horizon(); ++t) {
    const Pmf pk = pc->current();
    const Pmf qk = qc->current();
    acc.add(pk, qk);
    const Symbol z = sample_symbol(pk, rng);
    out.log_ratio += qk[z] == 0.0 ? kInf : std::log(pk[z]) - std::log(qk[z]);
    pc->advance(z);
    qc->advance(z);
  }
  const DivergenceTrace trace = std::move(acc).finish();
  out.avg_tv = trace.avg_tv;
  out.avg_kl = trace.avg_kl;
  return out;
}

std::vector<PathSample> sample_paths(const SequentialDistribution& p, const SequentialDistribution& q,
                                     const EvalOptions& options) {
  if (options.samples < 1) throw InvalidInput("monte-carlo mode needs at least one sample");
  std::vector<PathSample> paths(options.samples);
  parallel_for(options.samples, options.workers, [&](std::size_t i) {
    Rng rng(derive_seed(options.seed, i));
    paths[i] = sample_path(p, q, rng);
  });
  return paths;
}

double exact_joint_kl(const SequentialDistribution& p, const SequentialDistribution& q) {
  const std::uint64_t count = sequence_count(p.alphabet(), p.horizon());
  double kl = 0.0;
  for (std::uint64_t idx = 0; idx < count; ++idx) {
    const Sequence seq = sequence_at(p.alphabet().size(), p.horizon(), idx);
    const double pp = sequence_prob(p, seq);
    if (pp == 0.0) continue;
    const double qq = sequence_prob(q, seq);
    if (qq == 0.0) return kInf;
    kl += pp * std::log(pp / qq);
  }
  return kl;
}

}  // namespace

double tv_distance(const Pmf& p, const Pmf& q) {
  require_same_size(p, q);
  double l1 = 0.0;
  for (Symbol s = 0; s < p.size(); ++s) l1 += std::abs(p[s] - q[s]);
  return std::min(1.0, 0.5 * l1);
}

double kl_divergence(const Pmf& p, const Pmf& q) {
  require_same_size(p, q);
  double kl = 0.0;
  for (Symbol s = 0; s < p.size(); ++s) {
    if (p[s] == 0.0) continue;
    if (q[s] == 0.0) return kInf;
    kl += p[s] * std::log(p[s] / q[s]);
  }
  // Rounding can leave a tiny negative value when p and q nearly agree.
  return std::max(kl, 0.0);
}

DivergenceAccumulator::DivergenceAccumulator(std::size_t horizon) {
  trace_.tv.reserve(horizon);
  trace_.kl.reserve(horizon);
}

void DivergenceAccumulator::add(const Pmf& p_kernel, const Pmf& q_kernel) {
  trace_.tv.push_back(tv_distance(p_kernel, q_kernel));
  trace_.kl.push_back(kl_divergence(p_kernel, q_kernel));
}

DivergenceTrace DivergenceAccumulator::finish() && {
  const double n = static_cast<double>(trace_.tv.size());
  double tv = 0.0;
  double kl = 0.0;
  for (double v : trace_.tv) tv += v;
  for (double d : trace_.kl) kl += d;
  trace_.avg_tv = n > 0 ? tv / n : 0.0;
  trace_.avg_kl = n > 0 ? kl / n : 0.0;
  return std::move(trace_);
}

DivergenceTrace instantaneous_trace(const SequentialDistribution& p, const SequentialDistribution& q,
                                    History seq) {
  require_compatible(p, q);
  if (seq.size() != p.horizon()) throw InvalidInput("sequence length must equal the horizon");
  for (Symbol s : seq) {
    if (!p.alphabet().contains(s)) throw InvalidInput("symbol outside the alphabet");
  }
  auto pc = p.cursor();
  auto qc = q.cursor();
  DivergenceAccumulator acc(p.horizon());
  for (Symbol z : seq) {
    acc.add(pc->current(), qc->current());
    pc->advance(z);
    qc->advance(z);
  }
  return std::move(acc).finish();
}

ExpectedDivergences expected_quantities(const SequentialDistribution& p, const SequentialDistribution& q,
                                        const EvalOptions& options) {
  require_compatible(p, q);
  ExpectedDivergences out;
  out.mode = options.mode;
  const double horizon = static_cast<double>(p.horizon());

  if (options.mode == EvalMode::exact) {
    require_enumerable(p);
    PrefixWalk walk{p.model(), q.model(), p.horizon(), p.alphabet().size(), {}};
    walk.prefix.reserve(p.horizon());
    walk.visit(1.0);
    out.v_expected = std::min(1.0, walk.tv_sum / horizon);
    out.d_expected = walk.kl_sum / horizon;
    out.joint_kl = exact_joint_kl(p, q);
    return out;
  }

  const auto paths = sample_paths(p, q, options);
  Moments tv, kl, ratio;
  for (const auto& path : paths) {
    tv.add(path.avg_tv);
    kl.add(path.avg_kl);
    ratio.add(path.log_ratio);
  }
  out.v_expected = tv.mean();
  out.d_expected = kl.mean();
  out.joint_kl = ratio.mean();
  out.v_stderr = tv.stderr_of_mean();
  out.d_stderr = kl.stderr_of_mean();
  out.kl_stderr = ratio.stderr_of_mean();
  return out;
}

double joint_kl(const SequentialDistribution& p, const SequentialDistribution& q, const EvalOptions& options) {
  require_compatible(p, q);
  if (options.mode == EvalMode::exact) {
    require_enumerable(p);
    return exact_joint_kl(p, q);
  }
  const auto paths = sample_paths(p, q, options);
  Moments ratio;
  for (const auto& path : paths) ratio.add(path.log_ratio);
  return ratio.mean();
}

}  // namespace seqregret
