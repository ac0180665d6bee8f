#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "seqregret/errors.hpp"
#include "seqregret/rng.hpp"

namespace seqregret {

using Symbol = std::uint32_t;
using Sequence = std::vector<Symbol>;
using History = std::span<const Symbol>;

// Entries of a Pmf sum to one within this tolerance.
inline constexpr double kPmfTolerance = 1e-12;
// Inputs this close to normalized are rescaled on construction; worse is rejected.
inline constexpr double kRenormalizeTolerance = 1e-9;

class Alphabet {
 public:
  explicit Alphabet(std::size_t size);

  std::size_t size() const noexcept { return size_; }
  bool contains(Symbol s) const noexcept { return s < size_; }

  friend bool operator==(const Alphabet&, const Alphabet&) = default;

 private:
  std::size_t size_;
};

class Pmf {
 public:
  // Throws InvalidInput on negative entries or a sum further than
  // kRenormalizeTolerance from one.
  explicit Pmf(std::vector<double> probs);

  static Pmf uniform(std::size_t size);
  static Pmf dirac(std::size_t size, Symbol at);

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](Symbol s) const { return probs_[s]; }
  std::span<const double> probs() const noexcept { return probs_; }

  // Smallest index among the largest entries.
  Symbol mode() const;

  friend bool operator==(const Pmf&, const Pmf&) = default;

 private:
  std::vector<double> probs_;
};

// Bounded loss l: B x Z -> [0, L].
class LossFunction {
 public:
  enum class Kind { classification, bounded_table };

  // l(b, z) = 1 iff b != z, with B = Z.
  static LossFunction classification(Alphabet alphabet);
  // rows[b][z]; every entry must lie in [0, bound].
  static LossFunction table(std::vector<std::vector<double>> rows, double bound);

  Kind kind() const noexcept { return kind_; }
  double bound() const noexcept { return bound_; }
  std::size_t predictions() const noexcept { return predictions_; }
  std::size_t outcomes() const noexcept { return outcomes_; }

  double operator()(Symbol prediction, Symbol outcome) const;

  // E_{z ~ p} l(prediction, z).
  double expected(Symbol prediction, const Pmf& p) const;

 private:
  LossFunction(Kind kind, std::size_t predictions, std::size_t outcomes, double bound,
               std::vector<double> table);

  Kind kind_;
  std::size_t predictions_;
  std::size_t outcomes_;
  double bound_;
  std::vector<double> table_;  // row-major predictions x outcomes; empty for classification
};

enum class DistributionTag {
  product,
  markov_memory,
  impossibility_p,
  impossibility_q,
  tabular,
  mixture,
  policy_representation,
};

std::string_view to_string(DistributionTag tag);

// Incremental view of a kernel along one path: current() is the kernel for
// the symbols pushed so far.
class KernelCursor {
 public:
  virtual ~KernelCursor() = default;
  virtual Pmf current() const = 0;
  virtual void advance(Symbol z) = 0;
};

// The per-step Markov kernels of a process. Implementations are immutable.
class KernelModel {
 public:
  virtual ~KernelModel() = default;

  virtual Pmf kernel(History history) const = 0;

  // Default implementation replays kernel() on the accumulated prefix.
  virtual std::unique_ptr<KernelCursor> cursor() const;
};

// A horizon-T process over a finite alphabet, given by its kernels. Copies
// share the same immutable model.
class SequentialDistribution {
 public:
  SequentialDistribution(Alphabet alphabet, std::size_t horizon, DistributionTag tag,
                         std::shared_ptr<const KernelModel> model);

  const Alphabet& alphabet() const noexcept { return alphabet_; }
  std::size_t horizon() const noexcept { return horizon_; }
  DistributionTag tag() const noexcept { return tag_; }
  const KernelModel& model() const noexcept { return *model_; }

  std::unique_ptr<KernelCursor> cursor() const { return model_->cursor(); }

 private:
  Alphabet alphabet_;
  std::size_t horizon_;
  DistributionTag tag_;
  std::shared_ptr<const KernelModel> model_;
};

// Kernel for the given history, with argument checks. The empty history
// yields the first-round marginal.
Pmf kernel_eval(const SequentialDistribution& dist, History history);

// Chain-rule probability of a full-length sequence.
double sequence_prob(const SequentialDistribution& dist, History seq);

// Natural log of sequence_prob; -inf for impossible sequences.
double sequence_log_prob(const SequentialDistribution& dist, History seq);

Symbol sample_symbol(const Pmf& p, Rng& rng);

Sequence sample_sequence(const SequentialDistribution& dist, std::uint64_t seed);
Sequence sample_sequence(const SequentialDistribution& dist, Rng& rng);

// i.i.d. draws from `marginal`.
SequentialDistribution make_product(Pmf marginal, std::size_t horizon,
                                    DistributionTag tag = DistributionTag::product);

// Explicit joint table over all S^T sequences in lexicographic order (first
// symbol most significant). Histories of probability zero get the uniform
// kernel.
SequentialDistribution make_tabular(Alphabet alphabet, std::size_t horizon,
                                    std::vector<double> joint);

SequentialDistribution make_kernel_distribution(Alphabet alphabet, std::size_t horizon,
                                                DistributionTag tag,
                                                std::function<Pmf(History)> kernel);

// S^T, saturating at UINT64_MAX.
std::uint64_t sequence_count(const Alphabet& alphabet, std::size_t horizon) noexcept;

// Lexicographic index of a sequence (first symbol most significant).
std::uint64_t sequence_index(std::size_t alphabet_size, History seq) noexcept;

// Inverse of sequence_index for a fixed length.
Sequence sequence_at(std::size_t alphabet_size, std::size_t length, std::uint64_t index);

}  // namespace seqregret
