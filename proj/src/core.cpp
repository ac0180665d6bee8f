#include "seqregret/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>

namespace seqregret {

Alphabet::Alphabet(std::size_t size) : size_(size) {
  if (size < 2) throw InvalidInput("alphabet size must be at least 2, got " + std::to_string(size));
}

Pmf::Pmf(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw InvalidInput("pmf must have at least one entry");
  double sum = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw InvalidInput("pmf entries must be finite and nonnegative");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kRenormalizeTolerance) {
    throw InvalidInput("pmf entries sum to " + std::to_string(sum));
  }
  if (std::abs(sum - 1.0) > kPmfTolerance) {
    for (double& p : probs_) p /= sum;
  }
}

Pmf Pmf::uniform(std::size_t size) {
  return Pmf(std::vector<double>(size, 1.0 / static_cast<double>(size)));
}

Pmf Pmf::dirac(std::size_t size, Symbol at) {
  if (at >= size) throw InvalidInput("dirac location outside the support");
  std::vector<double> probs(size, 0.0);
  probs[at] = 1.0;
  return Pmf(std::move(probs));
}

Symbol Pmf::mode() const {
  return static_cast<Symbol>(std::max_element(probs_.begin(), probs_.end()) - probs_.begin());
}

LossFunction::LossFunction(Kind kind, std::size_t predictions, std::size_t outcomes,
                           double bound, std::vector<double> table)
    : kind_(kind),
      predictions_(predictions),
      outcomes_(outcomes),
      bound_(bound),
      table_(std::move(table)) {}

LossFunction LossFunction::classification(Alphabet alphabet) {
  return LossFunction(Kind::classification, alphabet.size(), alphabet.size(), 1.0, {});
}

LossFunction LossFunction::table(std::vector<std::vector<double>> rows, double bound) {
  if (!(bound >= 0.0) || !std::isfinite(bound)) throw InvalidInput("loss bound must be finite and >= 0");
  if (rows.empty() || rows.front().empty()) throw InvalidInput("loss table must be nonempty");
  const std::size_t outcomes = rows.front().size();
  std::vector<double> flat;
  flat.reserve(rows.size() * outcomes);
  for (const auto& row : rows) {
    if (row.size() != outcomes) throw InvalidInput("loss table rows differ in length");
    for (double v : row) {
      if (!(v >= 0.0 && v <= bound)) throw InvalidInput("loss table entry outside [0, L]");
      flat.push_back(v);
    }
  }
  return LossFunction(Kind::bounded_table, rows.size(), outcomes, bound, std::move(flat));
}

double LossFunction::operator()(Symbol prediction, Symbol outcome) const {
  if (kind_ == Kind::classification) return prediction == outcome ? 0.0 : 1.0;
  return table_[prediction * outcomes_ + outcome];
}

double LossFunction::expected(Symbol prediction, const Pmf& p) const {
  if (kind_ == Kind::classification) return 1.0 - p[prediction];
  double acc = 0.0;
  for (Symbol z = 0; z < outcomes_; ++z) acc += p[z] * table_[prediction * outcomes_ + z];
  return acc;
}

std::string_view to_string(DistributionTag tag) {
  switch (tag) {
    case DistributionTag::product: return "product";
    case DistributionTag::markov_memory: return "markov-memory";
    case DistributionTag::impossibility_p: return "impossibility-P";
    case DistributionTag::impossibility_q: return "impossibility-Q";
    case DistributionTag::tabular: return "tabular";
    case DistributionTag::mixture: return "mixture";
    case DistributionTag::policy_representation: return "policy-representation";
  }
  return "unknown";
}

namespace {

class ReplayCursor final : public KernelCursor {
 public:
  explicit ReplayCursor(const KernelModel& model) : model_(model) {}
  Pmf current() const override { return model_.kernel(prefix_); }
  void advance(Symbol z) override { prefix_.push_back(z); }

 private:
  const KernelModel& model_;
  Sequence prefix_;
};

}  // namespace

std::unique_ptr<KernelCursor> KernelModel::cursor() const {
  return std::make_unique<ReplayCursor>(*this);
}

SequentialDistribution::SequentialDistribution(Alphabet alphabet, std::size_t horizon,
                                               DistributionTag tag,
                                               std::shared_ptr<const KernelModel> model)
    : alphabet_(alphabet), horizon_(horizon), tag_(tag), model_(std::move(model)) {
  if (horizon_ < 1) throw InvalidInput("horizon must be at least 1");
  if (!model_) throw InvalidInput("distribution requires a kernel model");
}

namespace {

void check_history(const SequentialDistribution& dist, History history, std::size_t max_len) {
  if (history.size() > max_len) {
    throw InvalidInput("history of length " + std::to_string(history.size()) +
                       " exceeds the allowed " + std::to_string(max_len));
  }
  for (Symbol s : history) {
    if (!dist.alphabet().contains(s)) throw InvalidInput("symbol " + std::to_string(s) + " outside the alphabet");
  }
}

}  // namespace

Pmf kernel_eval(const SequentialDistribution& dist, History history) {
  check_history(dist, history, dist.horizon() - 1);
  Pmf p = dist.model().kernel(history);
  if (p.size() != dist.alphabet().size()) throw InvalidInput("kernel returned a pmf of the wrong size");
  return p;
}

double sequence_prob(const SequentialDistribution& dist, History seq) {
  if (seq.size() != dist.horizon()) throw InvalidInput("sequence length must equal the horizon");
  check_history(dist, seq, dist.horizon());
  double prob = 1.0;
  auto cursor = dist.cursor();
  for (Symbol z : seq) {
    prob *= cursor->current()[z];
    if (prob == 0.0) return 0.0;
    cursor->advance(z);
  }
  return prob;
}

double sequence_log_prob(const SequentialDistribution& dist, History seq) {
  if (seq.size() != dist.horizon()) throw InvalidInput("sequence length must equal the horizon");
  check_history(dist, seq, dist.horizon());
  double log_prob = 0.0;
  auto cursor = dist.cursor();
  for (Symbol z : seq) {
    const double p = cursor->current()[z];
    if (p == 0.0) return -std::numeric_limits<double>::infinity();
    log_prob += std::log(p);
    cursor->advance(z);
  }
  return log_prob;
}

Symbol sample_symbol(const Pmf& p, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  Symbol last_positive = 0;
  for (Symbol s = 0; s < p.size(); ++s) {
    if (p[s] > 0.0) last_positive = s;
    acc += p[s];
    if (u < acc && p[s] > 0.0) return s;
  }
  // Rounding left u above the accumulated mass.
  return last_positive;
}

Sequence sample_sequence(const SequentialDistribution& dist, Rng& rng) {
  Sequence seq;
  seq.reserve(dist.horizon());
  auto cursor = dist.cursor();
  for (std::size_t t = 0; t < dist.horizon(); ++t) {
    const Symbol z = sample_symbol(cursor->current(), rng);
    seq.push_back(z);
    cursor->advance(z);
  }
  return seq;
}

Sequence sample_sequence(const SequentialDistribution& dist, std::uint64_t seed) {
  Rng rng(seed);
  return sample_sequence(dist, rng);
}

namespace {

class ProductModel final : public KernelModel {
 public:
  explicit ProductModel(Pmf marginal) : marginal_(std::move(marginal)) {}
  Pmf kernel(History) const override { return marginal_; }

 private:
  Pmf marginal_;
};

class TabularModel final : public KernelModel {
 public:
  TabularModel(std::size_t alphabet_size, std::size_t horizon, std::vector<double> joint)
      : alphabet_size_(alphabet_size), prefix_(horizon + 1) {
    prefix_[horizon] = std::move(joint);
    for (std::size_t k = horizon; k-- > 0;) {
      const auto& next = prefix_[k + 1];
      auto& level = prefix_[k];
      level.assign(next.size() / alphabet_size_, 0.0);
      for (std::size_t i = 0; i < next.size(); ++i) level[i / alphabet_size_] += next[i];
    }
  }

  Pmf kernel(History history) const override {
    const std::uint64_t idx = sequence_index(alphabet_size_, history);
    const double base = prefix_[history.size()][idx];
    if (base <= 0.0) return Pmf::uniform(alphabet_size_);
    const auto& next = prefix_[history.size() + 1];
    std::vector<double> probs(alphabet_size_);
    double sum = 0.0;
    for (std::size_t z = 0; z < alphabet_size_; ++z) {
      probs[z] = next[idx * alphabet_size_ + z];
      sum += probs[z];
    }
    for (double& p : probs) p /= sum;
    return Pmf(std::move(probs));
  }

 private:
  std::size_t alphabet_size_;
  std::vector<std::vector<double>> prefix_;  // prefix_[k][i]: probability of the i-th length-k prefix
};

class FunctionModel final : public KernelModel {
 public:
  explicit FunctionModel(std::function<Pmf(History)> fn) : fn_(std::move(fn)) {}
  Pmf kernel(History history) const override { return fn_(history); }

 private:
  std::function<Pmf(History)> fn_;
};

}  // namespace

SequentialDistribution make_product(Pmf marginal, std::size_t horizon, DistributionTag tag) {
  Alphabet alphabet(marginal.size());
  return SequentialDistribution(alphabet, horizon, tag,
                                std::make_shared<ProductModel>(std::move(marginal)));
}

SequentialDistribution make_tabular(Alphabet alphabet, std::size_t horizon,
                                    std::vector<double> joint) {
  constexpr std::uint64_t kMaxTable = 10'000'000;
  const std::uint64_t count = sequence_count(alphabet, horizon);
  if (count > kMaxTable) throw CapacityError("tabular distribution would need " + std::to_string(count) + " entries");
  if (joint.size() != count) throw InvalidInput("joint table must have S^T entries");
  // Pmf's constructor performs the validation and renormalization.
  Pmf normalized(std::move(joint));
  std::vector<double> probs(normalized.probs().begin(), normalized.probs().end());
  return SequentialDistribution(alphabet, horizon, DistributionTag::tabular,
                                std::make_shared<TabularModel>(alphabet.size(), horizon, std::move(probs)));
}

SequentialDistribution make_kernel_distribution(Alphabet alphabet, std::size_t horizon,
                                                DistributionTag tag,
                                                std::function<Pmf(History)> kernel) {
  return SequentialDistribution(alphabet, horizon, tag, std::make_shared<FunctionModel>(std::move(kernel)));
}

std::uint64_t sequence_count(const Alphabet& alphabet, std::size_t horizon) noexcept {
  std::uint64_t count = 1;
  const std::uint64_t s = alphabet.size();
  for (std::size_t t = 0; t < horizon; ++t) {
    if (count > std::numeric_limits<std::uint64_t>::max() / s) return std::numeric_limits<std::uint64_t>::max();
    count *= s;
  }
  return count;
}

std::uint64_t sequence_index(std::size_t alphabet_size, History seq) noexcept {
  std::uint64_t idx = 0;
  for (Symbol s : seq) idx = idx * alphabet_size + s;
  return idx;
}

Sequence sequence_at(std::size_t alphabet_size, std::size_t length, std::uint64_t index) {
  Sequence seq(length);
  for (std::size_t i = length; i-- > 0;) {
    seq[i] = static_cast<Symbol>(index % alphabet_size);
    index /= alphabet_size;
  }
  return seq;
}

}  // namespace seqregret
