#include "seqregret/impossibility.hpp"

#include <cmath>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "seqregret/parallel.hpp"
#include "seqregret/regret.hpp"

namespace seqregret {

namespace {

constexpr Symbol kSignal = 0;
constexpr Symbol kLocked = 2;
constexpr double kPsiChoice = 0.125;

Pmf surrogate_marginal(double phi, double psi) { return Pmf({phi, 1.0 - phi - psi, psi}); }

class ImpossibilityProcess final : public KernelModel {
 public:
  explicit ImpossibilityProcess(Pmf marginal) : marginal_(std::move(marginal)) {}

  Pmf kernel(History history) const override {
    if (!history.empty() && history.front() == kSignal) return Pmf::dirac(3, kLocked);
    return marginal_;
  }

  std::unique_ptr<KernelCursor> cursor() const override {
    class Cursor final : public KernelCursor {
     public:
      explicit Cursor(Pmf marginal) : marginal_(std::move(marginal)) {}
      Pmf current() const override { return locked_ ? Pmf::dirac(3, kLocked) : marginal_; }
      void advance(Symbol z) override {
        if (first_) locked_ = z == kSignal;
        first_ = false;
      }

     private:
      Pmf marginal_;
      bool first_ = true;
      bool locked_ = false;
    };
    return std::make_unique<Cursor>(marginal_);
  }

 private:
  Pmf marginal_;
};

void check_parameters(double phi, double psi) {
  if (!(phi > 0.0 && phi < 0.5)) throw InvalidInput("phi must lie in (0, 1/2)");
  if (!(psi > 0.0 && psi < 0.5 - phi)) throw InvalidInput("psi must lie in (0, 1/2 - phi)");
}

double fraction_high(std::uint64_t horizon) {
  return static_cast<double>(horizon - 1) / static_cast<double>(horizon);
}

}  // namespace

ImpossibilityInstance build_instance(double phi, double psi, std::size_t horizon) {
  check_parameters(phi, psi);
  if (horizon < 1) throw InvalidInput("horizon must be at least 1");
  const Pmf marginal = surrogate_marginal(phi, psi);
  SequentialDistribution q = make_product(marginal, horizon, DistributionTag::impossibility_q);
  SequentialDistribution p(Alphabet(3), horizon, DistributionTag::impossibility_p,
                           std::make_shared<ImpossibilityProcess>(marginal));
  return ImpossibilityInstance{phi, psi, horizon, std::move(p), std::move(q)};
}

double closed_form_vt(double phi, double psi, std::size_t horizon) {
  if (horizon < 1) throw InvalidInput("horizon must be at least 1");
  return fraction_high(horizon) * phi * (1.0 - psi);
}

double closed_form_kl(double phi, double psi, std::size_t horizon) {
  if (horizon < 1) throw InvalidInput("horizon must be at least 1");
  return static_cast<double>(horizon - 1) * phi * std::log(1.0 / psi);
}

double regret_closed_form(Symbol z1, std::size_t horizon) {
  if (z1 > 2) throw InvalidInput("z1 must be 0, 1 or 2");
  if (horizon < 1) throw InvalidInput("horizon must be at least 1");
  return z1 == kSignal ? fraction_high(horizon) : 0.0;
}

double lower_bound_tv(double c, double alpha, double v_expected, double delta, double eps) {
  return c * v_expected / std::pow(delta, alpha) + eps;
}

double lower_bound_kl(double c, double beta, double kl, std::size_t horizon, double delta, double eps) {
  return c * std::sqrt(kl / static_cast<double>(horizon)) / std::pow(delta, beta) + eps;
}

double rewritten_r1(double c, double alpha, std::uint64_t horizon, double delta, double eps) {
  return c * (7.0 / 8.0) * fraction_high(horizon) * std::pow(delta, 1.0 - alpha) + eps;
}

double rewritten_r2(double c, double beta, std::uint64_t horizon, double delta, double eps) {
  return c * std::sqrt(fraction_high(horizon) * std::log(8.0)) * std::pow(delta, 0.5 - beta) + eps;
}

Theorem6Witness choose_parameters(double c, double alpha, double beta, EpsilonFn epsilon,
                                  const ParameterSearchLimits& limits) {
  if (!(c > 0.0) || !std::isfinite(c)) throw InvalidInput("C must be positive");
  if (!(alpha >= 0.0 && alpha < 1.0)) throw InvalidInput("alpha must lie in [0, 1)");
  if (!(beta >= 0.0 && beta < 0.5)) throw InvalidInput("beta must lie in [0, 1/2)");
  if (!epsilon) throw InvalidInput("epsilon function required");

  Theorem6Witness w;
  w.c = c;
  w.alpha = alpha;
  w.beta = beta;
  w.epsilon = std::move(epsilon);
  w.psi = kPsiChoice;

  std::uint64_t previous_horizon = 0;
  for (std::uint64_t n = 1; n <= limits.max_n; ++n) {
    const double delta = 1.0 / static_cast<double>(n + 3);
    const double target = 1.0 / static_cast<double>(n);
    std::uint64_t horizon = n == 1 ? 1 : previous_horizon + 1;
    double eps = w.epsilon(horizon, delta);
    while (!(eps < target)) {
      if (++horizon > limits.max_horizon) {
        std::ostringstream msg;
        msg << "T_n search exceeded " << limits.max_horizon << " at n=" << n << " (delta_n=" << delta
            << ", eps=" << eps << ", needed < " << target << ")";
        throw CapacityError(msg.str());
      }
      eps = w.epsilon(horizon, delta);
    }
    previous_horizon = horizon;

    w.n = n;
    w.delta = delta;
    w.horizon = horizon;
    w.epsilon_value = eps;
    w.r1 = rewritten_r1(c, alpha, horizon, delta, eps);
    w.r2 = rewritten_r2(c, beta, horizon, delta, eps);
    if (w.r1 < w.high_regret() && w.r2 < w.high_regret()) return w;
  }
  std::ostringstream msg;
  msg << "no admissible n up to " << limits.max_n << "; last state n=" << w.n << " T_n=" << w.horizon
      << " R1=" << w.r1 << " R2=" << w.r2 << " (T_n-1)/T_n=" << w.high_regret();
  throw CapacityError(msg.str());
}

Theorem6Report verify_theorem6(const Theorem6Witness& witness, std::size_t episodes, std::uint64_t seed,
                               std::size_t workers) {
  if (witness.n < 1 || witness.horizon < 1) throw VerificationError("witness was not produced by a search");
  if (std::abs(witness.delta - 1.0 / static_cast<double>(witness.n + 3)) > 1e-15) {
    throw VerificationError("witness delta is not 1/(n+3)");
  }
  const double high = witness.high_regret();
  if (!(witness.r1 < high) || !(witness.r2 < high)) {
    std::ostringstream msg;
    msg << "witness violates R1, R2 < (T_n-1)/T_n: R1=" << witness.r1 << " R2=" << witness.r2
        << " bound=" << high;
    throw VerificationError(msg.str());
  }
  const auto instance = build_instance(witness.delta, witness.psi, witness.horizon);

  Theorem6Report report;
  // Delta is a function of Z_1 alone, so the exact tail probability is a
  // sum over the first-round marginal.
  const Pmf first = kernel_eval(instance.p, {});
  for (Symbol z1 = 0; z1 < 3; ++z1) {
    const double delta_value = regret_closed_form(z1, witness.horizon);
    if (delta_value >= witness.r1) report.exact_probability_r1 += first[z1];
    if (delta_value >= witness.r2) report.exact_probability_r2 += first[z1];
  }
  report.holds = report.exact_probability_r1 >= witness.delta && report.exact_probability_r2 >= witness.delta;

  report.episodes = episodes;
  if (episodes > 0) {
    const LossFunction loss = LossFunction::classification(Alphabet(3));
    const Policy learner = mismatched_policy(instance.q, loss);
    const Policy optimal = optimal_policy(instance.p, loss);
    std::vector<double> averages(episodes);
    parallel_for(episodes, workers, [&](std::size_t i) {
      averages[i] = run_episode(instance.p, learner, optimal, loss, episode_seed(seed, i)).average;
    });
    std::size_t hits1 = 0;
    std::size_t hits2 = 0;
    for (double a : averages) {
      hits1 += a >= witness.r1;
      hits2 += a >= witness.r2;
    }
    const double n = static_cast<double>(episodes);
    report.simulated_r1 = static_cast<double>(hits1) / n;
    report.simulated_r2 = static_cast<double>(hits2) / n;
    report.sigma = std::sqrt(witness.delta * (1.0 - witness.delta) / n);
    report.within_three_sigma = std::abs(report.simulated_r1 - witness.delta) <= 3.0 * report.sigma &&
                                std::abs(report.simulated_r2 - witness.delta) <= 3.0 * report.sigma;
  }
  return report;
}

}  // namespace seqregret
