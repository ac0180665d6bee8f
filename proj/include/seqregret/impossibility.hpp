#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>

#include "seqregret/core.hpp"
#include "seqregret/predictors.hpp"

namespace seqregret {

// The three-symbol construction showing that the 1/delta and 1/sqrt(delta)
// factors of the high-probability bounds cannot be improved.
//
// Q is i.i.d. with marginal (phi, 1 - phi - psi, psi). P agrees with Q at
// t = 1; afterwards it emits 2 forever if Z_1 = 0 and follows Q otherwise.
// Because phi + psi < 1/2 the Q-learner always predicts 1, while the
// P-optimal predictor switches to 2 once Z_1 = 0 has been seen.
struct ImpossibilityInstance {
  double phi;
  double psi;
  std::size_t horizon;
  SequentialDistribution p;
  SequentialDistribution q;
};

// Requires phi in (0, 1/2) and psi in (0, 1/2 - phi).
ImpossibilityInstance build_instance(double phi, double psi, std::size_t horizon);

// ((T-1)/T) phi (1 - psi)
double closed_form_vt(double phi, double psi, std::size_t horizon);
// (T-1) phi ln(1/psi)
double closed_form_kl(double phi, double psi, std::size_t horizon);
// Average regret given the first symbol: (T-1)/T if z1 = 0, else 0.
double regret_closed_form(Symbol z1, std::size_t horizon);

using EpsilonFn = std::function<double(std::uint64_t horizon, double delta)>;

// Right-hand sides of the two lower bounds in their general form:
// C V_T / delta^alpha + eps and C sqrt(KL/T) / delta^beta + eps.
double lower_bound_tv(double c, double alpha, double v_expected, double delta, double eps);
double lower_bound_kl(double c, double beta, double kl, std::size_t horizon, double delta, double eps);

// The same right-hand sides after substituting psi = 1/8 and phi = delta.
double rewritten_r1(double c, double alpha, std::uint64_t horizon, double delta, double eps);
double rewritten_r2(double c, double beta, std::uint64_t horizon, double delta, double eps);

struct ParameterSearchLimits {
  std::uint64_t max_horizon = 10'000'000;
  std::uint64_t max_n = 1'000'000;
};

struct Theorem6Witness {
  double c = 1.0;
  double alpha = 0.0;
  double beta = 0.0;
  EpsilonFn epsilon;
  std::uint64_t n = 0;
  double delta = 0.0;  // delta_n = 1/(n+3), also used as phi
  double psi = 0.125;
  std::uint64_t horizon = 0;  // T_n
  double r1 = 0.0;
  double r2 = 0.0;
  double epsilon_value = 0.0;  // eps(T_n, delta_n)

  double high_regret() const { return static_cast<double>(horizon - 1) / static_cast<double>(horizon); }
};

// Walks n = 1, 2, ... with delta_n = 1/(n+3) and
// T_n = min{T : eps(T, delta_n) < 1/n and (n = 1 or T > T_{n-1})}
// until both R1 and R2 drop below (T_n - 1)/T_n. Throws CapacityError with
// the last state reached when either cap is hit.
Theorem6Witness choose_parameters(double c, double alpha, double beta, EpsilonFn epsilon,
                                  const ParameterSearchLimits& limits = {});

struct Theorem6Report {
  double exact_probability_r1 = 0.0;  // P(Delta >= R1)
  double exact_probability_r2 = 0.0;  // P(Delta >= R2)
  std::size_t episodes = 0;
  double simulated_r1 = 0.0;
  double simulated_r2 = 0.0;
  double sigma = 0.0;  // binomial sd of the simulated frequency at p = delta_n
  bool within_three_sigma = false;
  bool holds = false;  // exact probabilities are >= delta_n
};

// Exact check through the distribution of Z_1, plus a simulated frequency of
// Delta >= R_i over `episodes` runs. Throws VerificationError when the
// witness does not satisfy R1, R2 < (T_n - 1)/T_n.
Theorem6Report verify_theorem6(const Theorem6Witness& witness, std::size_t episodes = 10'000,
                               std::uint64_t seed = 0, std::size_t workers = 1);

}  // namespace seqregret
