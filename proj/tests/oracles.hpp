#pragma once

// Reference computations used by the tests. They deliberately avoid the
// library's own shortcuts (prefix-tree walks, cursors, closed forms) so that
// agreement means something.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "seqregret/core.hpp"

namespace oracle {

using seqregret::History;
using seqregret::Pmf;
using seqregret::Sequence;
using seqregret::SequentialDistribution;
using seqregret::Symbol;

// sup over all 2^S events of |p(F) - q(F)|.
inline double tv_by_events(const Pmf& p, const Pmf& q) {
  const std::size_t s = p.size();
  double best = 0.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << s); ++mask) {
    double pf = 0.0;
    double qf = 0.0;
    for (std::size_t i = 0; i < s; ++i) {
      if (mask >> i & 1) {
        pf += p[static_cast<Symbol>(i)];
        qf += q[static_cast<Symbol>(i)];
      }
    }
    best = std::max(best, std::abs(pf - qf));
  }
  return best;
}

inline double kl_direct(const Pmf& p, const Pmf& q) {
  long double acc = 0.0L;
  for (Symbol i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) return std::numeric_limits<double>::infinity();
    acc += static_cast<long double>(p[i]) * std::log(static_cast<long double>(p[i]) / q[i]);
  }
  return static_cast<double>(acc);
}

// Product of kernel_eval along the sequence, re-evaluating each prefix from
// scratch.
inline double chain_prob(const SequentialDistribution& d, const Sequence& seq) {
  double prob = 1.0;
  for (std::size_t t = 0; t < seq.size(); ++t) {
    prob *= seqregret::kernel_eval(d, History(seq.data(), t))[seq[t]];
  }
  return prob;
}

inline void for_each_sequence(std::size_t states, std::size_t length, const std::function<void(const Sequence&)>& fn) {
  Sequence seq(length, 0);
  while (true) {
    fn(seq);
    std::size_t i = length;
    while (i > 0 && seq[i - 1] + 1 == states) seq[--i] = 0;
    if (i == 0) return;
    ++seq[i - 1];
  }
}

struct Expected {
  double v = 0.0;
  double d = 0.0;
  double kl = 0.0;
};

// V_T, D_T and KL by summing over every full sequence: each sequence
// contributes P(seq) times its path averages.
inline Expected expected_by_enumeration(const SequentialDistribution& p, const SequentialDistribution& q) {
  const std::size_t t_len = p.horizon();
  const std::size_t s = p.alphabet().size();
  Expected e;
  long double v = 0.0L;
  long double d = 0.0L;
  long double kl = 0.0L;
  for_each_sequence(s, t_len, [&](const Sequence& seq) {
    const double pp = chain_prob(p, seq);
    if (pp == 0.0) return;
    const double qq = chain_prob(q, seq);
    long double path_v = 0.0L;
    long double path_d = 0.0L;
    for (std::size_t t = 0; t < t_len; ++t) {
      const History h(seq.data(), t);
      const Pmf kp = seqregret::kernel_eval(p, h);
      const Pmf kq = seqregret::kernel_eval(q, h);
      path_v += tv_by_events(kp, kq);
      path_d += kl_direct(kp, kq);
    }
    v += pp * path_v / t_len;
    d += pp * path_d / t_len;
    kl += qq == 0.0 ? std::numeric_limits<long double>::infinity() : pp * std::log(static_cast<long double>(pp) / qq);
  });
  e.v = static_cast<double>(v);
  e.d = static_cast<double>(d);
  e.kl = static_cast<double>(kl);
  return e;
}

// Posterior predictive of a two-state memory-1 chain under the uniform prior
// for the context `ctx`, from the transition counts, by trapezoid quadrature
// on a fine grid in log space. Independent of the library's midpoint rule.
inline double beta_predictive_zero(std::uint64_t n0, std::uint64_t n1, std::size_t nodes = 200'000) {
  long double num = 0.0L;
  long double den = 0.0L;
  const long double h = 1.0L / nodes;
  for (std::size_t k = 0; k <= nodes; ++k) {
    const long double x = k * h;
    const long double w = (k == 0 || k == nodes) ? 0.5L : 1.0L;
    const long double f = std::pow(x, static_cast<long double>(n0)) * std::pow(1.0L - x, static_cast<long double>(n1));
    num += w * x * f;
    den += w * f;
  }
  return static_cast<double>(num / den);
}

// Binomial 3-sigma band.
inline bool within_three_sigma(double freq, double p, std::size_t n) {
  return std::abs(freq - p) <= 3.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

}  // namespace oracle
