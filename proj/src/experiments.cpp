#include "seqregret/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "seqregret/parallel.hpp"

namespace seqregret {

namespace {

constexpr std::uint64_t kThetaStream = 0x7468657461ULL;  // "theta"

std::string format17(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_number(double v) {
  std::ostringstream s;
  s << std::setprecision(4) << v;
  return s.str();
}

MarkovParams load_theta(const SimulateConfig& config) {
  std::ifstream in(config.theta_file);
  if (!in) throw IoError("cannot open theta file '" + config.theta_file + "'");
  return read_theta(in, config.memory, config.states);
}

SequentialDistribution make_learner_process(const SimulateConfig& config) {
  if (config.predictor == Predictor::mcmc) {
    return make_mcmc_mixture(config.memory, config.states, config.horizon, config.mcmc);
  }
  return make_laplace_mixture(config.memory, config.states, config.horizon);
}

}  // namespace

std::uint64_t theta_seed(std::uint64_t base_seed, std::optional<std::size_t> run) {
  const std::uint64_t root = derive_seed(base_seed, kThetaStream);
  return run ? derive_seed(root, *run) : root;
}

RegretSummary run_simulation(const SimulateConfig& config) {
  if (config.runs < 1) throw InvalidInput("runs must be at least 1");
  if (config.horizon < 1) throw InvalidInput("horizon must be at least 1");
  if (config.resample_theta && !config.theta_file.empty()) {
    throw InvalidInput("--resample-theta cannot be combined with a theta file");
  }
  Alphabet alphabet(config.states);
  context_count(config.memory, config.states);
  if (config.predictor == Predictor::mcmc) config.mcmc.validate();

  const LossFunction loss = LossFunction::classification(alphabet);
  const Policy learner = mismatched_policy(make_learner_process(config), loss);

  if (!config.resample_theta) {
    MarkovParams theta = config.theta_file.empty()
                             ? sample_theta(config.memory, config.states, theta_seed(config.seed))
                             : load_theta(config);
    const SequentialDistribution p = make_markov(std::move(theta), config.horizon);
    return monte_carlo_summary(p, learner, optimal_policy(p, loss), loss,
                               BatchOptions{config.runs, config.seed, config.threads});
  }

  std::vector<std::vector<double>> curves(config.runs);
  parallel_for(config.runs, config.threads, [&](std::size_t r) {
    const SequentialDistribution p =
        make_markov(sample_theta(config.memory, config.states, theta_seed(config.seed, r)), config.horizon);
    curves[r] = running_average(run_episode(p, learner, optimal_policy(p, loss), loss, episode_seed(config.seed, r)));
  });
  return summarize_curves(curves, config.seed);
}

void write_summary_csv(std::ostream& out, const RegretSummary& summary) {
  out << kSummaryHeader << '\n';
  for (std::size_t t = 0; t < summary.horizon(); ++t) {
    out << (t + 1) << ',' << format17(summary.mean[t]);
    for (double q : summary.quantiles[t]) out << ',' << format17(q);
    out << '\n';
  }
  if (!out) throw IoError("failed writing summary CSV");
}

void write_metadata(std::ostream& out, const SimulateConfig& config) {
  out << "# seqregret simulate, replay with: seqregret simulate --config <this file> --output <csv>\n";
  out << "[simulate]\n";
  out << "artifact_version=\"" << kArtifactVersion << "\"\n";
  out << "states=" << config.states << '\n';
  out << "memory=" << config.memory << '\n';
  out << "runs=" << config.runs << '\n';
  out << "horizon=" << config.horizon << '\n';
  out << "seed=" << config.seed << '\n';
  out << "predictor=" << (config.predictor == Predictor::mcmc ? "mcmc" : "exact") << '\n';
  if (!config.theta_file.empty()) out << "theta-file=\"" << config.theta_file << "\"\n";
  out << "resample-theta=" << (config.resample_theta ? "true" : "false") << '\n';
  out << "mcmc-chain=" << config.mcmc.chain_length << '\n';
  out << "mcmc-burn-in=" << config.mcmc.burn_in << '\n';
  out << "mcmc-thin=" << config.mcmc.thinning << '\n';
  out << "mcmc-scale=" << format17(config.mcmc.proposal_scale) << '\n';
  out << "mcmc-seed=" << config.mcmc.seed << '\n';
  // Informational; ignored on replay.
  out << "loss=\"classification\"\n";
  out << "learner=\"" << (config.predictor == Predictor::mcmc ? "metropolis-hastings mixture" : "laplace mixture")
      << "\"\n";
  out << "quantiles=\"0.05 0.25 0.5 0.75 0.95\"\n";
  out << "quantile_method=\"linear interpolation between order statistics\"\n";
  out << "state_labels=\"1..S; internal symbol s is state s+1\"\n";
  out << "padding_state=1\n";
  if (config.theta_file.empty()) {
    out << "theta_source=\"" << (config.resample_theta ? "flat dirichlet per run" : "flat dirichlet per experiment")
        << "\"\n";
    if (!config.resample_theta) out << "theta_seed=" << theta_seed(config.seed) << '\n';
  }
  out << "episode_seed_rule=\"derive_seed(seed, run)\"\n";
  if (!out) throw IoError("failed writing metadata");
}

std::string metadata_path(const std::string& csv_path) {
  const auto slash = csv_path.find_last_of('/');
  const auto dot = csv_path.find_last_of('.');
  if (dot != std::string::npos && (slash == std::string::npos || dot > slash)) {
    return csv_path.substr(0, dot) + ".meta";
  }
  return csv_path + ".meta";
}

std::vector<BoundReport> manual_bounds(const ManualBoundInputs& in) {
  std::vector<BoundReport> reports;
  BoundSpec base;
  base.loss_bound = in.loss_bound;
  base.horizon = in.horizon;
  base.delta = in.delta;
  auto add = [&](BoundKind kind) {
    BoundSpec spec = base;
    spec.kind = kind;
    reports.push_back(evaluate_bound(spec));
  };
  if (in.v_expected) {
    base.v_expected = *in.v_expected;
    add(BoundKind::thm2);
  }
  if (in.kl) {
    base.kl = *in.kl;
    add(BoundKind::cor1);
  }
  if (in.v_hat) {
    base.v_hat = *in.v_hat;
    add(BoundKind::lemma5);
  }
  if (in.v_expected) add(BoundKind::thm4_tv);
  if (in.kl) add(BoundKind::thm4_kl);
  if (reports.empty()) throw InvalidInput("supply at least one of --vt, --kl, --vhat");
  return reports;
}

std::vector<BoundReport> impossibility_bounds(double phi, double psi, std::size_t horizon, double delta) {
  build_instance(phi, psi, horizon);  // parameter checks
  ManualBoundInputs in;
  in.loss_bound = 1.0;
  in.horizon = horizon;
  in.delta = delta;
  in.v_expected = closed_form_vt(phi, psi, horizon);
  in.kl = closed_form_kl(phi, psi, horizon);
  return manual_bounds(in);
}

void write_bound_reports(std::ostream& out, const std::vector<BoundReport>& reports) {
  out << std::left << std::setw(9) << "bound" << std::setw(7) << "L" << std::setw(8) << "T" << std::setw(8)
      << "delta" << std::setw(16) << "input" << "value\n";
  for (const auto& r : reports) {
    const auto& in = r.inputs;
    double input = 0.0;
    switch (in.kind) {
      case BoundKind::thm2:
      case BoundKind::thm4_tv: input = in.v_expected; break;
      case BoundKind::cor1:
      case BoundKind::thm4_kl: input = in.kl; break;
      case BoundKind::lemma5: input = in.v_hat; break;
      case BoundKind::lemma6_tv: input = in.v_expected; break;
      case BoundKind::lemma6_kl: input = in.d_expected; break;
    }
    const bool uses_delta = in.kind == BoundKind::lemma5 || in.kind == BoundKind::thm4_tv ||
                            in.kind == BoundKind::thm4_kl;
    out << std::setw(9) << to_string(in.kind) << std::setw(7) << in.loss_bound << std::setw(8) << in.horizon
        << std::setw(8) << (uses_delta ? short_number(in.delta) : std::string("-")) << std::setw(16)
        << std::setprecision(10) << input << r.value << '\n';
  }
}

void write_theorem6(std::ostream& out, const Theorem6Witness& w, const Theorem6Report& r) {
  out << std::setprecision(10);
  out << "C=" << w.c << " alpha=" << w.alpha << " beta=" << w.beta << '\n';
  out << "n=" << w.n << " delta_n=phi=" << w.delta << " psi=" << w.psi << " T_n=" << w.horizon
      << " eps(T_n,delta_n)=" << w.epsilon_value << '\n';
  out << "R1=" << w.r1 << " R2=" << w.r2 << " (T_n-1)/T_n=" << w.high_regret() << '\n';
  out << "P(Delta>=R1)=" << r.exact_probability_r1 << " P(Delta>=R2)=" << r.exact_probability_r2
      << " exact check: " << (r.holds ? "holds" : "FAILS") << '\n';
  if (r.episodes > 0) {
    out << "simulated over " << r.episodes << " episodes: freq(Delta>=R1)=" << r.simulated_r1
        << " freq(Delta>=R2)=" << r.simulated_r2 << " sigma=" << r.sigma << " within 3 sigma: "
        << (r.within_three_sigma ? "yes" : "no") << '\n';
  }
}

EpsilonFn epsilon_by_name(const std::string& name) {
  if (name == "zero") return [](std::uint64_t, double) { return 0.0; };
  if (name == "inv-sqrt") return [](std::uint64_t t, double) { return 1.0 / std::sqrt(static_cast<double>(t)); };
  if (name == "inv-linear") return [](std::uint64_t t, double) { return 1.0 / static_cast<double>(t); };
  if (name == "log-over-sqrt") {
    return [](std::uint64_t t, double) {
      const double x = static_cast<double>(t);
      return (1.0 + std::log(x)) / std::sqrt(x);
    };
  }
  throw InvalidInput("unknown epsilon '" + name + "' (expected zero, inv-sqrt, inv-linear, log-over-sqrt)");
}

}  // namespace seqregret
