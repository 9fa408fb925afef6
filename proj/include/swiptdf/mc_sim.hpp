#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "swiptdf/detail/parallel.hpp"
#include "swiptdf/rng.hpp"
#include "swiptdf/solver.hpp"

// Rician block-fading channel generation and seeded Monte Carlo throughput
// campaigns, with the three allocation policies used for comparison plots:
// the dynamic time split, the conventional fixed theta = 1/2 relay, and the
// idealized relay without circuit power consumption.

namespace swiptdf {

/// Rician fading description; gains are drawn i.i.d. per coherence block.
struct FadingSpec {
  double rice_k = 1.0;       // line-of-sight to scattered power ratio, K >= 0
  double mean_gain_sr = 0.4; // E[g1]
  double mean_gain_rd = 0.4; // E[g2]
};

inline void validate(const FadingSpec& f) {
  if (!(f.rice_k >= 0.0)) throw std::invalid_argument("rice factor must be >= 0");
  if (!(f.mean_gain_sr > 0.0) || !(f.mean_gain_rd > 0.0))
    throw std::invalid_argument("mean channel gains must be > 0");
}

enum class Policy { Dynamic, ConventionalHalf, NoCpc };

inline const char* policy_name(Policy p) {
  switch (p) {
    case Policy::Dynamic: return "dynamic";
    case Policy::ConventionalHalf: return "conventional-half";
    case Policy::NoCpc: return "no-cpc";
  }
  return "?";
}

struct McConfig {
  std::int64_t trials = 10000;
  std::uint64_t seed = 1;
  Policy policy = Policy::Dynamic;
  SolverConfig solver;
};

inline void validate(const McConfig& mc) {
  if (mc.trials < 1) throw std::invalid_argument("trial count must be >= 1");
  validate(mc.solver);
}

/// One Rician power-gain draw: g = |sqrt(omega*K/(K+1)) + z|^2 with z
/// circularly-symmetric complex Gaussian of variance omega/(K+1), so
/// E[g] = omega. K = 0 degenerates to Rayleigh (exponential g).
inline double sample_rician_gain(double rice_k, double mean_gain, std::mt19937_64& eng) {
  const double los = std::sqrt(mean_gain * rice_k / (rice_k + 1.0));
  const double sd = std::sqrt(mean_gain / (2.0 * (rice_k + 1.0)));
  const auto [n1, n2] = normal_pair(eng);
  const double re = los + sd * n1;
  const double im = sd * n2;
  return re * re + im * im;
}

/// The (seed, trial) -> channel draw mapping; trial order and thread count
/// never affect it. g1 consumes the first normal pair, g2 the second.
inline ChannelState channel_for_trial(const FadingSpec& f, std::uint64_t seed,
                                      std::int64_t trial) {
  auto eng = substream_engine(seed, static_cast<std::uint64_t>(trial));
  ChannelState ch;
  ch.gain_sr = sample_rician_gain(f.rice_k, f.mean_gain_sr, eng);
  ch.gain_rd = sample_rician_gain(f.rice_k, f.mean_gain_rd, eng);
  return ch;
}

/// Solves one channel under the given policy. ConventionalHalf is feasible
/// only when theta0 < 1/2; NoCpc re-solves with all four circuit power
/// parameters zeroed.
inline SolveReport solve_policy(const SystemParams& p, const ChannelState& c, Policy policy,
                                const SolverConfig& cfg = {}) {
  switch (policy) {
    case Policy::Dynamic: return solve(p, c, cfg);
    case Policy::ConventionalHalf: {
      SolveReport report;
      const Feasibility feas = check_feasibility(p, c);
      if (!feas.feasible) return report;
      report.theta0 = feas.min_theta;
      report.lower_bound_bps = rate_lower_bound(p, c);
      if (!(feas.min_theta < 0.5)) return report;  // theta = 1/2 not in (theta0, 1)
      const FixedThetaSolution fixed = solve_fixed_theta(p, c, 0.5, cfg);
      report.status = SolveStatus::Feasible;
      report.best = fixed.alloc;
      report.grid = {{0.5, fixed.alloc.relay_power_mw, fixed.alloc.rate_bps, fixed.iterations}};
      report.total_iterations = fixed.iterations;
      report.total_flops = 3 * report.total_iterations;
      return report;
    }
    case Policy::NoCpc: {
      SystemParams ideal = p;
      ideal.decoder_static_mw = 0.0;
      ideal.encoder_static_mw = 0.0;
      ideal.decoder_dyn_mw_per_bps = 0.0;
      ideal.encoder_dyn_mw_per_bps = 0.0;
      return solve(ideal, c, cfg);
    }
  }
  throw std::invalid_argument("unknown policy");
}

/// Campaign summary. Decision-variable means are taken over feasible draws
/// only (0 when every draw is infeasible); infeasible draws contribute rate 0
/// to the throughput mean, mirroring the solver's zero sentinel.
struct McSummary {
  double mean_bps = 0.0;
  double std_error_bps = 0.0;
  double infeasible_fraction = 0.0;
  double mean_ps_ratio = 0.0;
  double mean_relay_power_mw = 0.0;
  double mean_time_ratio = 0.0;
  double mean_theta0 = 0.0;
  double mean_lower_bound_bps = 0.0;
  std::int64_t total_iterations = 0;
  std::int64_t total_flops = 0;
};

inline McSummary average_throughput(const SystemParams& p, const FadingSpec& fading,
                                    const McConfig& mc) {
  validate(p);
  validate(fading);
  validate(mc);
  const std::int64_t n = mc.trials;
  struct TrialResult {
    double tau, lambda, pt, theta, theta0, lb;
    std::int64_t iters;
    bool feasible;
  };
  std::vector<TrialResult> results(static_cast<std::size_t>(n));
  detail::parallel_for(n, [&](std::int64_t i) {
    const ChannelState ch = channel_for_trial(fading, mc.seed, i);
    const SolveReport rep = solve_policy(p, ch, mc.policy, mc.solver);
    results[static_cast<std::size_t>(i)] = {
        rep.best.rate_bps,   rep.best.ps_ratio, rep.best.relay_power_mw,
        rep.best.time_ratio, rep.theta0,        rep.lower_bound_bps,
        rep.total_iterations, rep.status == SolveStatus::Feasible};
  });

  McSummary out;
  std::int64_t feasible = 0;
  for (const TrialResult& r : results) {
    out.mean_bps += r.tau;
    out.total_iterations += r.iters;
    if (r.feasible) {
      ++feasible;
      out.mean_ps_ratio += r.lambda;
      out.mean_relay_power_mw += r.pt;
      out.mean_time_ratio += r.theta;
      out.mean_theta0 += r.theta0;
      out.mean_lower_bound_bps += r.lb;
    }
  }
  out.total_flops = 3 * out.total_iterations;
  out.mean_bps /= static_cast<double>(n);
  if (feasible > 0) {
    out.mean_ps_ratio /= static_cast<double>(feasible);
    out.mean_relay_power_mw /= static_cast<double>(feasible);
    out.mean_time_ratio /= static_cast<double>(feasible);
    out.mean_theta0 /= static_cast<double>(feasible);
    out.mean_lower_bound_bps /= static_cast<double>(feasible);
  }
  out.infeasible_fraction = static_cast<double>(n - feasible) / static_cast<double>(n);
  if (n > 1) {
    double ss = 0.0;
    for (const TrialResult& r : results) {
      const double d = r.tau - out.mean_bps;
      ss += d * d;
    }
    out.std_error_bps = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
  }
  return out;
}

enum class SweepAxis { GainSr, SourcePower, EpsSum, StaticPower };

inline const char* sweep_axis_name(SweepAxis a) {
  switch (a) {
    case SweepAxis::GainSr: return "g1";
    case SweepAxis::SourcePower: return "q_mw";
    case SweepAxis::EpsSum: return "eps_sum";
    case SweepAxis::StaticPower: return "pd_pe_mw";
  }
  return "?";
}

namespace detail {

inline void apply_axis(SweepAxis axis, double v, SystemParams& p, double& gain_sr) {
  switch (axis) {
    case SweepAxis::GainSr: gain_sr = v; return;
    case SweepAxis::SourcePower: p.source_power_mw = v; return;
    case SweepAxis::EpsSum:
      p.decoder_dyn_mw_per_bps = v / 2.0;
      p.encoder_dyn_mw_per_bps = v / 2.0;
      return;
    case SweepAxis::StaticPower:
      p.decoder_static_mw = v;
      p.encoder_static_mw = v;
      return;
  }
  throw std::invalid_argument("unknown sweep axis");
}

inline void require_monotone(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("sweep needs at least one axis value");
  bool up = true, down = true;
  for (std::size_t i = 1; i < values.size(); ++i) {
    up = up && values[i] >= values[i - 1];
    down = down && values[i] <= values[i - 1];
  }
  if (!up && !down) throw std::invalid_argument("sweep axis values must be monotone");
}

}  // namespace detail

/// One sweep output row; fixed-channel rows carry std_error 0 and an
/// infeasible fraction of exactly 0 or 1.
struct SweepRow {
  double axis_value = 0.0;
  Policy policy = Policy::Dynamic;
  SolveStatus status = SolveStatus::Infeasible;
  double gain_sr = 0.0;  // channel gain, or its mean under fading
  double gain_rd = 0.0;
  double tau_bps = 0.0;
  double ps_ratio = 0.0;
  double relay_power_mw = 0.0;
  double time_ratio = 0.0;
  double theta0 = 0.0;
  double lower_bound_bps = 0.0;
  std::int64_t iterations = 0;
  std::int64_t flops = 0;
  double std_error_bps = 0.0;
  double infeasible_fraction = 0.0;
};

/// Fixed-channel sweep: one deterministic solve per (axis value, policy).
inline std::vector<SweepRow> sweep_fixed(const SystemParams& params, const ChannelState& channel,
                                         SweepAxis axis, std::span<const double> values,
                                         std::span<const Policy> policies,
                                         const SolverConfig& cfg = {}) {
  detail::require_monotone(values);
  std::vector<SweepRow> rows;
  rows.reserve(values.size() * policies.size());
  for (const double v : values) {
    SystemParams p = params;
    ChannelState ch = channel;
    detail::apply_axis(axis, v, p, ch.gain_sr);
    validate(p);
    validate(ch);
    for (const Policy policy : policies) {
      const SolveReport rep = solve_policy(p, ch, policy, cfg);
      const bool feas = rep.status == SolveStatus::Feasible;
      rows.push_back({v, policy, rep.status, ch.gain_sr, ch.gain_rd, rep.best.rate_bps,
                      rep.best.ps_ratio, rep.best.relay_power_mw, rep.best.time_ratio,
                      rep.theta0, rep.lower_bound_bps, rep.total_iterations, rep.total_flops,
                      0.0, feas ? 0.0 : 1.0});
    }
  }
  return rows;
}

/// Fading sweep: one Monte Carlo campaign per (axis value, policy). Every
/// campaign reuses the same seed, so rows share channel substreams and ladder
/// comparisons see common random numbers.
inline std::vector<SweepRow> sweep_fading(const SystemParams& params, const FadingSpec& fading,
                                          SweepAxis axis, std::span<const double> values,
                                          std::span<const Policy> policies, const McConfig& mc) {
  detail::require_monotone(values);
  std::vector<SweepRow> rows;
  rows.reserve(values.size() * policies.size());
  for (const double v : values) {
    SystemParams p = params;
    FadingSpec f = fading;
    detail::apply_axis(axis, v, p, f.mean_gain_sr);
    validate(p);
    validate(f);
    for (const Policy policy : policies) {
      McConfig cfg = mc;
      cfg.policy = policy;
      const McSummary s = average_throughput(p, f, cfg);
      rows.push_back({v, policy,
                      s.infeasible_fraction < 1.0 ? SolveStatus::Feasible
                                                  : SolveStatus::Infeasible,
                      f.mean_gain_sr, f.mean_gain_rd, s.mean_bps, s.mean_ps_ratio,
                      s.mean_relay_power_mw, s.mean_time_ratio, s.mean_theta0,
                      s.mean_lower_bound_bps, s.total_iterations, s.total_flops,
                      s.std_error_bps, s.infeasible_fraction});
    }
  }
  return rows;
}

}  // namespace swiptdf
