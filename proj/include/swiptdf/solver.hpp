#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "swiptdf/bounds.hpp"
#include "swiptdf/core_model.hpp"

// Near-optimal resource allocation: a feasibility gate, a bisection solve of
// the fixed-theta subproblem (which is convex and collapses to a 1-D root
// find on the energy balance), and a grid search over the time ratio.

namespace swiptdf {

struct SolverConfig {
  int grid_levels = 500;        // n, interior theta grid points
  double tol_pt_rel = 1e-12;    // bisection stops at bracket width <= tol * bracket
  double tol_constraint = 1e-8; // tightness tolerance for constraint checks
};

inline void validate(const SolverConfig& cfg) {
  if (cfg.grid_levels < 1) throw std::invalid_argument("grid levels must be >= 1");
  if (!(cfg.tol_pt_rel > 0.0 && cfg.tol_pt_rel < 1.0))
    throw std::invalid_argument("bisection tolerance must be in (0,1)");
  if (!(cfg.tol_constraint > 0.0))
    throw std::invalid_argument("constraint tolerance must be > 0");
}

enum class SolveStatus { Feasible, Infeasible };

struct Feasibility {
  bool feasible = false;
  double min_theta = 0.0;  // theta0, valid when feasible
  std::string reason;      // set when infeasible
};

/// The allocation problem has solutions iff the harvest can cover the decoder
/// static power (eta*Q*g1 > P_d) and the second hop exists (g2 > 0).
inline Feasibility check_feasibility(const SystemParams& p, const ChannelState& c) {
  validate(p);
  validate(c);
  if (!(harvest_power_mw(p, c) > p.decoder_static_mw))
    return {false, 0.0, "harvested power cannot cover decoder static power"};
  if (!(c.gain_rd > 0.0)) return {false, 0.0, "relay-destination gain is zero"};
  return {true, min_time_ratio(p, c), {}};
}

struct FixedThetaSolution {
  Allocation alloc;
  int iterations = 0;  // bisection iterations
};

/// Per-grid-point solve record.
struct GridPointDiag {
  double theta = 0.0;
  double relay_power_mw = 0.0;
  double rate_bps = 0.0;
  int iterations = 0;
};

struct SolveReport {
  SolveStatus status = SolveStatus::Infeasible;
  Allocation best;               // zero sentinel when infeasible
  double theta0 = 0.0;           // feasible time ratios are (theta0, 1)
  double lower_bound_bps = 0.0;  // closed-form rate lower bound
  std::vector<GridPointDiag> grid;
  std::int64_t total_iterations = 0;
  std::int64_t total_flops = 0;  // 3 per bisection iteration
};

namespace detail {

// Hot-loop evaluator for one fixed theta: precomputes every per-theta
// constant so a residual evaluation costs one log1p and one expm1.
struct FixedThetaEval {
  double theta, one_minus;
  double qg1, sigma2, harvest_theta, static_mw, eps_sum;
  double snr_per_mw;   // g2/(2*sigma^2)
  double rate_coeff;   // (1-theta)/(T0*ln2)
  double exp_ratio;    // (1-theta)/theta
  double u_max;        // log1p(Q*g1/(2*sigma^2)), lambda = 1 boundary

  FixedThetaEval(const SystemParams& p, const ChannelState& c, double th)
      : theta(th),
        one_minus(1.0 - th),
        qg1(p.source_power_mw * c.gain_sr),
        sigma2(p.noise_power_mw),
        harvest_theta(harvest_power_mw(p, c) * th),
        static_mw(th * p.decoder_static_mw + (1.0 - th) * p.encoder_static_mw),
        eps_sum(p.eps_sum()),
        snr_per_mw(c.gain_rd / (2.0 * p.noise_power_mw)),
        rate_coeff((1.0 - th) / (p.sample_period_s * kLn2)),
        exp_ratio((1.0 - th) / th),
        u_max(std::log1p(p.source_power_mw * c.gain_sr / (2.0 * p.noise_power_mw))) {}

  double ps_ratio(double pt) const {
    if (pt <= 0.0) return 0.0;
    const double u = exp_ratio * std::log1p(snr_per_mw * pt);
    const double lambda = sigma2 / (qg1 / std::expm1(u) - sigma2);
    return lambda < 0.0 ? 0.0 : (lambda > 1.0 ? 1.0 : lambda);
  }

  double residual(double pt) const {
    const double log_term = std::log1p(snr_per_mw * pt);
    double lambda = 0.0;
    if (pt > 0.0) {
      const double raw = sigma2 / (qg1 / std::expm1(exp_ratio * log_term) - sigma2);
      lambda = raw < 0.0 ? 0.0 : (raw > 1.0 ? 1.0 : raw);
    }
    const double tau = rate_coeff * log_term;
    return harvest_theta * (1.0 - lambda) - static_mw - eps_sum * tau - one_minus * pt;
  }

  // Finite upper end of the bisection bracket: the rate-matching ceiling,
  // intersected with the power beyond which the energy balance is negative
  // even at lambda = 0 (the ceiling itself can overflow for theta near 1).
  double bracket_end() const {
    const double ceiling = std::expm1(theta / one_minus * u_max) / snr_per_mw;
    const double energy_cap = (harvest_theta - static_mw) / one_minus;
    return std::min(ceiling, energy_cap);
  }
};

}  // namespace detail

/// Solves the convex fixed-theta subproblem by bisection on the energy
/// balance residual over relay power. Requires theta in (theta0, 1).
inline FixedThetaSolution solve_fixed_theta(const SystemParams& p, const ChannelState& c,
                                            double theta, const SolverConfig& cfg = {}) {
  validate(cfg);
  const Feasibility feas = check_feasibility(p, c);
  if (!feas.feasible) throw std::domain_error("instance is infeasible: " + feas.reason);
  if (!(theta > feas.min_theta && theta < 1.0))
    throw std::domain_error("time ratio must lie in (theta0, 1)");

  const detail::FixedThetaEval eval(p, c, theta);
  const double end = eval.bracket_end();
  FixedThetaSolution out;
  if (!(eval.residual(end) <= 0.0)) {
    // Degenerate near-zero circuit power: the root sits at the bracket end
    // within rounding.
    out.alloc = {eval.rate_coeff * std::log1p(eval.snr_per_mw * end), eval.ps_ratio(end), end,
                 theta};
    return out;
  }

  double lo = 0.0, hi = end;
  int iterations = 0;
  while (hi - lo > cfg.tol_pt_rel * end) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // bracket exhausted at double resolution
    (eval.residual(mid) > 0.0 ? lo : hi) = mid;
    ++iterations;
  }
  const double pt = 0.5 * (lo + hi);
  out.alloc = {eval.rate_coeff * std::log1p(eval.snr_per_mw * pt), eval.ps_ratio(pt), pt, theta};
  out.iterations = iterations;
  return out;
}

/// Grid search over the time ratio: n interior points of (theta0, 1), each
/// solved by bisection; the first strict rate maximum wins, so ties break
/// toward the smaller theta. Infeasible instances yield the zero-sentinel
/// report rather than an error.
inline SolveReport solve(const SystemParams& p, const ChannelState& c,
                         const SolverConfig& cfg = {}) {
  validate(cfg);
  SolveReport report;
  const Feasibility feas = check_feasibility(p, c);
  if (!feas.feasible) return report;

  report.status = SolveStatus::Feasible;
  report.theta0 = feas.min_theta;
  report.lower_bound_bps = rate_lower_bound(p, c);
  const int n = cfg.grid_levels;
  report.grid.reserve(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i) {
    const double theta = feas.min_theta + i * (1.0 - feas.min_theta) / (n + 1);
    const FixedThetaSolution fixed = solve_fixed_theta(p, c, theta, cfg);
    report.grid.push_back(
        {theta, fixed.alloc.relay_power_mw, fixed.alloc.rate_bps, fixed.iterations});
    report.total_iterations += fixed.iterations;
    if (fixed.alloc.rate_bps > report.best.rate_bps) report.best = fixed.alloc;
  }
  report.total_flops = 3 * report.total_iterations;
  return report;
}

/// Strictly feasible point of the fixed-theta subproblem, parametrized by the
/// energy slack delta in [0, eta*Q*g1*theta - P_d*theta - P_e*(1-theta)]; the
/// energy constraint holds with equality along the whole family.
inline Allocation slater_feasible_point(const SystemParams& p, const ChannelState& c,
                                        double theta, double delta) {
  if (!(p.eps_sum() > 0.0))
    throw std::domain_error("slater parametrization needs eps_d + eps_e > 0");
  const double slack_max =
      harvest_power_mw(p, c) * theta - theta * p.decoder_static_mw -
      (1.0 - theta) * p.encoder_static_mw;
  if (!(slack_max > 0.0)) throw std::domain_error("time ratio must lie in (theta0, 1)");
  if (!(delta >= 0.0 && delta <= slack_max))
    throw std::domain_error("delta outside [0, max energy slack]");
  return {delta / p.eps_sum(), (slack_max - delta) / (2.0 * harvest_power_mw(p, c) * theta),
          (slack_max - delta) / (2.0 * (1.0 - theta)), theta};
}

struct KktReport {
  std::array<double, 6> duals{};                  // a1..a6
  std::array<double, 3> stationarity{};           // dD/dtau, dD/dlambda, dD/dpt
  std::array<double, 6> comp_slackness{};         // a1*C1, a2*C2, a6*E, a3*l, a4*pt, a5*tau
  std::array<double, 3> primal_violation{};       // max(C1,0), max(C2,0), max(E,0)
  bool passed = false;
};

/// Numerically checks the first-order optimality system of the fixed-theta
/// subproblem at an interior allocation (lambda in (0,1), pt > 0): recovers
/// the three active duals from stationarity in closed form, then tests dual
/// nonnegativity, complementary slackness and primal feasibility against tol.
inline KktReport verify_kkt(const SystemParams& p, const ChannelState& c,
                            const Allocation& alloc, double tol) {
  validate(p);
  validate(c);
  const Feasibility feas = check_feasibility(p, c);
  if (!feas.feasible) throw std::domain_error("instance is infeasible: " + feas.reason);
  const double tau = alloc.rate_bps, lambda = alloc.ps_ratio;
  const double pt = alloc.relay_power_mw, theta = alloc.time_ratio;
  if (!(lambda > 0.0 && lambda < 1.0 && pt > 0.0))
    throw std::domain_error("boundary allocations (lambda or pt at 0) are not supported");
  if (!(theta > feas.min_theta && theta < 1.0))
    throw std::domain_error("time ratio must lie in (theta0, 1)");

  const double s2 = p.noise_power_mw;
  const double qg1 = p.source_power_mw * c.gain_sr;
  const double harvest = harvest_power_mw(p, c);
  const double eps = p.eps_sum();

  // Slopes of the two rate constraints in their own variable.
  const double snr1 = snr_sr(p, c, lambda);
  const double r1_slope = theta / (p.sample_period_s * kLn2) * qg1 /
                          (s2 * (1.0 + lambda) * (1.0 + lambda)) / (1.0 + snr1);
  const double snr2 = snr_rd(p, c, pt);
  const double r2_slope = (1.0 - theta) / (p.sample_period_s * kLn2) * c.gain_rd /
                          (2.0 * s2) / (1.0 + snr2);

  // Stationarity with a3 = a4 = a5 = 0 eliminates to a single equation in a6.
  const double w1 = harvest * theta / r1_slope;       // a1 = a6 * w1
  const double w2 = (1.0 - theta) / r2_slope;         // a2 = a6 * w2
  const double a6 = 1.0 / (w1 + w2 + eps);
  const double a1 = a6 * w1, a2 = a6 * w2;

  KktReport rep;
  rep.duals = {a1, a2, 0.0, 0.0, 0.0, a6};
  rep.stationarity = {1.0 - a1 - a2 - a6 * eps, a1 * r1_slope - a6 * harvest * theta,
                      a2 * r2_slope - a6 * (1.0 - theta)};

  const double c1 = tau - rate_sr(p, c, lambda, theta);
  const double c2 = tau - rate_rd(p, c, pt, theta);
  const double energy = theta * p.decoder_static_mw + (1.0 - theta) * p.encoder_static_mw +
                        eps * tau + pt * (1.0 - theta) - harvest * (1.0 - lambda) * theta;
  rep.comp_slackness = {a1 * c1, a2 * c2, a6 * energy, 0.0, 0.0, 0.0};
  rep.primal_violation = {std::max(c1, 0.0), std::max(c2, 0.0), std::max(energy, 0.0)};

  // Scales: D and the rate constraints live in bits/s, the energy constraint
  // in mW; stationarity rows are normalized by their largest term.
  const double rate_scale = std::max(std::abs(tau), 1.0);
  const double power_scale = std::max(harvest, 1.0);
  const double st_tau = std::abs(rep.stationarity[0]) / std::max({a1, a2, a6 * eps, 1.0});
  const double st_lambda =
      std::abs(rep.stationarity[1]) / std::max(a6 * harvest * theta, 1e-300);
  const double st_pt = std::abs(rep.stationarity[2]) / std::max(a6 * (1.0 - theta), 1e-300);

  bool ok = st_tau <= tol && st_lambda <= tol && st_pt <= tol;
  for (double d : rep.duals) ok = ok && d >= -tol;
  ok = ok && std::abs(rep.comp_slackness[0]) / rate_scale <= tol &&
       std::abs(rep.comp_slackness[1]) / rate_scale <= tol &&
       std::abs(rep.comp_slackness[2]) / rate_scale <= tol;
  ok = ok && rep.primal_violation[0] / rate_scale <= tol &&
       rep.primal_violation[1] / rate_scale <= tol &&
       rep.primal_violation[2] / power_scale <= tol;
  rep.passed = ok;
  return rep;
}

}  // namespace swiptdf
