#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include "swiptdf/core_model.hpp"
#include "swiptdf/solver.hpp"

// Independent validators for the allocation problem. The brute-force path
// touches only the raw constraint evaluators (hop rates and the energy
// inequality), never the rate-matching reduction, so agreement with the
// bisection solver is evidence rather than tautology. The interior-point
// reference solves the same fixed-theta subproblem by a log-barrier Newton
// method and reports its floating-point operation count for comparison.

namespace swiptdf {

struct GridSpec {
  int n_theta = 200;
  int n_lambda = 400;
  int n_pt = 400;
  int refine_rounds = 2;  // each round shrinks the search window 10x
};

inline void validate(const GridSpec& g) {
  if (g.n_theta < 2 || g.n_lambda < 2 || g.n_pt < 2)
    throw std::invalid_argument("grid resolutions must be >= 2");
  if (g.refine_rounds < 0) throw std::invalid_argument("refine rounds must be >= 0");
}

struct convergence_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

// Relay powers beyond this violate the energy inequality even with the whole
// signal harvested and zero rate; derived from the constraint alone.
inline double energy_power_cap(const SystemParams& p, const ChannelState& c, double theta) {
  return (harvest_power_mw(p, c) * theta - theta * p.decoder_static_mw -
          (1.0 - theta) * p.encoder_static_mw) /
         (1.0 - theta);
}

struct BruteIncumbent {
  double tau = -1.0;
  double lambda = 0.0, pt = 0.0, theta = 0.0;
};

// Exhaustive scan of one (lambda, pt) window at fixed theta. Grids include
// both endpoints; the first strict improvement wins so the scan order (and
// therefore the result) is deterministic.
inline void scan_lambda_pt(const SystemParams& p, const ChannelState& c, double theta,
                           int n_lambda, int n_pt, double lam_lo, double lam_hi, double pt_lo,
                           double pt_hi, BruteIncumbent& best) {
  const double static_mw =
      theta * p.decoder_static_mw + (1.0 - theta) * p.encoder_static_mw;
  const double harvest_theta = harvest_power_mw(p, c) * theta;
  const double eps = p.eps_sum();
  const double one_minus = 1.0 - theta;

  std::vector<double> rate1(static_cast<std::size_t>(n_lambda));
  std::vector<double> budget(static_cast<std::size_t>(n_lambda));
  for (int i = 0; i < n_lambda; ++i) {
    const double lam = lam_lo + (lam_hi - lam_lo) * i / (n_lambda - 1);
    rate1[static_cast<std::size_t>(i)] = rate_sr(p, c, lam, theta);
    budget[static_cast<std::size_t>(i)] = harvest_theta * (1.0 - lam) - static_mw;
  }
  std::vector<double> rate2(static_cast<std::size_t>(n_pt));
  std::vector<double> pt_cost(static_cast<std::size_t>(n_pt));
  std::vector<double> pts(static_cast<std::size_t>(n_pt));
  for (int j = 0; j < n_pt; ++j) {
    const double pt = pt_lo + (pt_hi - pt_lo) * j / (n_pt - 1);
    pts[static_cast<std::size_t>(j)] = pt;
    rate2[static_cast<std::size_t>(j)] = rate_rd(p, c, pt, theta);
    pt_cost[static_cast<std::size_t>(j)] = pt * one_minus;
  }

  for (int i = 0; i < n_lambda; ++i) {
    const double r1 = rate1[static_cast<std::size_t>(i)];
    const double b = budget[static_cast<std::size_t>(i)];
    if (b < 0.0) break;  // budgets shrink with lambda; nothing feasible past here
    for (int j = 0; j < n_pt; ++j) {
      const double cost = pt_cost[static_cast<std::size_t>(j)];
      if (cost > b) break;  // pt costs grow with j
      const double tau = std::min(r1, rate2[static_cast<std::size_t>(j)]);
      if (tau <= best.tau) continue;
      if (eps * tau + cost <= b)
        best = {tau, lam_lo + (lam_hi - lam_lo) * i / (n_lambda - 1),
                pts[static_cast<std::size_t>(j)], theta};
    }
  }
}

inline void scan_theta_window(const SystemParams& p, const ChannelState& c, const GridSpec& g,
                              double th_lo, double th_hi, double lam_lo, double lam_hi,
                              double pt_center, double pt_width, BruteIncumbent& best) {
  for (int k = 0; k < g.n_theta; ++k) {
    const double theta =
        g.n_theta == 1 ? th_lo : th_lo + (th_hi - th_lo) * k / (g.n_theta - 1);
    const double cap = energy_power_cap(p, c, theta);
    if (!(cap > 0.0)) continue;
    double pt_lo = 0.0, pt_hi = cap;
    if (pt_width > 0.0) {  // refinement pass: window around the incumbent
      pt_lo = std::clamp(pt_center - pt_width / 2.0, 0.0, cap);
      pt_hi = std::clamp(pt_center + pt_width / 2.0, 0.0, cap);
    }
    scan_lambda_pt(p, c, theta, g.n_lambda, g.n_pt, lam_lo, lam_hi, pt_lo, pt_hi, best);
  }
}

}  // namespace detail

/// Grid maximizer of the full problem over theta in (theta0, 1), lambda in
/// [0,1] and pt in [0, cap(theta)], with refine_rounds local 10x-shrinking
/// passes around the incumbent. Returns nullopt exactly under the
/// feasibility gate.
inline std::optional<Allocation> brute_force_solve(const SystemParams& p, const ChannelState& c,
                                                   const GridSpec& grid = {}) {
  validate(grid);
  const Feasibility feas = check_feasibility(p, c);
  if (!feas.feasible) return std::nullopt;
  const double theta0 = feas.min_theta;

  detail::BruteIncumbent best;
  // Base pass: the open interior grid theta0 + i*(1-theta0)/(n+1), i=1..n.
  for (int i = 1; i <= grid.n_theta; ++i) {
    const double theta = theta0 + i * (1.0 - theta0) / (grid.n_theta + 1);
    detail::scan_lambda_pt(p, c, theta, grid.n_lambda, grid.n_pt, 0.0, 1.0, 0.0,
                           detail::energy_power_cap(p, c, theta), best);
  }
  const double margin = 1e-9 * (1.0 - theta0);
  for (int round = 1; round <= grid.refine_rounds; ++round) {
    const double shrink = std::pow(10.0, round);
    const double th_w = (1.0 - theta0) / shrink;
    const double lam_w = 1.0 / shrink;
    const double th_lo = std::clamp(best.theta - th_w / 2.0, theta0 + margin, 1.0 - margin);
    const double th_hi = std::clamp(best.theta + th_w / 2.0, theta0 + margin, 1.0 - margin);
    const double lam_lo = std::clamp(best.lambda - lam_w / 2.0, 0.0, 1.0);
    const double lam_hi = std::clamp(best.lambda + lam_w / 2.0, 0.0, 1.0);
    const double pt_w = detail::energy_power_cap(p, c, best.theta) / shrink;
    detail::scan_theta_window(p, c, grid, th_lo, th_hi, lam_lo, lam_hi, best.pt, pt_w, best);
  }
  if (best.tau < 0.0) best = {0.0, 0.0, 0.0, 0.0};  // gate passed; tau = 0 is feasible
  return Allocation{best.tau, best.lambda, best.pt, best.theta};
}

/// 2-D restriction of the grid maximizer at a pinned theta.
inline Allocation brute_force_fixed_theta(const SystemParams& p, const ChannelState& c,
                                          double theta, int n_lambda = 400, int n_pt = 400,
                                          int refine_rounds = 2) {
  const Feasibility feas = check_feasibility(p, c);
  if (!feas.feasible) throw std::domain_error("instance is infeasible: " + feas.reason);
  if (!(theta > feas.min_theta && theta < 1.0))
    throw std::domain_error("time ratio must lie in (theta0, 1)");
  if (n_lambda < 2 || n_pt < 2) throw std::invalid_argument("grid resolutions must be >= 2");

  const double cap = detail::energy_power_cap(p, c, theta);
  detail::BruteIncumbent best;
  detail::scan_lambda_pt(p, c, theta, n_lambda, n_pt, 0.0, 1.0, 0.0, cap, best);
  for (int round = 1; round <= refine_rounds; ++round) {
    const double shrink = std::pow(10.0, round);
    const double lam_lo = std::clamp(best.lambda - 0.5 / shrink, 0.0, 1.0);
    const double lam_hi = std::clamp(best.lambda + 0.5 / shrink, 0.0, 1.0);
    const double pt_w = cap / shrink;
    const double pt_lo = std::clamp(best.pt - pt_w / 2.0, 0.0, cap);
    const double pt_hi = std::clamp(best.pt + pt_w / 2.0, 0.0, cap);
    detail::scan_lambda_pt(p, c, theta, n_lambda, n_pt, lam_lo, lam_hi, pt_lo, pt_hi, best);
  }
  if (best.tau < 0.0) best = {0.0, 0.0, 0.0, theta};
  return Allocation{best.tau, best.lambda, best.pt, theta};
}

struct IpReport {
  double tau_bps = 0.0;
  std::int64_t newton_steps = 0;
  std::int64_t flops = 0;  // 27 per Newton step (3x3 Gaussian elimination)
  std::vector<std::pair<double, double>> barrier_path;  // (barrier weight, tau at center)
};

namespace detail {

// Solves H*x = -g for a 3x3 system by Gaussian elimination with partial
// pivoting; the 27-FLOP step of the comparison.
inline bool solve3(double h[3][3], const double g[3], double out[3]) {
  double a[3][4] = {{h[0][0], h[0][1], h[0][2], -g[0]},
                    {h[1][0], h[1][1], h[1][2], -g[1]},
                    {h[2][0], h[2][1], h[2][2], -g[2]}};
  for (int col = 0; col < 3; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    if (a[pivot][col] == 0.0) return false;
    if (pivot != col)
      for (int k = col; k < 4; ++k) std::swap(a[pivot][k], a[col][k]);
    for (int r = col + 1; r < 3; ++r) {
      const double f = a[r][col] / a[col][col];
      for (int k = col; k < 4; ++k) a[r][k] -= f * a[col][k];
    }
  }
  for (int r = 2; r >= 0; --r) {
    double s = a[r][3];
    for (int k = r + 1; k < 3; ++k) s -= a[r][k] * out[k];
    out[r] = s / a[r][r];
  }
  return true;
}

}  // namespace detail

/// Log-barrier interior-point reference for the fixed-theta subproblem over
/// (tau, lambda, pt). Barrier weight starts at 1 and shrinks 10x per
/// centering stage until the duality-gap surrogate (6 * weight) drops below
/// tol relative to the incumbent rate. Throws convergence_error when Newton
/// cannot make progress.
inline IpReport interior_point_fixed_theta(const SystemParams& p, const ChannelState& c,
                                           double theta, double tol = 1e-8) {
  const Feasibility feas = check_feasibility(p, c);
  if (!feas.feasible) throw std::domain_error("instance is infeasible: " + feas.reason);
  if (!(theta > feas.min_theta && theta < 1.0))
    throw std::domain_error("time ratio must lie in (theta0, 1)");
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be > 0");

  const double s2 = p.noise_power_mw;
  const double qg1 = p.source_power_mw * c.gain_sr;
  const double harvest = harvest_power_mw(p, c);
  const double eps = p.eps_sum();
  const double k1 = theta / (p.sample_period_s * kLn2);
  const double k2 = (1.0 - theta) / (p.sample_period_s * kLn2);
  const double c2 = c.gain_rd / (2.0 * s2);
  const double static_mw =
      theta * p.decoder_static_mw + (1.0 - theta) * p.encoder_static_mw;

  const auto rate1 = [&](double lam) { return k1 * std::log1p(qg1 * lam / ((1.0 + lam) * s2)); };
  const auto rate2 = [&](double pt) { return k2 * std::log1p(c2 * pt); };
  // Constraint values, negative when strictly feasible.
  const auto constraints = [&](const double x[3], double g[6]) {
    const double tau = x[0], lam = x[1], pt = x[2];
    if (!(lam > 0.0 && pt > 0.0 && tau > 0.0)) return false;
    g[0] = tau - rate1(lam);
    g[1] = tau - rate2(pt);
    g[2] = static_mw + eps * tau + pt * (1.0 - theta) - harvest * (1.0 - lam) * theta;
    g[3] = -lam;
    g[4] = -pt;
    g[5] = -tau;
    for (int i = 0; i < 6; ++i)
      if (!(g[i] < 0.0)) return false;
    return true;
  };
  const auto barrier_value = [&](double mu, const double x[3], const double g[6]) {
    double phi = 0.0;
    for (int i = 0; i < 6; ++i) phi -= std::log(-g[i]);
    return -x[0] + mu * phi;
  };

  // Strictly feasible start: the halfway point of the constant-energy-slack
  // family in (lambda, pt), rate backed off from both hop limits.
  const double slack_max = harvest * theta - static_mw;
  double x[3];
  x[1] = slack_max / (4.0 * harvest * theta);
  x[2] = slack_max / (4.0 * (1.0 - theta));
  x[0] = 0.9 * std::min(rate1(x[1]), rate2(x[2]));
  if (eps > 0.0) x[0] = std::min(x[0], 0.5 * (slack_max / 2.0) / eps);
  double g[6];
  if (!constraints(x, g)) throw convergence_error("no strictly feasible start");

  IpReport rep;
  double mu = 1.0;
  for (int stage = 0; stage < 100; ++stage) {
    bool centered = false;
    for (int step = 0; step < 200; ++step) {
      const double lam = x[1], pt = x[2];
      // Slopes and curvatures of the two rate constraints.
      const double s = qg1 * lam / ((1.0 + lam) * s2);
      const double sp = qg1 / (s2 * (1.0 + lam) * (1.0 + lam));
      const double spp = -2.0 * qg1 / (s2 * (1.0 + lam) * (1.0 + lam) * (1.0 + lam));
      const double r1p = k1 * sp / (1.0 + s);
      const double r1pp = k1 * (spp * (1.0 + s) - sp * sp) / ((1.0 + s) * (1.0 + s));
      const double r2p = k2 * c2 / (1.0 + c2 * pt);
      const double r2pp = -k2 * c2 * c2 / ((1.0 + c2 * pt) * (1.0 + c2 * pt));

      const double grad_g[6][3] = {{1.0, -r1p, 0.0},
                                   {1.0, 0.0, -r2p},
                                   {eps, harvest * theta, 1.0 - theta},
                                   {0.0, -1.0, 0.0},
                                   {0.0, 0.0, -1.0},
                                   {-1.0, 0.0, 0.0}};
      double grad[3] = {-1.0, 0.0, 0.0};
      double hess[3][3] = {};
      for (int i = 0; i < 6; ++i) {
        const double inv = -1.0 / g[i];  // 1/(-g_i) > 0
        for (int a = 0; a < 3; ++a) {
          grad[a] += mu * grad_g[i][a] * inv;
          for (int b = 0; b < 3; ++b)
            hess[a][b] += mu * grad_g[i][a] * grad_g[i][b] * inv * inv;
        }
      }
      hess[1][1] += mu * (-r1pp) * (-1.0 / g[0]);
      hess[2][2] += mu * (-r2pp) * (-1.0 / g[1]);

      double dx[3];
      if (!detail::solve3(hess, grad, dx))
        throw convergence_error("singular Newton system");
      ++rep.newton_steps;
      const double decrement2 = -(grad[0] * dx[0] + grad[1] * dx[1] + grad[2] * dx[2]);
      if (decrement2 / 2.0 <= 1e-10) {
        centered = true;
        break;
      }

      const double f0 = barrier_value(mu, x, g);
      const double slope = -decrement2;
      double t = 1.0;
      double xn[3], gn[6];
      for (;;) {
        xn[0] = x[0] + t * dx[0];
        xn[1] = x[1] + t * dx[1];
        xn[2] = x[2] + t * dx[2];
        if (constraints(xn, gn) && barrier_value(mu, xn, gn) <= f0 + 0.25 * t * slope) break;
        t *= 0.5;
        if (t < 1e-14)
          throw convergence_error("backtracking line search failed to reduce the barrier");
      }
      x[0] = xn[0];
      x[1] = xn[1];
      x[2] = xn[2];
      for (int i = 0; i < 6; ++i) g[i] = gn[i];
    }
    if (!centered) throw convergence_error("Newton failed to center within the step limit");
    rep.barrier_path.emplace_back(mu, x[0]);
    if (6.0 * mu <= tol * std::max(x[0], 1e-300)) break;
    mu /= 10.0;
    if (stage == 99) throw convergence_error("barrier stages exhausted");
  }
  rep.tau_bps = x[0];
  rep.flops = 27 * rep.newton_steps;
  return rep;
}

}  // namespace swiptdf
