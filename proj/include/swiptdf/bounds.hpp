#pragma once

#include "swiptdf/core_model.hpp"

// Closed-form lower bound on the optimal source rate, built from a feasible
// point at theta = 1/2: a tangent over-estimate of the matched rate and a
// chord under-estimate of the harvested power linearize the energy balance,
// whose root then gives a conservative rate.

namespace swiptdf {

/// Tangent-at-zero upper bound g2*pt/(4*T0*sigma^2) on matched_rate(theta=1/2, pt).
inline double tangent_rate_bound(const SystemParams& p, const ChannelState& c,
                                 double relay_power_mw) {
  return c.gain_rd * relay_power_mw / (4.0 * p.sample_period_s * p.noise_power_mw);
}

/// Chord lower bound eta*(Q*g1 - pt*g2) on the exact harvested power
/// eta*Q*g1*(1 - matching_ps_ratio(theta=1/2, pt)), valid on [0, Q*g1/g2].
inline double chord_harvest_bound(const SystemParams& p, const ChannelState& c,
                                  double relay_power_mw) {
  const double qg1 = p.source_power_mw * c.gain_sr;
  // One-ulp slack so the endpoint pt = Q*g1/g2 computed in double is inside.
  if (!(relay_power_mw * c.gain_rd <= qg1 * (1.0 + 1e-12)))
    throw std::domain_error("chord bound domain is [0, Q*g1/g2]");
  return p.harvest_eff * (qg1 - relay_power_mw * c.gain_rd);
}

/// Relay power solving the linearized theta = 1/2 energy balance. May be
/// negative when eta*Q*g1 < P_d + P_e; not clamped here.
inline double half_theta_relay_power(const SystemParams& p, const ChannelState& c) {
  const double num = harvest_power_mw(p, c) - p.decoder_static_mw - p.encoder_static_mw;
  const double den = 1.0 + p.harvest_eff * c.gain_rd +
                     p.eps_sum() * c.gain_rd / (2.0 * p.sample_period_s * p.noise_power_mw);
  return num / den;
}

/// Closed-form lower bound on the optimal source rate, bits/s. Zero when
/// eta*Q*g1 <= P_d + P_e.
inline double rate_lower_bound(const SystemParams& p, const ChannelState& c) {
  if (!(c.gain_rd > 0.0)) throw std::domain_error("rate lower bound needs g2 > 0");
  const double num = harvest_power_mw(p, c) - p.decoder_static_mw - p.encoder_static_mw;
  if (!(num > 0.0)) return 0.0;
  const double den = 2.0 * p.noise_power_mw / c.gain_rd +
                     2.0 * p.noise_power_mw * p.harvest_eff + p.eps_sum() / p.sample_period_s;
  return std::log1p(num / den) / (2.0 * p.sample_period_s * kLn2);
}

}  // namespace swiptdf
