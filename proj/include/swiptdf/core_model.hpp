#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

// Closed-form link model for a dual-hop power-splitting SWIPT relay with
// rate-dependent circuit power. All powers are mW, times are seconds,
// rates are bits/s, dynamic circuit energy is mW per bit/s.

namespace swiptdf {

inline constexpr double kLn2 = std::numbers::ln2;

/// Physical constants of one link instance.
struct SystemParams {
  double source_power_mw = 500.0;        // Q
  double noise_power_mw = 10.0;          // sigma^2
  double sample_period_s = 500e-6;       // T0
  double harvest_eff = 0.8;              // eta, in (0,1]
  double decoder_static_mw = 10.0;       // P_d
  double encoder_static_mw = 10.0;       // P_e
  double decoder_dyn_mw_per_bps = 0.05;  // eps_d
  double encoder_dyn_mw_per_bps = 0.05;  // eps_e

  double eps_sum() const { return decoder_dyn_mw_per_bps + encoder_dyn_mw_per_bps; }
};

/// Channel power gains of one coherence block.
struct ChannelState {
  double gain_sr = 0.0;  // g1 = |h1|^2
  double gain_rd = 0.0;  // g2 = |h2|^2
};

/// One decision point. Zero-initialized it doubles as the infeasible sentinel
/// (time_ratio = 0 marks "no allocation").
struct Allocation {
  double rate_bps = 0.0;        // tau
  double ps_ratio = 0.0;        // lambda, fraction routed to the decoder
  double relay_power_mw = 0.0;  // P_t
  double time_ratio = 0.0;      // theta, source->relay share of the block
};

struct CircuitPowers {
  double decoder_mw = 0.0;
  double encoder_mw = 0.0;
};

inline void validate(const SystemParams& p) {
  if (!(p.source_power_mw > 0.0)) throw std::invalid_argument("source power must be > 0");
  if (!(p.noise_power_mw > 0.0)) throw std::invalid_argument("noise power must be > 0");
  if (!(p.sample_period_s > 0.0)) throw std::invalid_argument("sample period must be > 0");
  if (!(p.harvest_eff > 0.0 && p.harvest_eff <= 1.0))
    throw std::invalid_argument("harvest efficiency must be in (0,1]");
  if (!(p.decoder_static_mw >= 0.0) || !(p.encoder_static_mw >= 0.0))
    throw std::invalid_argument("static circuit power must be >= 0");
  if (!(p.decoder_dyn_mw_per_bps >= 0.0) || !(p.encoder_dyn_mw_per_bps >= 0.0))
    throw std::invalid_argument("dynamic circuit energy must be >= 0");
}

inline void validate(const ChannelState& c) {
  if (!(c.gain_sr >= 0.0) || !(c.gain_rd >= 0.0))
    throw std::invalid_argument("channel gains must be >= 0");
}

/// Harvest-side power scale eta*Q*g1: what the relay harvests per unit theta
/// when the full received signal is routed to the harvester.
inline double harvest_power_mw(const SystemParams& p, const ChannelState& c) {
  return p.harvest_eff * p.source_power_mw * c.gain_sr;
}

/// SNR of the source->relay hop for PS ratio lambda: Q*g1*lambda/((1+lambda)*sigma^2).
inline double snr_sr(const SystemParams& p, const ChannelState& c, double lambda) {
  return p.source_power_mw * c.gain_sr * lambda / ((1.0 + lambda) * p.noise_power_mw);
}

/// SNR of the relay->destination hop: P_t*g2/(2*sigma^2).
inline double snr_rd(const SystemParams& p, const ChannelState& c, double relay_power_mw) {
  return relay_power_mw * c.gain_rd / (2.0 * p.noise_power_mw);
}

/// Achievable source->relay rate (theta/T0)*log2(1+snr_sr), bits/s.
inline double rate_sr(const SystemParams& p, const ChannelState& c, double lambda,
                      double theta) {
  return theta / (p.sample_period_s * kLn2) * std::log1p(snr_sr(p, c, lambda));
}

/// Achievable relay->destination rate ((1-theta)/T0)*log2(1+snr_rd), bits/s.
inline double rate_rd(const SystemParams& p, const ChannelState& c, double relay_power_mw,
                      double theta) {
  return (1.0 - theta) / (p.sample_period_s * kLn2) * std::log1p(snr_rd(p, c, relay_power_mw));
}

/// Decoder and encoder circuit power draw for rate tau at time split theta.
/// The encoder figure includes the relay transmit power itself.
inline CircuitPowers circuit_powers(const SystemParams& p, double tau_bps, double theta,
                                    double relay_power_mw) {
  return {p.decoder_static_mw + p.decoder_dyn_mw_per_bps * tau_bps / theta,
          relay_power_mw + p.encoder_static_mw +
              p.encoder_dyn_mw_per_bps * tau_bps / (1.0 - theta)};
}

/// Largest relay power for which the two hop rates can still be matched with
/// a PS ratio <= 1. Grows like (1+Q*g1/(2*sigma^2))^(theta/(1-theta)) and may
/// legitimately overflow to +inf for theta near 1.
inline double relay_power_ceiling(const SystemParams& p, const ChannelState& c, double theta) {
  if (!(c.gain_rd > 0.0)) throw std::domain_error("relay power ceiling needs g2 > 0");
  const double snr_full = p.source_power_mw * c.gain_sr / (2.0 * p.noise_power_mw);
  return 2.0 * p.noise_power_mw / c.gain_rd *
         std::expm1(theta / (1.0 - theta) * std::log1p(snr_full));
}

/// PS ratio that equalizes the two hop rates at a given relay power: the
/// unique lambda with rate_sr(lambda,theta) = rate_rd(pt,theta). Continuous
/// extension 0 at pt = 0. Throws if pt lies beyond relay_power_ceiling.
inline double matching_ps_ratio(const SystemParams& p, const ChannelState& c, double theta,
                                double relay_power_mw) {
  if (!(relay_power_mw >= 0.0)) throw std::domain_error("relay power must be >= 0");
  if (relay_power_mw == 0.0) return 0.0;
  const double s2 = p.noise_power_mw;
  const double qg1 = p.source_power_mw * c.gain_sr;
  const double u = (1.0 - theta) / theta * std::log1p(snr_rd(p, c, relay_power_mw));
  const double u_max = std::log1p(qg1 / (2.0 * s2));  // rate matching forces lambda = 1 here
  if (u > u_max * (1.0 + 1e-12) + 1e-300)
    throw std::domain_error("relay power exceeds rate-matching ceiling");
  const double lambda = s2 / (qg1 / std::expm1(u) - s2);
  return lambda < 0.0 ? 0.0 : (lambda > 1.0 ? 1.0 : lambda);
}

/// Rate both hops support when matched at this relay power; identical to
/// rate_rd by construction.
inline double matched_rate(const SystemParams& p, const ChannelState& c, double theta,
                           double relay_power_mw) {
  return rate_rd(p, c, relay_power_mw, theta);
}

/// Harvested-minus-consumed power at the rate-matched point for (theta, pt),
/// in mW. Positive means the energy constraint is slack; strictly decreasing
/// in pt on [0, relay_power_ceiling].
inline double energy_balance_residual(const SystemParams& p, const ChannelState& c,
                                      double theta, double relay_power_mw) {
  const double lambda = matching_ps_ratio(p, c, theta, relay_power_mw);
  const double tau = matched_rate(p, c, theta, relay_power_mw);
  return harvest_power_mw(p, c) * theta * (1.0 - lambda) - theta * p.decoder_static_mw -
         (1.0 - theta) * p.encoder_static_mw - p.eps_sum() * tau -
         (1.0 - theta) * relay_power_mw;
}

/// Infimum of time ratios whose harvested energy can cover the static circuit
/// power; the feasible set of time ratios is (min_time_ratio, 1).
inline double min_time_ratio(const SystemParams& p, const ChannelState& c) {
  const double h = harvest_power_mw(p, c);
  if (!(h > p.decoder_static_mw))
    throw std::domain_error("harvested power cannot cover decoder static power");
  return p.encoder_static_mw / (h + p.encoder_static_mw - p.decoder_static_mw);
}

}  // namespace swiptdf
