#include <catch2/catch_amalgamated.hpp>

#include "swiptdf/bounds.hpp"
#include "swiptdf/solver.hpp"
#include "test_util.hpp"

using namespace swiptdf;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
const SystemParams kDefaults{};
const ChannelState kPinned{0.3, 0.1};
}

TEST_CASE("tangent rate bound") {
  CHECK(tangent_rate_bound(kDefaults, kPinned, 0.0) == 0.0);
  CHECK_THAT(tangent_rate_bound(kDefaults, kPinned, 200.0), WithinRel(1000.0, 1e-15));
  CHECK_THAT(tangent_rate_bound(kDefaults, kPinned, 400.0),
             WithinRel(2.0 * tangent_rate_bound(kDefaults, kPinned, 200.0), 1e-15));

  SECTION("dominates the matched rate wherever snr_rd >= 1") {
    // ln2*x >= log(1+x) holds exactly for x >= 1, so the linear form is an
    // upper envelope of the matched rate only from unit SNR upward; below
    // that it crosses under (the missing 1/ln2 of the true tangent).
    testutil::Rng rng(5);
    for (int k = 0; k < 20; ++k) {
      const ChannelState c = testutil::random_feasible_channel(rng);
      const double top = kDefaults.source_power_mw * c.gain_sr / c.gain_rd;
      const double unit_snr_pt = 2.0 * kDefaults.noise_power_mw / c.gain_rd;
      bool crossed_under = false;
      for (int i = 0; i <= 200; ++i) {
        const double pt = top * (i / 200.0);
        const double gap =
            tangent_rate_bound(kDefaults, c, pt) - matched_rate(kDefaults, c, 0.5, pt);
        if (pt >= unit_snr_pt) {
          REQUIRE(gap >= -1e-12 * std::max(1.0, matched_rate(kDefaults, c, 0.5, pt)));
        } else if (pt > 0.0 && gap < 0.0) {
          crossed_under = true;
        }
      }
      if (unit_snr_pt < top * 0.5) CHECK(crossed_under);  // the sub-unit dip is real
    }
  }
}

TEST_CASE("chord harvest bound") {
  const double harvest = harvest_power_mw(kDefaults, kPinned);  // 120
  CHECK_THAT(chord_harvest_bound(kDefaults, kPinned, 0.0), WithinRel(harvest, 1e-15));
  CHECK_THAT(chord_harvest_bound(kDefaults, kPinned, 1500.0), WithinAbs(0.0, 1e-12));
  CHECK_THROWS_AS(chord_harvest_bound(kDefaults, kPinned, 1500.1), std::domain_error);

  SECTION("midpoint sits strictly under the exact harvest term") {
    const double mid = 750.0;  // Q*g1/(2*g2)
    const double lambda = matching_ps_ratio(kDefaults, kPinned, 0.5, mid);
    CHECK_THAT(lambda, WithinRel(1.0 / 3.0, 1e-12));
    const double exact = harvest * (1.0 - lambda);
    CHECK_THAT(chord_harvest_bound(kDefaults, kPinned, mid), WithinRel(harvest / 2.0, 1e-15));
    CHECK(chord_harvest_bound(kDefaults, kPinned, mid) < exact);
  }
  SECTION("dominated by the exact term on the whole domain") {
    testutil::Rng rng(7);
    for (int k = 0; k < 20; ++k) {
      const ChannelState c = testutil::random_feasible_channel(rng);
      const double harvest_c = harvest_power_mw(kDefaults, c);
      const double top = kDefaults.source_power_mw * c.gain_sr / c.gain_rd;
      for (int i = 0; i <= 200; ++i) {
        const double pt = top * (i / 200.0);
        const double exact = harvest_c * (1.0 - matching_ps_ratio(kDefaults, c, 0.5, pt));
        REQUIRE(chord_harvest_bound(kDefaults, c, pt) <= exact + 1e-9 * harvest_c);
      }
    }
  }
}

TEST_CASE("half-theta relay power") {
  CHECK_THAT(half_theta_relay_power(kDefaults, kPinned), WithinRel(48.076923076923077, 1e-13));
  // eta*Q*g1 exactly equals Pd + Pe.
  CHECK_THAT(half_theta_relay_power(kDefaults, ChannelState{0.05, 0.1}), WithinAbs(0.0, 1e-12));
  CHECK(half_theta_relay_power(kDefaults, ChannelState{0.04, 0.1}) < 0.0);
}

TEST_CASE("closed-form rate lower bound") {
  CHECK_THAT(rate_lower_bound(kDefaults, kPinned), WithinRel(310.78753728216196, 1e-12));
  CHECK(rate_lower_bound(kDefaults, ChannelState{0.05, 0.1}) == 0.0);
  CHECK(rate_lower_bound(kDefaults, ChannelState{0.01, 0.1}) == 0.0);
  CHECK_THROWS_AS(rate_lower_bound(kDefaults, ChannelState{0.3, 0.0}), std::domain_error);

  SECTION("nondecreasing in g1") {
    double prev = 0.0;
    for (double g1 : {0.05, 0.1, 0.2, 0.4, 0.8}) {
      const double b = rate_lower_bound(kDefaults, ChannelState{g1, 0.1});
      CHECK(b >= prev);
      prev = b;
    }
  }
}

TEST_CASE("the implied theta = 1/2 point") {
  // The linearized energy balance guarantees feasibility of the implied
  // point only where the linear rate form really dominates the matched rate,
  // i.e. snr_rd(pt) >= 1; below unit SNR the point can overdraw the harvest
  // (and measurably does), while the final bound stays sound against the
  // free-theta optimum via its slack elsewhere.
  testutil::Rng rng(13);
  int positive = 0, guaranteed = 0;
  for (int k = 0; k < 200; ++k) {
    const ChannelState c = testutil::random_feasible_channel(rng);
    const double pt = half_theta_relay_power(kDefaults, c);
    if (!(pt > 0.0)) continue;
    ++positive;
    const double lambda = matching_ps_ratio(kDefaults, c, 0.5, pt);
    const double tau = matched_rate(kDefaults, c, 0.5, pt);
    REQUIRE((lambda >= 0.0 && lambda <= 1.0));
    REQUIRE(tau >= 0.0);
    // The bound is exactly what this point would achieve.
    REQUIRE_THAT(rate_lower_bound(kDefaults, c), WithinRel(tau, 1e-12));
    // Rate constraints hold by construction of the matching ratio.
    REQUIRE(tau - rate_sr(kDefaults, c, lambda, 0.5) <= 1e-9 * std::max(tau, 1.0));
    REQUIRE(tau - rate_rd(kDefaults, c, pt, 0.5) <= 1e-9 * std::max(tau, 1.0));
    if (snr_rd(kDefaults, c, pt) >= 1.0) {
      ++guaranteed;
      const double used = 0.5 * kDefaults.decoder_static_mw +
                          0.5 * kDefaults.encoder_static_mw + kDefaults.eps_sum() * tau +
                          0.5 * pt;
      const double harvested = harvest_power_mw(kDefaults, c) * (1.0 - lambda) * 0.5;
      REQUIRE(used <= harvested + 1e-9 * std::max(harvested, 1.0));
    }
  }
  CHECK(positive > 150);
  CHECK(guaranteed >= 10);  // the unit-SNR regime is the rare corner here
}

TEST_CASE("bound is sound against the solver") {
  testutil::Rng rng(17);
  for (int k = 0; k < 100; ++k) {
    const ChannelState c = testutil::random_feasible_channel(rng);
    const SolveReport rep = solve(kDefaults, c, {200, 1e-12, 1e-8});
    REQUIRE(rep.status == SolveStatus::Feasible);
    REQUIRE(rate_lower_bound(kDefaults, c) <= rep.best.rate_bps);
  }
}

TEST_CASE("bound gap closes as the gains shrink") {
  // The curves converge at small gains: the absolute gap tau* - bound is
  // monotone along a descending gain ladder. (The relative gap moves the
  // other way, since the bound reaches zero at eta*Q*g1 = Pd + Pe while the
  // optimum stays positive.)
  double prev_gap = std::numeric_limits<double>::infinity();
  for (double g : {0.8, 0.4, 0.2, 0.1}) {
    const ChannelState c{g, g};
    const SolveReport rep = solve(kDefaults, c, {300, 1e-12, 1e-8});
    const double gap = rep.best.rate_bps - rate_lower_bound(kDefaults, c);
    REQUIRE(gap >= 0.0);
    REQUIRE(gap < prev_gap);
    prev_gap = gap;
  }
}
