#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>

#include "swiptdf/mc_sim.hpp"
#include "test_util.hpp"

using namespace swiptdf;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
const SystemParams kDefaults{};

double rician_variance(double k, double omega) {
  return omega * omega * (2.0 * k + 1.0) / ((k + 1.0) * (k + 1.0));
}
}  // namespace

TEST_CASE("rician sample mean hits the configured gain") {
  const int n = 100000;
  for (double k : {0.0, 1.0, 3.0}) {
    const double omega = 0.4;
    auto eng = substream_engine(99, 0);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += sample_rician_gain(k, omega, eng);
    const double mean = sum / n;
    const double se = std::sqrt(rician_variance(k, omega) / n);
    INFO("K = " << k);
    CHECK_THAT(mean, WithinAbs(omega, 3.0 * se));
  }
}

TEST_CASE("zero rice factor gives exponential gains") {
  const int n = 100000;
  const double omega = 0.7;
  auto eng = substream_engine(123, 5);
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double g = sample_rician_gain(0.0, omega, eng);
    sum += g;
    sum2 += g * g;
  }
  const double m1 = sum / n, m2 = sum2 / n;
  CHECK_THAT(m1, WithinAbs(omega, 3.0 * omega / std::sqrt(n)));
  // Exponential second moment 2*omega^2; Var(g^2) = 20*omega^4.
  CHECK_THAT(m2, WithinAbs(2.0 * omega * omega,
                           3.0 * omega * omega * std::sqrt(20.0 / n)));
}

TEST_CASE("huge rice factor degenerates to the mean") {
  auto eng = substream_engine(7, 0);
  for (int i = 0; i < 100; ++i)
    REQUIRE_THAT(sample_rician_gain(1e9, 0.4, eng), WithinRel(0.4, 1e-3));
}

TEST_CASE("channel draws depend only on seed and trial index") {
  const FadingSpec f{2.0, 0.4, 0.4};
  const ChannelState a = channel_for_trial(f, 42, 7);
  const ChannelState b = channel_for_trial(f, 42, 7);
  CHECK(a.gain_sr == b.gain_sr);
  CHECK(a.gain_rd == b.gain_rd);
  const ChannelState c = channel_for_trial(f, 42, 8);
  CHECK(a.gain_sr != c.gain_sr);
  const ChannelState d = channel_for_trial(f, 43, 7);
  CHECK(a.gain_sr != d.gain_sr);
}

TEST_CASE("policies") {
  SECTION("no-cpc is feasible for any positive gains") {
    const SolveReport rep =
        solve_policy(kDefaults, ChannelState{1e-6, 1e-6}, Policy::NoCpc, {50, 1e-9, 1e-8});
    CHECK(rep.status == SolveStatus::Feasible);
    CHECK(rep.theta0 == 0.0);
  }
  SECTION("conventional half needs theta0 below one half") {
    // Gate passes (eta*Q*g1 = 12 > 10) but theta0 = 10/12 > 1/2.
    const ChannelState c{0.03, 0.5};
    CHECK(solve_policy(kDefaults, c, Policy::ConventionalHalf).status ==
          SolveStatus::Infeasible);
    CHECK(solve_policy(kDefaults, c, Policy::Dynamic).status == SolveStatus::Feasible);
  }
  SECTION("conventional half pins the time ratio") {
    const SolveReport rep =
        solve_policy(kDefaults, ChannelState{0.3, 0.1}, Policy::ConventionalHalf);
    REQUIRE(rep.status == SolveStatus::Feasible);
    CHECK(rep.best.time_ratio == 0.5);
    CHECK(rep.grid.size() == 1);
    CHECK(rep.total_flops == 3 * rep.total_iterations);
  }
  SECTION("pointwise dominance across policies") {
    const FadingSpec f{1.0, 0.4, 0.4};
    for (std::int64_t i = 0; i < 30; ++i) {
      const ChannelState ch = channel_for_trial(f, 2024, i);
      const double dyn = solve_policy(kDefaults, ch, Policy::Dynamic).best.rate_bps;
      const double half = solve_policy(kDefaults, ch, Policy::ConventionalHalf).best.rate_bps;
      const double ideal = solve_policy(kDefaults, ch, Policy::NoCpc).best.rate_bps;
      REQUIRE(dyn >= half - 1e-6 * std::max(half, 1.0));
      REQUIRE(ideal >= dyn - 1e-6 * std::max(dyn, 1.0));
    }
  }
}

TEST_CASE("average throughput campaign") {
  const FadingSpec f{1.0, 0.4, 0.4};

  SECTION("rejects empty campaigns") {
    CHECK_THROWS_AS(average_throughput(kDefaults, f, McConfig{0, 1, Policy::Dynamic, {}}),
                    std::invalid_argument);
  }
  SECTION("single trial has zero error bar") {
    const McConfig mc{1, 11, Policy::Dynamic, {200, 1e-12, 1e-8}};
    const McSummary s = average_throughput(kDefaults, f, mc);
    const ChannelState ch = channel_for_trial(f, 11, 0);
    const SolveReport rep = solve_policy(kDefaults, ch, Policy::Dynamic, mc.solver);
    CHECK(s.mean_bps == rep.best.rate_bps);
    CHECK(s.std_error_bps == 0.0);
  }
  SECTION("same seed reproduces bit-identical results") {
    const McConfig mc{200, 77, Policy::Dynamic, {100, 1e-12, 1e-8}};
    const McSummary a = average_throughput(kDefaults, f, mc);
    const McSummary b = average_throughput(kDefaults, f, mc);
    CHECK(a.mean_bps == b.mean_bps);
    CHECK(a.std_error_bps == b.std_error_bps);
    CHECK(a.infeasible_fraction == b.infeasible_fraction);
  }
  SECTION("results do not depend on the thread count") {
    const McConfig mc{97, 5, Policy::Dynamic, {100, 1e-12, 1e-8}};
    setenv("SWIPTDF_THREADS", "1", 1);
    const McSummary a = average_throughput(kDefaults, f, mc);
    setenv("SWIPTDF_THREADS", "4", 1);
    const McSummary b = average_throughput(kDefaults, f, mc);
    unsetenv("SWIPTDF_THREADS");
    CHECK(a.mean_bps == b.mean_bps);
    CHECK(a.std_error_bps == b.std_error_bps);
    CHECK(a.mean_time_ratio == b.mean_time_ratio);
  }
}

TEST_CASE("infeasible fraction moves the right way") {
  // Common substreams across ladder points: gains scale with the mean, so
  // the per-draw gate indicator is monotone and the fraction follows exactly.
  const McConfig mc{300, 31, Policy::Dynamic, {50, 1e-9, 1e-8}};
  double prev = 1.1;
  for (double omega1 : {0.03, 0.06, 0.12, 0.3}) {
    const FadingSpec f{0.0, omega1, 0.4};
    const double frac = average_throughput(kDefaults, f, mc).infeasible_fraction;
    REQUIRE(frac <= prev);
    prev = frac;
  }
  prev = 1.1;
  for (double q : {120.0, 250.0, 500.0, 1500.0}) {
    SystemParams p = kDefaults;
    p.source_power_mw = q;
    const FadingSpec f{0.0, 0.05, 0.4};
    const double frac = average_throughput(p, f, mc).infeasible_fraction;
    REQUIRE(frac <= prev);
    prev = frac;
  }
}

TEST_CASE("fixed-channel sweep") {
  const std::vector<Policy> policies{Policy::Dynamic};
  SECTION("single value equals a direct solve") {
    const std::vector<double> values{0.3};
    const auto rows = sweep_fixed(kDefaults, ChannelState{0.0, 0.1}, SweepAxis::GainSr,
                                  values, policies, {500, 1e-12, 1e-8});
    REQUIRE(rows.size() == 1);
    const SolveReport rep = solve(kDefaults, ChannelState{0.3, 0.1});
    CHECK(rows[0].tau_bps == rep.best.rate_bps);
    CHECK(rows[0].time_ratio == rep.best.time_ratio);
    CHECK(rows[0].flops == rep.total_flops);
    CHECK(rows[0].std_error_bps == 0.0);
    CHECK(rows[0].infeasible_fraction == 0.0);
  }
  SECTION("axis values must be monotone and nonempty") {
    const std::vector<double> bad{0.1, 0.3, 0.2};
    CHECK_THROWS_AS(sweep_fixed(kDefaults, ChannelState{0.0, 0.1}, SweepAxis::GainSr, bad,
                                policies, {}),
                    std::invalid_argument);
    CHECK_THROWS_AS(sweep_fixed(kDefaults, ChannelState{0.0, 0.1}, SweepAxis::GainSr, {},
                                policies, {}),
                    std::invalid_argument);
  }
  SECTION("infeasible axis points produce sentinel rows") {
    const std::vector<double> values{0.01, 0.3};
    const auto rows = sweep_fixed(kDefaults, ChannelState{0.0, 0.1}, SweepAxis::GainSr,
                                  values, policies, {100, 1e-12, 1e-8});
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].status == SolveStatus::Infeasible);
    CHECK(rows[0].tau_bps == 0.0);
    CHECK(rows[0].infeasible_fraction == 1.0);
    CHECK(rows[1].status == SolveStatus::Feasible);
  }
}

TEST_CASE("fading sweep shape and common randomness") {
  const std::vector<Policy> policies{Policy::Dynamic, Policy::ConventionalHalf};
  const std::vector<double> eps{0.02, 0.1};
  const McConfig mc{60, 13, Policy::Dynamic, {100, 1e-12, 1e-8}};
  const auto rows =
      sweep_fading(kDefaults, FadingSpec{1.0, 0.4, 0.4}, SweepAxis::EpsSum, eps, policies, mc);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].axis_value == 0.02);
  CHECK(rows[0].policy == Policy::Dynamic);
  CHECK(rows[1].policy == Policy::ConventionalHalf);
  CHECK(rows[2].axis_value == 0.1);
  // Same substreams and a harder instance: the dynamic mean cannot rise.
  CHECK(rows[2].tau_bps <= rows[0].tau_bps);
}
