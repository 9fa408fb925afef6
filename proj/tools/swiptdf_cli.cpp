// Command-line front end: solve | sweep | mc | bound | oracle | bench.
// Emits CSV (17-significant-digit floats, "# key = value" header comments)
// or JSON-lines; exit code 0 on success, 1 on any error, 2 when a solve-like
// command hits an infeasible instance.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "swiptdf/bounds.hpp"
#include "swiptdf/mc_sim.hpp"
#include "swiptdf/oracle.hpp"
#include "swiptdf/solver.hpp"
#include "swiptdf/table_io.hpp"

namespace {

using namespace swiptdf;

constexpr const char* kSolveColumns[] = {
    "g1",     "g2",     "policy", "status", "tau_bits_per_s", "lambda",
    "pt_mw",  "theta",  "theta0", "lower_bound_bits_per_s",
    "bisection_iters_total", "flops"};

struct Cli {
  SystemParams params;
  SolverConfig solver;
  std::uint64_t seed = 1;
  std::string output;
  std::string format = "csv";
  double t0_us = 0.0;
  double eps_sum_override = -1.0;

  OutputFormat output_format() const {
    return format == "json-lines" ? OutputFormat::JsonLines : OutputFormat::Csv;
  }
};

Policy policy_from_name(const std::string& name) {
  if (name == "dynamic") return Policy::Dynamic;
  if (name == "conventional-half") return Policy::ConventionalHalf;
  if (name == "no-cpc") return Policy::NoCpc;
  throw std::invalid_argument("unknown policy '" + name +
                              "' (expected dynamic|conventional-half|no-cpc)");
}

// Writes the table to stdout or to --output; a file that fails mid-write is
// removed rather than left partial.
void emit(const Cli& cli, const Table& table) {
  if (cli.output.empty()) {
    write_table(std::cout, table, cli.output_format());
    return;
  }
  std::ofstream out(cli.output, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open output file " + cli.output);
  try {
    write_table(out, table, cli.output_format());
    out.flush();
    if (!out) throw std::runtime_error("write failed");
  } catch (...) {
    out.close();
    std::error_code ec;
    std::filesystem::remove(cli.output, ec);
    throw;
  }
}

void append_param_meta(const Cli& cli, Table& table) {
  const SystemParams& p = cli.params;
  table.meta.emplace_back("q_mw", fmt_double(p.source_power_mw));
  table.meta.emplace_back("sigma2_mw", fmt_double(p.noise_power_mw));
  table.meta.emplace_back("t0_s", fmt_double(p.sample_period_s));
  table.meta.emplace_back("eta", fmt_double(p.harvest_eff));
  table.meta.emplace_back("pd_mw", fmt_double(p.decoder_static_mw));
  table.meta.emplace_back("pe_mw", fmt_double(p.encoder_static_mw));
  table.meta.emplace_back("eps_d", fmt_double(p.decoder_dyn_mw_per_bps));
  table.meta.emplace_back("eps_e", fmt_double(p.encoder_dyn_mw_per_bps));
  table.meta.emplace_back("grid_levels", std::to_string(cli.solver.grid_levels));
  table.meta.emplace_back("tol_pt_rel", fmt_double(cli.solver.tol_pt_rel));
  table.meta.emplace_back("tol_constraint", fmt_double(cli.solver.tol_constraint));
}

std::vector<Cell> solve_like_row(double g1, double g2, const std::string& policy,
                                 const SolveReport& rep) {
  return {g1,
          g2,
          policy,
          std::string(rep.status == SolveStatus::Feasible ? "feasible" : "infeasible"),
          rep.best.rate_bps,
          rep.best.ps_ratio,
          rep.best.relay_power_mw,
          rep.best.time_ratio,
          rep.theta0,
          rep.lower_bound_bps,
          rep.total_iterations,
          rep.total_flops};
}

int cmd_solve(const Cli& cli, double g1, double g2, const std::string& policy_name,
              bool verify, const std::string& alloc_csv) {
  const ChannelState channel{g1, g2};
  validate(cli.params);
  validate(channel);
  const Policy policy = policy_from_name(policy_name);

  if (!alloc_csv.empty()) {
    Allocation alloc;
    if (std::sscanf(alloc_csv.c_str(), "%lf,%lf,%lf,%lf", &alloc.rate_bps, &alloc.ps_ratio,
                    &alloc.relay_power_mw, &alloc.time_ratio) != 4)
      throw std::invalid_argument("--alloc expects tau,lambda,pt,theta");
    const KktReport kkt = verify_kkt(cli.params, channel, alloc, 1e-6);
    Table table;
    table.meta.emplace_back("command", "solve --alloc");
    append_param_meta(cli, table);
    table.columns = {"g1",      "g2",      "kkt_passed", "stat_tau", "stat_lambda",
                     "stat_pt", "cs_rate_sr", "cs_rate_rd", "cs_energy"};
    table.rows.push_back({g1, g2, std::string(kkt.passed ? "true" : "false"),
                          kkt.stationarity[0], kkt.stationarity[1], kkt.stationarity[2],
                          kkt.comp_slackness[0], kkt.comp_slackness[1],
                          kkt.comp_slackness[2]});
    emit(cli, table);
    return kkt.passed ? 0 : 1;
  }

  const SolveReport rep = solve_policy(cli.params, channel, policy, cli.solver);
  Table table;
  table.meta.emplace_back("command", "solve");
  append_param_meta(cli, table);
  bool kkt_ok = true;
  if (verify && rep.status == SolveStatus::Feasible) {
    const KktReport kkt = verify_kkt(cli.params, channel, rep.best, 1e-6);
    kkt_ok = kkt.passed;
    table.meta.emplace_back("kkt_passed", kkt.passed ? "true" : "false");
  }
  table.columns.assign(std::begin(kSolveColumns), std::end(kSolveColumns));
  table.rows.push_back(solve_like_row(g1, g2, policy_name, rep));
  emit(cli, table);
  if (rep.status == SolveStatus::Infeasible) return 2;
  return kkt_ok ? 0 : 1;
}

int cmd_bound(const Cli& cli, double g1, double g2) {
  const ChannelState channel{g1, g2};
  validate(cli.params);
  validate(channel);
  Table table;
  table.meta.emplace_back("command", "bound");
  append_param_meta(cli, table);
  table.columns = {"g1", "g2", "half_theta_pt_mw", "lower_bound_bits_per_s"};
  table.rows.push_back({g1, g2, half_theta_relay_power(cli.params, channel),
                        rate_lower_bound(cli.params, channel)});
  emit(cli, table);
  return 0;
}

int cmd_oracle(const Cli& cli, double g1, double g2, const GridSpec& grid) {
  const ChannelState channel{g1, g2};
  validate(cli.params);
  validate(channel);
  validate(grid);
  const std::optional<Allocation> best = brute_force_solve(cli.params, channel, grid);

  Table table;
  table.meta.emplace_back("command", "oracle");
  append_param_meta(cli, table);
  table.meta.emplace_back("n_theta", std::to_string(grid.n_theta));
  table.meta.emplace_back("n_lambda", std::to_string(grid.n_lambda));
  table.meta.emplace_back("n_pt", std::to_string(grid.n_pt));
  table.meta.emplace_back("refine_rounds", std::to_string(grid.refine_rounds));
  table.columns.assign(std::begin(kSolveColumns), std::end(kSolveColumns));

  SolveReport rep;  // shaped like a solver report so the row schema matches
  if (best) {
    rep.status = SolveStatus::Feasible;
    rep.best = *best;
    rep.theta0 = min_time_ratio(cli.params, channel);
    rep.lower_bound_bps = rate_lower_bound(cli.params, channel);
  }
  table.rows.push_back(solve_like_row(g1, g2, "oracle", rep));
  emit(cli, table);
  return best ? 0 : 2;
}

int cmd_mc(const Cli& cli, const FadingSpec& fading, std::int64_t trials,
           const std::vector<std::string>& policy_names) {
  validate(cli.params);
  validate(fading);
  Table table;
  table.meta.emplace_back("command", "mc");
  append_param_meta(cli, table);
  table.meta.emplace_back("rice_k", fmt_double(fading.rice_k));
  table.meta.emplace_back("omega1", fmt_double(fading.mean_gain_sr));
  table.meta.emplace_back("omega2", fmt_double(fading.mean_gain_rd));
  table.meta.emplace_back("trials", std::to_string(trials));
  table.meta.emplace_back("seed", std::to_string(cli.seed));
  table.meta.emplace_back("rng", kRngName);
  table.columns.assign(std::begin(kSolveColumns), std::end(kSolveColumns));
  table.columns.push_back("std_error");
  table.columns.push_back("infeasible_fraction");

  for (const std::string& name : policy_names) {
    McConfig mc{trials, cli.seed, policy_from_name(name), cli.solver};
    const McSummary s = average_throughput(cli.params, fading, mc);
    std::vector<Cell> row = {fading.mean_gain_sr,
                             fading.mean_gain_rd,
                             name,
                             std::string(s.infeasible_fraction < 1.0 ? "feasible"
                                                                     : "infeasible"),
                             s.mean_bps,
                             s.mean_ps_ratio,
                             s.mean_relay_power_mw,
                             s.mean_time_ratio,
                             s.mean_theta0,
                             s.mean_lower_bound_bps,
                             s.total_iterations,
                             s.total_flops};
    row.emplace_back(s.std_error_bps);
    row.emplace_back(s.infeasible_fraction);
    table.rows.push_back(std::move(row));
  }
  emit(cli, table);
  return 0;
}

SweepAxis axis_from_name(const std::string& name) {
  if (name == "g1") return SweepAxis::GainSr;
  if (name == "q") return SweepAxis::SourcePower;
  if (name == "eps_sum") return SweepAxis::EpsSum;
  if (name == "pd_pe") return SweepAxis::StaticPower;
  throw std::invalid_argument("unknown sweep axis '" + name +
                              "' (expected g1|q|eps_sum|pd_pe)");
}

int cmd_sweep(const Cli& cli, const std::string& axis_name, const std::vector<double>& values,
              const std::vector<std::string>& policy_names, std::optional<double> g1,
              std::optional<double> g2, std::optional<double> rice_k, double omega1,
              double omega2, std::int64_t trials) {
  validate(cli.params);
  const SweepAxis axis = axis_from_name(axis_name);
  std::vector<Policy> policies;
  for (const std::string& name : policy_names) policies.push_back(policy_from_name(name));

  const bool fixed_mode = g1.has_value() || g2.has_value();
  const bool fading_mode = rice_k.has_value();
  if (fixed_mode == fading_mode)
    throw std::invalid_argument(
        "sweep needs either a fixed channel (--g1 --g2) or fading (--k ...)");

  Table table;
  table.meta.emplace_back("command", "sweep");
  append_param_meta(cli, table);
  table.meta.emplace_back("axis", axis_name);

  std::vector<SweepRow> rows;
  if (fixed_mode) {
    if (!g2) throw std::invalid_argument("fixed-channel sweep needs --g2");
    if (!g1 && axis != SweepAxis::GainSr)
      throw std::invalid_argument("fixed-channel sweep needs --g1 unless the axis is g1");
    const ChannelState channel{g1.value_or(0.0), *g2};
    if (axis != SweepAxis::GainSr) validate(channel);
    table.meta.emplace_back("g1", fmt_double(channel.gain_sr));
    table.meta.emplace_back("g2", fmt_double(channel.gain_rd));
    rows = sweep_fixed(cli.params, channel, axis, values, policies, cli.solver);
  } else {
    const FadingSpec fading{*rice_k, omega1, omega2};
    validate(fading);
    table.meta.emplace_back("rice_k", fmt_double(fading.rice_k));
    table.meta.emplace_back("omega1", fmt_double(fading.mean_gain_sr));
    table.meta.emplace_back("omega2", fmt_double(fading.mean_gain_rd));
    table.meta.emplace_back("trials", std::to_string(trials));
    table.meta.emplace_back("seed", std::to_string(cli.seed));
    table.meta.emplace_back("rng", kRngName);
    const McConfig mc{trials, cli.seed, Policy::Dynamic, cli.solver};
    rows = sweep_fading(cli.params, fading, axis, values, policies, mc);
  }

  table.columns = {"axis_value"};
  table.columns.insert(table.columns.end(), std::begin(kSolveColumns),
                       std::end(kSolveColumns));
  table.columns.push_back("std_error");
  table.columns.push_back("infeasible_fraction");
  for (const SweepRow& r : rows) {
    std::vector<Cell> cells = {r.axis_value};
    cells.emplace_back(r.gain_sr);
    cells.emplace_back(r.gain_rd);
    cells.emplace_back(std::string(policy_name(r.policy)));
    cells.emplace_back(
        std::string(r.status == SolveStatus::Feasible ? "feasible" : "infeasible"));
    cells.emplace_back(r.tau_bps);
    cells.emplace_back(r.ps_ratio);
    cells.emplace_back(r.relay_power_mw);
    cells.emplace_back(r.time_ratio);
    cells.emplace_back(r.theta0);
    cells.emplace_back(r.lower_bound_bps);
    cells.emplace_back(r.iterations);
    cells.emplace_back(r.flops);
    cells.emplace_back(r.std_error_bps);
    cells.emplace_back(r.infeasible_fraction);
    table.rows.push_back(std::move(cells));
  }
  emit(cli, table);
  return 0;
}

int cmd_bench(Cli cli, const std::string& preset, std::vector<double> g1_values,
              double g2_flag, double ip_tol) {
  double g2 = g2_flag;
  if (preset == "default") {
    cli.params.decoder_static_mw = cli.params.encoder_static_mw = 10.0;
    cli.params.decoder_dyn_mw_per_bps = cli.params.encoder_dyn_mw_per_bps = 0.05;
    if (g2 <= 0.0) g2 = 0.3;
  } else if (preset == "rate-heavy") {
    cli.params.decoder_static_mw = cli.params.encoder_static_mw = 5.0;
    cli.params.decoder_dyn_mw_per_bps = cli.params.encoder_dyn_mw_per_bps = 5.0;
    if (g2 <= 0.0) g2 = 0.1;
  } else {
    throw std::invalid_argument("unknown preset '" + preset +
                                "' (expected default|rate-heavy)");
  }
  validate(cli.params);
  if (g1_values.empty()) g1_values = {0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 1.0};

  Table table;
  table.meta.emplace_back("command", "bench");
  append_param_meta(cli, table);
  table.meta.emplace_back("preset", preset);
  table.meta.emplace_back("g2", fmt_double(g2));
  table.meta.emplace_back("ip_tol", fmt_double(ip_tol));
  table.columns = {"g1", "flops_bisection", "flops_ip", "ratio"};

  for (const double g1 : g1_values) {
    const ChannelState channel{g1, g2};
    const SolveReport rep = solve(cli.params, channel, cli.solver);
    if (rep.status != SolveStatus::Feasible)
      throw std::invalid_argument("bench instance g1=" + fmt_double(g1) + " is infeasible");
    std::int64_t ip_flops = 0;
    for (const GridPointDiag& d : rep.grid)
      ip_flops += interior_point_fixed_theta(cli.params, channel, d.theta, ip_tol).flops;
    table.rows.push_back({g1, rep.total_flops, ip_flops,
                          static_cast<double>(ip_flops) /
                              static_cast<double>(rep.total_flops)});
  }
  emit(cli, table);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  Cli cli;
  CLI::App app{"Rate, power-split and time-ratio allocation for a dual-hop SWIPT"
               " decode-and-forward relay with rate-dependent circuit power"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config")->description("flat key = value file; flags take precedence");

  app.add_option("--q", cli.params.source_power_mw, "source transmit power, mW");
  app.add_option("--sigma2", cli.params.noise_power_mw, "noise power, mW");
  auto* t0_opt = app.add_option("--t0", cli.params.sample_period_s, "sample period, s");
  auto* t0us_opt = app.add_option("--t0-us", cli.t0_us, "sample period, microseconds");
  t0us_opt->excludes(t0_opt);
  app.add_option("--eta", cli.params.harvest_eff, "harvesting efficiency, (0,1]");
  app.add_option("--pd", cli.params.decoder_static_mw, "decoder static power, mW");
  app.add_option("--pe", cli.params.encoder_static_mw, "encoder static power, mW");
  auto* epsd_opt =
      app.add_option("--eps-d", cli.params.decoder_dyn_mw_per_bps, "decoder mW per bit/s");
  auto* epse_opt =
      app.add_option("--eps-e", cli.params.encoder_dyn_mw_per_bps, "encoder mW per bit/s");
  auto* epssum_opt = app.add_option("--eps-sum", cli.eps_sum_override,
                                    "total dynamic circuit power, split evenly");
  epssum_opt->excludes(epsd_opt)->excludes(epse_opt);
  app.add_option("--n", cli.solver.grid_levels, "time-ratio grid levels");
  app.add_option("--tol-pt-rel", cli.solver.tol_pt_rel, "bisection relative tolerance");
  app.add_option("--tol-constraint", cli.solver.tol_constraint, "tightness tolerance");
  app.add_option("--seed", cli.seed, "campaign seed")->envname("SWIPT_SEED");
  app.add_option("--output,-o", cli.output, "output file (default stdout)");
  app.add_option("--format", cli.format, "csv|json-lines")
      ->check(CLI::IsMember({"csv", "json-lines"}));

  // solve
  double g1 = 0.0, g2 = 0.0;
  std::string policy = "dynamic", alloc_csv;
  bool verify = false;
  auto* solve_cmd = app.add_subcommand("solve", "allocate for one channel");
  solve_cmd->add_option("--g1", g1, "S-R channel power gain")->required();
  solve_cmd->add_option("--g2", g2, "R-D channel power gain")->required();
  solve_cmd->add_option("--policy", policy, "dynamic|conventional-half|no-cpc");
  solve_cmd->add_flag("--verify", verify, "check first-order optimality of the result");
  solve_cmd->add_option("--alloc", alloc_csv, "verify this tau,lambda,pt,theta instead");

  // bound
  auto* bound_cmd = app.add_subcommand("bound", "closed-form rate lower bound");
  bound_cmd->add_option("--g1", g1, "S-R channel power gain")->required();
  bound_cmd->add_option("--g2", g2, "R-D channel power gain")->required();

  // oracle
  GridSpec grid;
  auto* oracle_cmd = app.add_subcommand("oracle", "grid maximizer of the raw constraints");
  oracle_cmd->add_option("--g1", g1, "S-R channel power gain")->required();
  oracle_cmd->add_option("--g2", g2, "R-D channel power gain")->required();
  oracle_cmd->add_option("--n-theta", grid.n_theta, "time-ratio grid size");
  oracle_cmd->add_option("--n-lambda", grid.n_lambda, "PS-ratio grid size");
  oracle_cmd->add_option("--n-pt", grid.n_pt, "relay-power grid size");
  oracle_cmd->add_option("--refine", grid.refine_rounds, "local refinement rounds");

  // mc
  double rice_k = 1.0, omega1 = 0.4, omega2 = 0.4;
  std::int64_t trials = 10000;
  std::vector<std::string> policies{"dynamic"};
  auto* mc_cmd = app.add_subcommand("mc", "Monte Carlo fading campaign");
  mc_cmd->add_option("--k", rice_k, "Rice factor")->required();
  mc_cmd->add_option("--omega1", omega1, "mean S-R gain");
  mc_cmd->add_option("--omega2", omega2, "mean R-D gain");
  mc_cmd->add_option("--trials", trials, "number of channel draws");
  mc_cmd->add_option("--policy", policies, "one row per policy")->delimiter(',');

  // sweep
  std::string axis;
  std::vector<double> values;
  auto* sweep_cmd = app.add_subcommand("sweep", "one row per axis value per policy");
  sweep_cmd->add_option("--axis", axis, "g1|q|eps_sum|pd_pe")->required();
  sweep_cmd->add_option("--values", values, "axis values, monotone")
      ->required()
      ->delimiter(',');
  sweep_cmd->add_option("--policy", policies, "policies to sweep")->delimiter(',');
  double sweep_g1 = -1.0, sweep_g2 = -1.0, sweep_k = -1.0;
  auto* sg1 = sweep_cmd->add_option("--g1", sweep_g1, "fixed S-R gain");
  auto* sg2 = sweep_cmd->add_option("--g2", sweep_g2, "fixed R-D gain");
  auto* sk = sweep_cmd->add_option("--k", sweep_k, "Rice factor (fading mode)");
  sweep_cmd->add_option("--omega1", omega1, "mean S-R gain (fading mode)");
  sweep_cmd->add_option("--omega2", omega2, "mean R-D gain (fading mode)");
  sweep_cmd->add_option("--trials", trials, "draws per row (fading mode)");
  sk->excludes(sg1)->excludes(sg2);

  // bench
  std::string preset = "default";
  std::vector<double> bench_g1;
  double bench_g2 = -1.0, ip_tol = 1e-8;
  auto* bench_cmd = app.add_subcommand("bench", "bisection vs interior-point FLOP counts");
  bench_cmd->add_option("--preset", preset, "default|rate-heavy");
  bench_cmd->add_option("--g1-values", bench_g1, "g1 samples")->delimiter(',');
  bench_cmd->add_option("--g2", bench_g2, "override the preset's g2");
  bench_cmd->add_option("--ip-tol", ip_tol, "interior-point relative gap tolerance");

  try {
    app.parse(argc, argv);
    if (*t0us_opt) cli.params.sample_period_s = cli.t0_us * 1e-6;
    if (*epssum_opt) {
      cli.params.decoder_dyn_mw_per_bps = cli.eps_sum_override / 2.0;
      cli.params.encoder_dyn_mw_per_bps = cli.eps_sum_override / 2.0;
    }
    validate(cli.solver);

    if (solve_cmd->parsed()) return cmd_solve(cli, g1, g2, policy, verify, alloc_csv);
    if (bound_cmd->parsed()) return cmd_bound(cli, g1, g2);
    if (oracle_cmd->parsed()) return cmd_oracle(cli, g1, g2, grid);
    if (mc_cmd->parsed())
      return cmd_mc(cli, FadingSpec{rice_k, omega1, omega2}, trials, policies);
    if (sweep_cmd->parsed())
      return cmd_sweep(cli, axis, values, policies,
                       *sg1 ? std::optional<double>(sweep_g1) : std::nullopt,
                       *sg2 ? std::optional<double>(sweep_g2) : std::nullopt,
                       *sk ? std::optional<double>(sweep_k) : std::nullopt, omega1, omega2,
                       trials);
    if (bench_cmd->parsed()) return cmd_bench(cli, preset, bench_g1, bench_g2, ip_tol);
    return 1;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
