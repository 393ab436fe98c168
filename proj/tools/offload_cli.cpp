// offload: command-line front end for the edge/cloud offloading simulator.
//
//   offload run          --config C --out DIR   one simulation, per-slot records
//   offload gen-trace    --config C --out DIR   synthetic trace (and optional predictions)
//   offload sweep        --config C --out DIR   parameter grid, one row per cell
//   offload oracle-check --config C --out DIR   solver vs exhaustive optimum on small slots
//   offload stability    --config C --out DIR   Q(T)/T at several horizons
//
// Exit codes: 0 ok, 1 config error, 2 runtime error, 3 oracle-size refusal.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <nlohmann/json.hpp>

#include "offload/analysis.hpp"
#include "offload/config.hpp"
#include "offload/errors.hpp"
#include "offload/predictor.hpp"
#include "offload/simulator.hpp"
#include "offload/trace.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace offload;

namespace {

enum ExitCode { kOk = 0, kConfigError = 1, kRuntimeError = 2, kOracleRefusal = 3 };

struct CommonOptions {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<double> V;
  std::optional<std::int64_t> horizon;
  std::optional<std::size_t> num_edge;
  std::optional<std::size_t> num_cloud;
  std::optional<std::string> policy;
  std::optional<std::string> predictor;
  std::optional<double> predictor_mean;
  std::optional<double> predictor_sd;
  std::optional<std::string> predictions;
  std::optional<double> damping;
  std::optional<double> congestion;
  std::optional<int> max_iters;
  bool series = false;
  unsigned threads = 0;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("-c,--config", o.config_path, "Config file (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("-o,--out", o.out_dir, "Output directory")->required();
  cmd->add_option("--seed", o.seed, "Override the master seed");
  cmd->add_option("--V", o.V, "Override the tradeoff weight V");
  cmd->add_option("--horizon", o.horizon, "Override the number of slots T");
  cmd->add_option("--num-edge", o.num_edge, "Override the edge server count N");
  cmd->add_option("--num-cloud", o.num_cloud, "Override the cloud server count U");
  cmd->add_option("--policy", o.policy, "iodcc|greedy_accuracy|greedy_compute|greedy_delay|random");
  cmd->add_option("--predictor", o.predictor, "oracle|constant|noisy|file");
  cmd->add_option("--predictor-mean", o.predictor_mean, "Constant predictor value");
  cmd->add_option("--predictor-sd", o.predictor_sd, "Noisy predictor relative stddev");
  cmd->add_option("--predictions", o.predictions, "Predictions file (task_id,predicted_tokens)");
  cmd->add_option("--damping", o.damping, "IODCC damping factor");
  cmd->add_option("--congestion", o.congestion, "IODCC congestion weight");
  cmd->add_option("--max-iters", o.max_iters, "IODCC iteration cap");
  cmd->add_flag("--series", o.series, "Also write plot-ready series as CSV");
  cmd->add_option("--threads", o.threads, "Worker threads (0 = hardware)");
}

Config resolve_config(const CommonOptions& o) {
  Config c = load_config(o.config_path);
  if (o.seed) c.system.rng_seed = *o.seed;
  if (o.V) c.system.tradeoff_V = *o.V;
  if (o.horizon) c.system.horizon = *o.horizon;
  if (o.num_edge) c.system.num_edge = *o.num_edge;
  if (o.num_cloud) c.system.num_cloud = *o.num_cloud;
  if (o.policy) c.policy.kind = parse_policy_kind(*o.policy);
  if (o.predictor) c.predictor.kind = parse_predictor_kind(*o.predictor);
  if (o.predictor_mean) c.predictor.mean = *o.predictor_mean;
  if (o.predictor_sd) c.predictor.relative_stddev = *o.predictor_sd;
  if (o.predictions) {
    c.predictor.kind = PredictorKind::FromFile;
    c.predictor.path = *o.predictions;
  }
  if (o.damping) c.policy.iodcc.damping = *o.damping;
  if (o.congestion) c.policy.iodcc.congestion_weight = *o.congestion;
  if (o.max_iters) c.policy.iodcc.max_iters = *o.max_iters;
  if (const auto errors = validate_config(c); !errors.empty()) {
    throw ConfigError(fmt::format("invalid config: {}", fmt::join(errors, "; ")));
  }
  return c;
}

fs::path prepare_out(const std::string& dir) {
  fs::path p(dir);
  fs::create_directories(p);
  return p;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void write_json(const fs::path& path, const json& doc) {
  auto out = open_out(path);
  out << doc.dump(2) << '\n';
}

// ---------------------------------------------------------------- run

struct RunOptions {
  CommonOptions common;
  std::string trace_path;
};

int cmd_run(const RunOptions& opts) {
  const Config config = resolve_config(opts.common);
  const Trace trace = opts.trace_path.empty()
                          ? generate_trace(config.system, config.generator, config.system.rng_seed)
                          : load_trace(opts.trace_path);
  const RunReport report = run(config, trace, config.policy, config.predictor);
  const fs::path out = prepare_out(opts.common.out_dir);
  write_report(report, out);
  save_config(config, out / "config.json");

  {
    auto csv = open_out(out / "summary.csv");
    csv << "policy,predictor,seed,V,slots,tasks,drops,mean_zeta,mean_total_queue,lyapunov_reward,"
           "converged_fraction\n";
    csv << fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", report.policy, report.predictor, report.seed, report.V,
                       report.slots.size(), report.tasks, report.drops, report.mean_zeta, report.mean_total_queue,
                       report.lyapunov_reward, report.converged_fraction());
  }
  if (opts.common.series) {
    auto csv = open_out(out / "series_slots.csv");
    csv << "t,zeta,total_queue,max_queue_rate\n";
    for (std::size_t i = 0; i < report.slots.size(); ++i) {
      double total = 0.0;
      for (const auto& s : report.slots[i].servers) total += s.queue_after;
      const auto t = static_cast<std::int64_t>(i + 1);
      csv << fmt::format("{},{},{},{}\n", t, report.slots[i].zeta, total, report.max_queue_rate_at(t));
    }
  }
  std::cout << fmt::format("{} slots, {} tasks, {} dropped; mean zeta {:.4f}, reward {:.2f}\n", report.slots.size(),
                           report.tasks, report.drops, report.mean_zeta, report.lyapunov_reward);
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
  return kOk;
}

// ---------------------------------------------------------------- gen-trace

struct GenOptions {
  CommonOptions common;
  bool predictions = false;
};

int cmd_gen_trace(const GenOptions& opts) {
  const Config config = resolve_config(opts.common);
  const Trace trace = generate_trace(config.system, config.generator, config.system.rng_seed);
  const fs::path out = prepare_out(opts.common.out_dir);
  save_trace(trace, out / "trace.csv");

  if (opts.predictions) {
    if (config.predictor.kind == PredictorKind::FromFile) {
      throw ConfigError("gen-trace cannot emit predictions from a predictions file");
    }
    const auto system = build_system(config);
    const auto predictor = Predictor::from_spec(config.predictor, trace.mean_output_tokens(), config.system.rng_seed);
    PredictionTable table;
    for (const auto& task : tasks_from_trace(trace, system.task_types)) table[task.id] = predictor.predict(task);
    save_predictions(table, out / "predictions.csv");
  }

  std::map<std::size_t, std::size_t> per_type;
  for (const auto& r : trace.rows) ++per_type[r.task_type];
  json types = json::object();
  for (const auto& [k, n] : per_type) types[std::to_string(k)] = n;
  write_json(out / "summary.json", json{{"rows", trace.rows.size()},
                                        {"seed", trace.seed},
                                        {"horizon", config.system.horizon},
                                        {"mean_output_tokens", trace.mean_output_tokens()},
                                        {"rows_per_type", types}});
  std::cout << fmt::format("{} rows over {} slots\n", trace.rows.size(), config.system.horizon);
  return kOk;
}

// ---------------------------------------------------------------- sweep

struct SweepOptions {
  CommonOptions common;
  std::vector<double> V_values;
  std::vector<std::size_t> num_edge;
  std::vector<std::size_t> num_cloud;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> policies;
  std::vector<std::string> predictors;
  int repetitions = 1;
};

std::string cell_row(const SweepCell& c) {
  return fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{}", c.V, c.num_edge, c.num_cloud, c.seed, c.policy,
                     c.predictor, c.repetition, c.lyapunov_reward, c.mean_zeta, c.mean_total_queue,
                     c.final_max_queue_rate, c.drops, c.mean_usage_ratio, c.converged_fraction);
}

int cmd_sweep(const SweepOptions& opts) {
  SweepSpec spec;
  spec.base = resolve_config(opts.common);
  spec.V_values = opts.V_values;
  spec.num_edge = opts.num_edge;
  spec.num_cloud = opts.num_cloud;
  spec.seeds = opts.seeds;
  spec.repetitions = opts.repetitions;
  for (const auto& p : opts.policies) {
    PolicySpec ps = spec.base.policy;
    ps.kind = parse_policy_kind(p);
    spec.policies.push_back(ps);
  }
  for (const auto& p : opts.predictors) {
    PredictorSpec ps = spec.base.predictor;
    ps.kind = parse_predictor_kind(p);
    spec.predictors.push_back(ps);
  }
  if (const auto errors = validate_sweep(spec); !errors.empty()) {
    throw ConfigError(fmt::format("invalid sweep: {}", fmt::join(errors, "; ")));
  }

  const auto cells = run_sweep(spec, opts.common.threads);
  const fs::path out = prepare_out(opts.common.out_dir);
  save_config(spec.base, out / "config.json");
  {
    auto csv = open_out(out / "cells.csv");
    csv << "V,num_edge,num_cloud,seed,policy,predictor,repetition,lyapunov_reward,mean_zeta,mean_total_queue,"
           "final_max_queue_rate,drops,mean_usage_ratio,converged_fraction\n";
    for (const auto& c : cells) csv << cell_row(c) << '\n';
  }
  {
    auto jl = open_out(out / "cells.jsonl");
    for (const auto& c : cells) {
      jl << json{{"V", c.V},
                 {"num_edge", c.num_edge},
                 {"num_cloud", c.num_cloud},
                 {"seed", c.seed},
                 {"policy", c.policy},
                 {"predictor", c.predictor},
                 {"repetition", c.repetition},
                 {"lyapunov_reward", c.lyapunov_reward},
                 {"mean_zeta", c.mean_zeta},
                 {"mean_total_queue", c.mean_total_queue},
                 {"final_max_queue_rate", c.final_max_queue_rate},
                 {"drops", c.drops},
                 {"mean_usage_ratio", c.mean_usage_ratio},
                 {"converged_fraction", c.converged_fraction}}
                .dump()
         << '\n';
    }
  }

  // Group means over seeds and repetitions, keyed by everything else.
  using Key = std::tuple<double, std::size_t, std::size_t, std::string, std::string>;
  std::map<Key, std::vector<const SweepCell*>> groups;
  for (const auto& c : cells) groups[{c.V, c.num_edge, c.num_cloud, c.policy, c.predictor}].push_back(&c);
  {
    auto csv = open_out(out / "summary.csv");
    csv << "V,num_edge,num_cloud,policy,predictor,runs,mean_reward,mean_zeta,mean_total_queue,mean_drops\n";
    for (const auto& [key, members] : groups) {
      double reward = 0, zeta = 0, queue = 0, drops = 0;
      for (const auto* c : members) {
        reward += c->lyapunov_reward;
        zeta += c->mean_zeta;
        queue += c->mean_total_queue;
        drops += static_cast<double>(c->drops);
      }
      const double n = static_cast<double>(members.size());
      const auto& [V, ne, nc, pol, pred] = key;
      csv << fmt::format("{},{},{},{},{},{},{},{},{},{}\n", V, ne, nc, pol, pred, members.size(), reward / n,
                         zeta / n, queue / n, drops / n);
    }
  }
  if (opts.common.series) {
    std::map<double, std::pair<std::vector<double>, std::vector<double>>> byV;
    for (const auto& c : cells) {
      byV[c.V].first.push_back(c.mean_zeta);
      byV[c.V].second.push_back(c.mean_total_queue);
    }
    auto csv = open_out(out / "series_v_tradeoff.csv");
    csv << "V,mean_zeta,mean_total_queue\n";
    for (const auto& [V, vals] : byV) {
      double z = 0, q = 0;
      for (double v : vals.first) z += v;
      for (double v : vals.second) q += v;
      const double n = static_cast<double>(vals.first.size());
      csv << fmt::format("{},{},{}\n", V, z / n, q / n);
    }
  }
  std::cout << fmt::format("{} cells\n", cells.size());
  return kOk;
}

// ---------------------------------------------------------------- oracle-check

struct OracleOptions {
  CommonOptions common;
  std::size_t instances = 100;
  std::size_t tasks = 6;
  std::size_t servers = 3;
  double tolerance = 0.10;
};

int cmd_oracle_check(const OracleOptions& opts) {
  const Config config = resolve_config(opts.common);
  if (opts.tasks > kOracleMaxTasks || opts.servers > kOracleMaxServers) {
    throw OracleSizeError(fmt::format("refusing {} tasks x {} servers; limit is {} x {}", opts.tasks, opts.servers,
                                      kOracleMaxTasks, kOracleMaxServers));
  }
  const auto rows =
      oracle_gap_study(opts.instances, opts.tasks, opts.servers, config.system.rng_seed, config.policy.iodcc);
  const fs::path out = prepare_out(opts.common.out_dir);
  std::size_t within = 0, below = 0, converged = 0;
  double worst = 0.0;
  {
    auto csv = open_out(out / "gaps.csv");
    csv << "instance,seed,oracle_value,iodcc_value,relative_gap,iterations,converged\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& r = rows[i];
      csv << fmt::format("{},{},{},{},{},{},{}\n", i, r.seed, r.oracle_value, r.iodcc_value, r.relative_gap,
                         r.iterations, r.converged ? 1 : 0);
      if (r.relative_gap <= opts.tolerance) ++within;
      if (r.iodcc_value < r.oracle_value) ++below;
      if (r.converged) ++converged;
      worst = std::max(worst, r.relative_gap);
    }
  }
  const double n = rows.empty() ? 1.0 : static_cast<double>(rows.size());
  write_json(out / "summary.json", json{{"instances", rows.size()},
                                        {"tasks", opts.tasks},
                                        {"servers", opts.servers},
                                        {"tolerance", opts.tolerance},
                                        {"fraction_within_tolerance", within / n},
                                        {"below_oracle", below},
                                        {"worst_relative_gap", worst},
                                        {"converged_fraction", converged / n}});
  std::cout << fmt::format("{}/{} within {:.0f}% of optimum, worst gap {:.4f}, {} below optimum\n", within,
                           rows.size(), opts.tolerance * 100, worst, below);
  return kOk;
}

// ---------------------------------------------------------------- stability

struct StabilityOptions {
  CommonOptions common;
  std::vector<std::int64_t> horizons{100, 500, 1000, 2000};
  std::vector<std::uint64_t> seeds;
  double slack = 1.5;
};

int cmd_stability(const StabilityOptions& opts) {
  const Config config = resolve_config(opts.common);
  const auto rows = stability_check(config, opts.horizons, opts.seeds, opts.slack, opts.common.threads);
  const fs::path out = prepare_out(opts.common.out_dir);
  save_config(config, out / "config.json");
  {
    auto csv = open_out(out / "stability.csv");
    csv << "horizon,max_queue_rate\n";
    for (const auto& r : rows) csv << fmt::format("{},{}\n", r.horizon, r.max_queue_rate);
  }
  {
    auto jl = open_out(out / "stability.jsonl");
    for (const auto& r : rows) jl << json{{"horizon", r.horizon}, {"max_queue_rate", r.max_queue_rate}}.dump() << '\n';
  }
  if (opts.common.series) {
    // Dense T vs Q(T)/T from one run per seed at the longest horizon.
    const std::int64_t longest = *std::max_element(opts.horizons.begin(), opts.horizons.end());
    std::vector<std::int64_t> dense;
    for (std::int64_t t = 1; t <= longest; ++t) dense.push_back(t);
    const auto series = stability_check(config, dense, opts.seeds, opts.slack, opts.common.threads);
    auto csv = open_out(out / "series_queue_rate.csv");
    csv << "T,max_queue_rate\n";
    for (const auto& r : series) csv << fmt::format("{},{}\n", r.horizon, r.max_queue_rate);
  }
  write_json(out / "summary.json", json{{"slack", opts.slack},
                                        {"horizons", opts.horizons},
                                        {"first", rows.front().max_queue_rate},
                                        {"last", rows.back().max_queue_rate}});
  for (const auto& r : rows) std::cout << fmt::format("T={:<6} max_j Q_j(T)/T = {:.6f}\n", r.horizon, r.max_queue_rate);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Token-aware edge/cloud LLM offloading simulator"};
  app.require_subcommand(1);

  RunOptions run_opts;
  auto* run_cmd = app.add_subcommand("run", "Simulate one configuration");
  add_common(run_cmd, run_opts.common);
  run_cmd->add_option("--trace", run_opts.trace_path, "Replay this trace CSV instead of generating one")
      ->check(CLI::ExistingFile);

  GenOptions gen_opts;
  auto* gen_cmd = app.add_subcommand("gen-trace", "Generate a synthetic request trace");
  add_common(gen_cmd, gen_opts.common);
  gen_cmd->add_flag("--emit-predictions", gen_opts.predictions,
                    "Also write predictions.csv using the configured predictor");

  SweepOptions sweep_opts;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a parameter grid");
  add_common(sweep_cmd, sweep_opts.common);
  sweep_cmd->add_option("--V-values", sweep_opts.V_values, "V grid")->delimiter(',');
  sweep_cmd->add_option("--edge-values", sweep_opts.num_edge, "N grid")->delimiter(',');
  sweep_cmd->add_option("--cloud-values", sweep_opts.num_cloud, "U grid")->delimiter(',');
  sweep_cmd->add_option("--seeds", sweep_opts.seeds, "Seed list")->delimiter(',');
  sweep_cmd->add_option("--policies", sweep_opts.policies, "Policy list")->delimiter(',');
  sweep_cmd->add_option("--predictors", sweep_opts.predictors, "Predictor list")->delimiter(',');
  sweep_cmd->add_option("--repetitions", sweep_opts.repetitions, "Repetitions per cell");

  OracleOptions oracle_opts;
  auto* oracle_cmd = app.add_subcommand("oracle-check", "Compare IODCC with exhaustive search on small slots");
  add_common(oracle_cmd, oracle_opts.common);
  oracle_cmd->add_option("--instances", oracle_opts.instances, "Number of random instances");
  oracle_cmd->add_option("--tasks", oracle_opts.tasks, "Tasks per instance");
  oracle_cmd->add_option("--servers", oracle_opts.servers, "Servers per instance");
  oracle_cmd->add_option("--tolerance", oracle_opts.tolerance, "Relative gap counted as a hit");

  StabilityOptions stab_opts;
  auto* stab_cmd = app.add_subcommand("stability", "Measure max_j Q_j(T)/T across horizons");
  add_common(stab_cmd, stab_opts.common);
  stab_cmd->add_option("--horizons", stab_opts.horizons, "Horizon list")->delimiter(',');
  stab_cmd->add_option("--seeds", stab_opts.seeds, "Seed list")->delimiter(',');
  stab_cmd->add_option("--slack", stab_opts.slack, "Threshold slack factor (0 keeps config thresholds)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    if (*run_cmd) return cmd_run(run_opts);
    if (*gen_cmd) return cmd_gen_trace(gen_opts);
    if (*sweep_cmd) return cmd_sweep(sweep_opts);
    if (*oracle_cmd) return cmd_oracle_check(oracle_opts);
    if (*stab_cmd) return cmd_stability(stab_opts);
  } catch (const OracleSizeError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kOracleRefusal;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kRuntimeError;
}
