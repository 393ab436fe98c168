#include "offload/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "offload/errors.hpp"
#include "offload/iodcc.hpp"
#include "offload/rng.hpp"

namespace offload {

namespace {

// Runs fn(0..n-1) on up to `threads` workers; results are written by index so
// ordering never depends on scheduling.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> workers;
  for (unsigned w = 0; w < threads; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  workers.clear();
  if (failure) std::rethrow_exception(failure);
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double stddev_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

OracleResult brute_force_slot(const SlotState& state) {
  const std::size_t n = state.num_tasks();
  const std::size_t m = state.num_servers();
  if (n > kOracleMaxTasks || m > kOracleMaxServers) {
    throw OracleSizeError(fmt::format("instance has {} tasks and {} servers; exhaustive search supports at most {} "
                                      "tasks and {} servers",
                                      n, m, kOracleMaxTasks, kOracleMaxServers));
  }
  // Feasible choices per task; a task with none is dropped in every candidate.
  std::vector<std::vector<std::optional<ServerId>>> choices(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (ServerId j = 0; j < m; ++j) {
      if (state.feasible(i, j)) choices[i].push_back(j);
    }
    if (choices[i].empty()) choices[i].push_back(std::nullopt);
  }

  OracleResult best;
  best.value = kInfinity;
  std::vector<std::size_t> digit(n, 0);
  Assignment candidate;
  candidate.server.resize(n);
  while (true) {
    for (std::size_t i = 0; i < n; ++i) candidate.server[i] = choices[i][digit[i]];
    const double value = slot_objective(state, candidate);
    if (value < best.value) {
      best.value = value;
      best.assignment = candidate;
    }
    // Odometer with the last task as the fastest digit: lexicographic order.
    std::size_t pos = n;
    while (pos > 0 && ++digit[pos - 1] == choices[pos - 1].size()) {
      digit[pos - 1] = 0;
      --pos;
    }
    if (pos == 0) break;
  }
  return best;
}

SlotInstance random_slot_instance(std::uint64_t seed, std::size_t num_tasks, std::size_t num_servers) {
  constexpr std::size_t kTypes = 3;
  constexpr std::size_t kClients = 2;
  auto rng = make_rng(seed, Stream::Instance);
  SlotInstance inst;
  inst.V = 50.0;
  inst.delta = 2.0;
  inst.min_rate = 0.2;
  inst.drop_delay = 100.0;

  const std::size_t num_edge = (num_servers + 1) / 2;
  for (ServerId j = 0; j < num_servers; ++j) {
    Server s;
    s.id = j;
    s.tier = j < num_edge ? Tier::Edge : Tier::Cloud;
    const bool edge = s.tier == Tier::Edge;
    s.capacity = edge ? uniform(rng, 2.5, 5.0) : uniform(rng, 5.0, 7.5);
    s.threshold = uniform(rng, 0.4, 0.8);
    s.backlog = uniform(rng, 0.0, 10.0);
    for (std::size_t k = 0; k < kTypes; ++k) {
      s.accuracy.push_back(edge ? uniform(rng, 0.1, 0.5) : uniform(rng, 0.6, 1.0));
    }
    inst.servers.push_back(std::move(s));
    inst.queues.push_back(uniform(rng, 0.0, 50.0));
  }

  inst.links = LinkState(kClients, num_servers);
  for (std::size_t c = 0; c < kClients; ++c) {
    for (ServerId j = 0; j < num_servers; ++j) {
      const bool edge = j < num_edge;
      inst.links.set(c, j, uniform(rng, 0.1, 3.0), edge ? uniform(rng, 0.05, 0.2) : uniform(rng, 0.5, 1.0));
    }
  }

  for (std::size_t i = 0; i < num_tasks; ++i) {
    Task t;
    t.id = i;
    t.client = i % kClients;
    t.type = std::uniform_int_distribution<std::size_t>(0, kTypes - 1)(rng);
    t.intra_slot_rank = i;
    t.data_size = uniform(rng, 0.2, 3.0);
    t.delay_sensitivity = uniform(rng, 0.5, 1.0);
    t.accuracy_sensitivity = uniform(rng, 0.5, 1.0);
    inst.tasks.push_back(t);
    inst.workloads.push_back(uniform(rng, 1.0, 15.0));
  }
  return inst;
}

std::vector<GapRow> oracle_gap_study(std::size_t instances, std::size_t num_tasks, std::size_t num_servers,
                                     std::uint64_t seed, const IodccParams& params) {
  if (num_tasks > kOracleMaxTasks || num_servers > kOracleMaxServers) {
    throw OracleSizeError(fmt::format("oracle check supports at most {} tasks and {} servers", kOracleMaxTasks,
                                      kOracleMaxServers));
  }
  std::vector<GapRow> rows;
  rows.reserve(instances);
  for (std::size_t s = 0; s < instances; ++s) {
    GapRow row;
    row.seed = derive_seed(seed, Stream::Instance, s);
    const SlotInstance inst = random_slot_instance(row.seed, num_tasks, num_servers);
    const SlotState state = inst.view();
    const OracleResult oracle = brute_force_slot(state);
    const IodccResult solved = iodcc_solve(state, params);
    row.oracle_value = oracle.value;
    row.iodcc_value = slot_objective(state, solved.assignment);
    row.relative_gap = (row.iodcc_value - row.oracle_value) / std::abs(row.oracle_value);
    row.iterations = solved.iterations;
    row.converged = solved.converged;
    rows.push_back(row);
  }
  return rows;
}

std::vector<std::string> validate_sweep(const SweepSpec& spec) {
  auto errors = validate_config(spec.base);
  if (spec.repetitions < 1) errors.emplace_back("repetitions must be >= 1");
  for (double v : spec.V_values) {
    if (!(v >= 0.0)) errors.push_back(fmt::format("V value {} must be >= 0", v));
  }
  for (std::size_t i = 0; i < std::max(spec.num_edge.size(), spec.num_cloud.size()); ++i) {
    const std::size_t n = i < spec.num_edge.size() ? spec.num_edge[i] : 1;
    const std::size_t u = i < spec.num_cloud.size() ? spec.num_cloud[i] : 1;
    if (n == 0 && u == 0) errors.emplace_back("grid contains a cell with no servers");
  }
  for (const auto& p : spec.policies) {
    for (auto& e : validate_iodcc_params(p.iodcc)) errors.push_back(std::move(e));
  }
  return errors;
}

namespace {

std::uint64_t cell_seed(std::uint64_t seed, int repetition) {
  return repetition == 0 ? seed : mix_seed(seed + static_cast<std::uint64_t>(repetition));
}

double usage_ratio(const RunReport& report) {
  std::vector<double> ratios;
  for (const auto& s : report.servers) {
    if (s.threshold > 0.0) ratios.push_back(s.mean_usage / s.threshold);
  }
  return mean_of(ratios);
}

}  // namespace

std::vector<SweepCell> run_sweep(const SweepSpec& spec, unsigned threads) {
  if (const auto errors = validate_sweep(spec); !errors.empty()) {
    throw ConfigError(fmt::format("invalid sweep: {}", fmt::join(errors, "; ")));
  }
  const auto& base = spec.base;
  const auto V_values = spec.V_values.empty() ? std::vector<double>{base.system.tradeoff_V} : spec.V_values;
  const auto edges = spec.num_edge.empty() ? std::vector<std::size_t>{base.system.num_edge} : spec.num_edge;
  const auto clouds = spec.num_cloud.empty() ? std::vector<std::size_t>{base.system.num_cloud} : spec.num_cloud;
  const auto seeds = spec.seeds.empty() ? std::vector<std::uint64_t>{base.system.rng_seed} : spec.seeds;
  const auto policies = spec.policies.empty() ? std::vector<PolicySpec>{base.policy} : spec.policies;
  const auto predictors =
      spec.predictors.empty() ? std::vector<PredictorSpec>{base.predictor} : spec.predictors;

  // Traces depend only on the seed, so every cell with that seed replays the same arrivals.
  std::map<std::uint64_t, Trace> traces;
  for (auto seed : seeds) {
    for (int rep = 0; rep < spec.repetitions; ++rep) {
      const auto s = cell_seed(seed, rep);
      if (!traces.contains(s)) traces.emplace(s, generate_trace(base.system, base.generator, s));
    }
  }

  struct Job {
    SweepCell cell;
    Config config;
    const PolicySpec* policy;
    const PredictorSpec* predictor;
  };
  std::vector<Job> jobs;
  for (double V : V_values) {
    for (auto n : edges) {
      for (auto u : clouds) {
        for (auto seed : seeds) {
          for (const auto& policy : policies) {
            for (const auto& predictor : predictors) {
              for (int rep = 0; rep < spec.repetitions; ++rep) {
                Job job{SweepCell{}, base, &policy, &predictor};
                job.config.system.tradeoff_V = V;
                job.config.system.num_edge = n;
                job.config.system.num_cloud = u;
                job.config.system.rng_seed = cell_seed(seed, rep);
                job.cell.V = V;
                job.cell.num_edge = n;
                job.cell.num_cloud = u;
                job.cell.seed = seed;
                job.cell.policy = std::string(to_string(policy.kind));
                job.cell.predictor = std::string(to_string(predictor.kind));
                job.cell.repetition = rep;
                jobs.push_back(std::move(job));
              }
            }
          }
        }
      }
    }
  }

  std::vector<SweepCell> cells(jobs.size());
  parallel_for(jobs.size(), threads, [&](std::size_t i) {
    const Job& job = jobs[i];
    const RunReport report =
        run(job.config, traces.at(job.config.system.rng_seed), *job.policy, *job.predictor);
    SweepCell cell = job.cell;
    cell.lyapunov_reward = report.lyapunov_reward;
    cell.mean_zeta = report.mean_zeta;
    cell.mean_total_queue = report.mean_total_queue;
    cell.final_max_queue_rate = report.max_queue_rate_at(static_cast<std::int64_t>(report.slots.size()));
    cell.drops = report.drops;
    cell.mean_usage_ratio = usage_ratio(report);
    cell.converged_fraction = report.converged_fraction();
    cells[i] = std::move(cell);
  });
  return cells;
}

std::vector<TradeoffRow> v_sweep(const Config& base, const std::vector<double>& V_values,
                                 const std::vector<std::uint64_t>& seeds, unsigned threads) {
  SweepSpec spec;
  spec.base = base;
  spec.V_values = V_values;
  std::sort(spec.V_values.begin(), spec.V_values.end());
  spec.V_values.erase(std::unique(spec.V_values.begin(), spec.V_values.end()), spec.V_values.end());
  spec.seeds = seeds;
  const auto cells = run_sweep(spec, threads);

  std::vector<TradeoffRow> rows;
  for (double V : spec.V_values) {
    std::vector<double> zeta, queue, rate;
    for (const auto& c : cells) {
      if (c.V != V) continue;
      zeta.push_back(c.mean_zeta);
      queue.push_back(c.mean_total_queue);
      rate.push_back(c.final_max_queue_rate);
    }
    rows.push_back(TradeoffRow{V, mean_of(zeta), mean_of(queue), mean_of(rate)});
  }
  return rows;
}

Config with_slack_thresholds(const Config& config, const Trace& trace, double slack) {
  const auto system = build_system(config);
  double capacity = 0.0;
  for (const auto& s : system.servers) capacity += s.capacity;
  const auto tasks = tasks_from_trace(trace, system.task_types);
  double workload = 0.0;
  for (const auto& t : tasks) {
    if (t.arrival_slot < config.system.horizon) workload += workload_units(t, config.workload, false);
  }
  const double per_slot = workload / static_cast<double>(config.system.horizon);
  const double threshold = slack * per_slot / capacity;
  Config out = config;
  out.servers.edge_threshold = {threshold, threshold};
  out.servers.cloud_threshold = {threshold, threshold};
  return out;
}

std::vector<StabilityRow> stability_check(const Config& config, const std::vector<std::int64_t>& horizons,
                                          const std::vector<std::uint64_t>& seeds, double slack, unsigned threads) {
  if (horizons.empty()) throw ConfigError("stability check needs at least one horizon");
  for (auto h : horizons) {
    if (h < 1) throw ConfigError("stability horizons must be >= 1");
  }
  const auto seed_list = seeds.empty() ? std::vector<std::uint64_t>{config.system.rng_seed} : seeds;
  const std::int64_t longest = *std::max_element(horizons.begin(), horizons.end());

  std::vector<std::vector<double>> per_seed(seed_list.size());
  parallel_for(seed_list.size(), threads, [&](std::size_t s) {
    Config c = config;
    c.system.horizon = longest;
    c.system.rng_seed = seed_list[s];
    const Trace trace = generate_trace(c.system, c.generator, c.system.rng_seed);
    if (slack > 0.0) c = with_slack_thresholds(c, trace, slack);
    const RunReport report = run(c, trace, c.policy, c.predictor);
    for (auto h : horizons) per_seed[s].push_back(report.max_queue_rate_at(h));
  });

  std::vector<StabilityRow> rows;
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    std::vector<double> values;
    for (const auto& v : per_seed) values.push_back(v[i]);
    rows.push_back(StabilityRow{horizons[i], mean_of(values)});
  }
  return rows;
}

namespace {

std::vector<PolicyRow> rank_cells(const std::vector<SweepCell>& cells, bool by_policy) {
  std::vector<PolicyRow> rows;
  for (const auto& c : cells) {
    const auto& key = by_policy ? c.policy : c.predictor;
    auto it = std::find_if(rows.begin(), rows.end(), [&](const PolicyRow& r) {
      return (by_policy ? r.policy : r.predictor) == key;
    });
    if (it == rows.end()) {
      PolicyRow row;
      row.policy = c.policy;
      row.predictor = c.predictor;
      rows.push_back(std::move(row));
      it = std::prev(rows.end());
    }
    it->rewards.push_back(c.lyapunov_reward);
    it->mean_zeta += c.mean_zeta;
    it->mean_drops += static_cast<double>(c.drops);
    it->mean_usage_ratio += c.mean_usage_ratio;
  }
  for (auto& r : rows) {
    const auto n = static_cast<double>(r.rewards.size());
    r.mean_reward = mean_of(r.rewards);
    r.stddev_reward = stddev_of(r.rewards);
    r.mean_zeta /= n;
    r.mean_drops /= n;
    r.mean_usage_ratio /= n;
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const PolicyRow& a, const PolicyRow& b) { return a.mean_reward > b.mean_reward; });
  return rows;
}

}  // namespace

std::vector<PolicyRow> compare_policies(const Config& base, const std::vector<PolicySpec>& policies,
                                        const std::vector<std::uint64_t>& seeds, unsigned threads) {
  SweepSpec spec;
  spec.base = base;
  spec.policies = policies;
  spec.seeds = seeds;
  return rank_cells(run_sweep(spec, threads), true);
}

std::vector<PolicyRow> compare_predictors(const Config& base, const std::vector<PredictorSpec>& predictors,
                                          const std::vector<std::uint64_t>& seeds, unsigned threads) {
  SweepSpec spec;
  spec.base = base;
  spec.predictors = predictors;
  spec.seeds = seeds;
  return rank_cells(run_sweep(spec, threads), false);
}

}  // namespace offload
