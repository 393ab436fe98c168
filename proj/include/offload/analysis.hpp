#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "offload/config.hpp"
#include "offload/simulator.hpp"
#include "offload/slot.hpp"

namespace offload {

inline constexpr std::size_t kOracleMaxTasks = 8;
inline constexpr std::size_t kOracleMaxServers = 4;

struct OracleResult {
  Assignment assignment;
  double value = 0.0;
};

// Exhaustive minimizer of the slot objective (intra-slot queueing included) over
// every feasible assignment. Ties keep the lexicographically first assignment.
// Throws OracleSizeError above kOracleMaxTasks tasks or kOracleMaxServers servers.
OracleResult brute_force_slot(const SlotState& state);

// Random small slot instance with oracle workloads, for solver checks.
SlotInstance random_slot_instance(std::uint64_t seed, std::size_t num_tasks, std::size_t num_servers);

struct GapRow {
  std::uint64_t seed = 0;
  double oracle_value = 0.0;
  double iodcc_value = 0.0;
  double relative_gap = 0.0;  // (iodcc - oracle) / |oracle|
  int iterations = 0;
  bool converged = false;
};

std::vector<GapRow> oracle_gap_study(std::size_t instances, std::size_t num_tasks, std::size_t num_servers,
                                     std::uint64_t seed, const IodccParams& params);

// Parameter grid; every combination is one independent run. Empty axes fall back
// to the base config's value.
struct SweepSpec {
  Config base;
  std::vector<double> V_values;
  std::vector<std::size_t> num_edge;
  std::vector<std::size_t> num_cloud;
  std::vector<std::uint64_t> seeds;
  std::vector<PolicySpec> policies;
  std::vector<PredictorSpec> predictors;
  int repetitions = 1;
};

struct SweepCell {
  double V = 0.0;
  std::size_t num_edge = 0;
  std::size_t num_cloud = 0;
  std::uint64_t seed = 0;
  std::string policy;
  std::string predictor;
  int repetition = 0;
  double lyapunov_reward = 0.0;
  double mean_zeta = 0.0;
  double mean_total_queue = 0.0;
  double final_max_queue_rate = 0.0;  // max_j Q_j(T) / T
  std::size_t drops = 0;
  double mean_usage_ratio = 0.0;      // mean over servers of usage / threshold
  double converged_fraction = 0.0;
};

std::vector<std::string> validate_sweep(const SweepSpec& spec);

// Runs every grid cell (concurrently when `threads` > 1) and returns cells in grid order.
// Cells sharing a seed share the generated trace.
std::vector<SweepCell> run_sweep(const SweepSpec& spec, unsigned threads = 0);

struct TradeoffRow {
  double V = 0.0;
  double mean_zeta = 0.0;
  double mean_total_queue = 0.0;
  double final_max_queue_rate = 0.0;
};

// Per V (sorted ascending), averages over seeds.
std::vector<TradeoffRow> v_sweep(const Config& base, const std::vector<double>& V_values,
                                 const std::vector<std::uint64_t>& seeds, unsigned threads = 0);

struct StabilityRow {
  std::int64_t horizon = 0;
  double max_queue_rate = 0.0;  // mean over seeds of max_j Q_j(T) / T
};

// Sets every server's threshold to `slack` times the mean per-server compute
// time under a capacity-proportional split of the trace's mean workload, so
// that a strictly slack stationary policy exists.
Config with_slack_thresholds(const Config& config, const Trace& trace, double slack);

// Runs once per seed to the largest horizon and reads Q_j(T)/T at each requested T.
// With `slack` > 0 thresholds are first resized by with_slack_thresholds.
std::vector<StabilityRow> stability_check(const Config& config, const std::vector<std::int64_t>& horizons,
                                          const std::vector<std::uint64_t>& seeds, double slack,
                                          unsigned threads = 0);

struct PolicyRow {
  std::string policy;
  std::string predictor;
  double mean_reward = 0.0;
  double stddev_reward = 0.0;
  double mean_zeta = 0.0;
  double mean_drops = 0.0;
  double mean_usage_ratio = 0.0;
  std::vector<double> rewards;  // per seed, seed order
};

// Paired comparison: every policy sees the same trace per seed. Sorted by mean reward, best first.
std::vector<PolicyRow> compare_policies(const Config& base, const std::vector<PolicySpec>& policies,
                                        const std::vector<std::uint64_t>& seeds, unsigned threads = 0);

// Same, across predictors under the base config's policy.
std::vector<PolicyRow> compare_predictors(const Config& base, const std::vector<PredictorSpec>& predictors,
                                          const std::vector<std::uint64_t>& seeds, unsigned threads = 0);

}  // namespace offload
