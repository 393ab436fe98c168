#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "offload/types.hpp"
#include "offload/workload.hpp"

namespace offload {

inline constexpr int kConfigSchemaVersion = 1;

// Closed interval used for uniform sampling.
struct Range {
  double lo = 0.0;
  double hi = 0.0;
  bool operator==(const Range&) const = default;
};

struct SystemConfig {
  std::size_t num_edge = 4;
  std::size_t num_cloud = 6;
  std::size_t num_clients = 5;
  std::size_t num_task_types = 3;
  std::int64_t horizon = 100;
  double slot_duration = 1.0;
  double tradeoff_V = 50.0;
  double accuracy_weight_delta = 2.0;
  double min_rate = 0.2;
  std::uint64_t rng_seed = 1;
  // Delay charged (times alpha) for a task with no feasible link.
  double drop_delay = 100.0;

  std::size_t num_servers() const { return num_edge + num_cloud; }
};

// Sampling ranges for per-server and per-link quantities, split by tier.
struct ServerSampling {
  Range edge_capacity{2.5, 5.0};
  Range cloud_capacity{5.0, 7.5};
  Range edge_threshold{0.2, 0.5};
  Range cloud_threshold{0.2, 0.5};
  Range edge_accuracy{0.1, 0.5};
  Range cloud_accuracy{0.6, 1.0};
  Range edge_propagation{0.05, 0.2};
  Range cloud_propagation{0.5, 1.0};
  Range edge_rate{0.1, 3.0};
  Range cloud_rate{0.1, 2.0};
};

struct TaskSampling {
  Range delay_sensitivity{0.5, 1.0};
  Range accuracy_sensitivity{0.5, 1.0};
};

// Discretized lognormal token-length distribution, clipped to the generator bounds.
struct LogNormalTokens {
  double log_mean = 5.0;
  double log_sd = 0.8;
};

struct TaskTypeTokens {
  LogNormalTokens prompt;
  LogNormalTokens output;
  double weight = 1.0;
};

enum class ArrivalProcess { Poisson, Bursty };

struct GeneratorParams {
  ArrivalProcess arrival = ArrivalProcess::Poisson;
  double rate_per_client = 0.4;   // mean arrivals per client per slot
  double burst_prob = 0.0;        // Bursty only: chance a client slot is a burst
  double burst_multiplier = 1.0;  // Bursty only: rate multiplier during a burst
  double data_per_token = 0.004;  // data-units per prompt token
  std::int64_t token_min = 1;
  std::int64_t token_max = 4096;
  std::vector<TaskTypeTokens> task_types;
};

enum class PredictorKind { Oracle, Constant, Noisy, FromFile };

struct PredictorSpec {
  PredictorKind kind = PredictorKind::Oracle;
  // Constant: predicted length. When unset the trace's mean output length is used.
  std::optional<double> mean;
  double relative_stddev = 0.0;  // Noisy
  std::string path;              // FromFile
};

struct IodccParams {
  int max_iters = 20;
  double damping = 0.5;
  double congestion_weight = 0.5;
};

enum class PolicyKind { Iodcc, GreedyAccuracy, GreedyCompute, GreedyDelay, Random };

struct PolicySpec {
  PolicyKind kind = PolicyKind::Iodcc;
  IodccParams iodcc;
  std::uint64_t seed = 7;  // Random only
};

struct Config {
  SystemConfig system;
  ServerSampling servers;
  TaskSampling tasks;
  WorkloadModel workload;
  GeneratorParams generator;
  PredictorSpec predictor;
  PolicySpec policy;
};

// Defaults used by the synthetic experiments: N=4, U=6, K=3, T=100.
Config default_config();

// Every violated invariant, as human-readable messages. Empty means valid.
std::vector<std::string> validate_config(const Config& config);

nlohmann::json config_to_json(const Config& config);
Config config_from_json(const nlohmann::json& doc);
Config load_config(const std::filesystem::path& path);
void save_config(const Config& config, const std::filesystem::path& path);
std::string serialize_config(const Config& config);

std::string_view to_string(PolicyKind kind);
PolicyKind parse_policy_kind(std::string_view name);
std::string_view to_string(PredictorKind kind);
PredictorKind parse_predictor_kind(std::string_view name);

// Static world sampled once from the config seed.
struct SystemInstance {
  std::vector<Server> servers;
  std::vector<TaskTypeProfile> task_types;
  // Per (client, server) propagation delay, fixed over the run, row-major by client.
  std::vector<double> propagation_delay;

  double propagation(std::size_t client, ServerId server) const {
    return propagation_delay.at(client * servers.size() + server);
  }
};

SystemInstance build_system(const Config& config);

}  // namespace offload
