#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "offload/config.hpp"
#include "offload/lyapunov.hpp"
#include "offload/policy.hpp"
#include "offload/predictor.hpp"
#include "offload/trace.hpp"

namespace offload {

inline constexpr const char* kReportSchema = "offload.run/1";

struct TaskRecord {
  TaskId id = 0;
  std::size_t client = 0;
  std::size_t type = 0;
  std::size_t rank = 0;
  std::optional<ServerId> server;
  bool dropped = false;
  double data_size = 0.0;
  double link_rate = 0.0;    // realized rate to the chosen server; 0 when dropped
  double propagation = 0.0;  // to the chosen server; 0 when dropped
  double comm_delay = 0.0;
  double comp_delay = 0.0;
  double accuracy = 0.0;
  double delay_sensitivity = 0.0;
  double accuracy_sensitivity = 0.0;
  std::int64_t predicted_tokens = 0;
  double planned_workload = 0.0;
  double workload = 0.0;
};

struct ServerSlotRecord {
  double assigned_workload = 0.0;
  double backlog_before = 0.0;
  double backlog_after = 0.0;
  double excess = 0.0;          // realized y_j
  double planned_excess = 0.0;  // y_j from predicted workloads
  double queue_before = 0.0;
  double queue_after = 0.0;
};

struct SlotRecord {
  std::int64_t slot = 0;
  std::vector<TaskRecord> tasks;
  std::vector<ServerSlotRecord> servers;
  double zeta = 0.0;
  double drift_plus_penalty = 0.0;
  int iterations = 0;
  bool converged = true;
  double workload_error = 0.0;  // sum |planned - realized|
};

struct ServerSummary {
  ServerId id = 0;
  Tier tier = Tier::Edge;
  double capacity = 0.0;
  double threshold = 0.0;
  std::vector<double> accuracy;
  double mean_usage = 0.0;  // time-averaged compute time per slot
};

struct RunReport {
  std::string policy;
  std::string predictor;
  std::uint64_t seed = 0;
  double V = 0.0;
  double delta = 0.0;
  double slot_duration = 1.0;
  double drop_delay = 0.0;
  std::vector<ServerSummary> servers;
  std::vector<SlotRecord> slots;

  double mean_zeta = 0.0;
  double mean_total_queue = 0.0;  // time average of sum_j Q_j(t+1)
  std::vector<double> final_queues;
  double lyapunov_reward = 0.0;   // -sum_t [V zeta(t) + sum_j Q_j(t) y_j(t)]
  std::size_t tasks = 0;
  std::size_t drops = 0;
  std::size_t ignored_tasks = 0;  // trace rows beyond the horizon
  std::vector<std::string> warnings;

  // max_j Q_j(t) / t, from the per-slot records (t >= 1).
  double max_queue_rate_at(std::int64_t t) const;
  double converged_fraction() const;
  double max_iterations() const;
};

// Recomputes every aggregate from the slot records.
void finalize_report(RunReport& report);

// Time-slotted engine. One instance owns one run's mutable state.
class Simulator {
 public:
  Simulator(const Config& config, const Trace& trace, std::unique_ptr<Policy> policy, Predictor predictor);

  bool done() const { return next_slot_ >= config_.system.horizon; }
  // Advances one slot and returns its record.
  SlotRecord step();
  RunReport finish();

  const std::vector<Server>& servers() const { return system_.servers; }
  const VirtualQueueBank& queues() const { return bank_; }

 private:
  LinkState realize_links(std::int64_t slot);

  Config config_;
  SystemInstance system_;
  std::unique_ptr<Policy> policy_;
  Predictor predictor_;
  VirtualQueueBank bank_;
  std::vector<Task> tasks_;
  std::size_t cursor_ = 0;
  std::int64_t next_slot_ = 0;
  std::mt19937_64 link_rng_;
  RunReport report_;
};

RunReport run(const Config& config, const Trace& trace, const PolicySpec& policy, const PredictorSpec& predictor);
// Generates the synthetic trace from the config seed and runs with the config's policy and predictor.
RunReport run(const Config& config);

// Serialization: one JSON object per slot per line, plus a summary document.
nlohmann::json slot_to_json(const SlotRecord& record);
SlotRecord slot_from_json(const nlohmann::json& doc);
nlohmann::json summary_to_json(const RunReport& report);
void write_report(const RunReport& report, const std::filesystem::path& dir);
RunReport read_report(const std::filesystem::path& dir);

}  // namespace offload
