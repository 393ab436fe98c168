#pragma once

#include <span>
#include <vector>

#include "offload/types.hpp"

namespace offload {

// Everything a policy can observe at the start of a slot. Tasks are in arrival
// (intra-slot rank) order; `workloads` holds the workload estimate per task that
// the caller wants evaluated (predicted for planning, realized for accounting).
struct SlotState {
  std::span<const Task> tasks;
  std::span<const double> workloads;
  std::span<const Server> servers;
  std::span<const double> queues;
  const LinkState* links = nullptr;
  double V = 0.0;
  double delta = 0.0;
  double min_rate = 0.0;
  double drop_delay = 0.0;

  std::size_t num_tasks() const { return tasks.size(); }
  std::size_t num_servers() const { return servers.size(); }
  bool feasible(std::size_t task, ServerId server) const;
};

// kappa = data_size / rate + propagation. Rate must be positive.
double comm_delay(double data_size, double rate, double propagation);

// tau = (backlog + sum(predecessor workloads) + workload) / capacity, summed in order.
double comp_delay(double backlog, std::span<const double> predecessor_workloads, double workload,
                  double capacity);

// Task indices sorted by intra-slot rank (stable for equal ranks).
std::vector<std::size_t> arrival_order(std::span<const Task> tasks);

struct SlotEvaluation {
  std::vector<TaskOutcome> outcomes;
  std::vector<double> assigned_workload;
  std::vector<double> excess;
  double zeta = 0.0;
  double drift_plus_penalty = 0.0;
};

// Exact per-slot objective of a decision, including intra-slot FIFO queueing:
// each task waits behind the backlog and the same-slot tasks that precede it
// on the same server.
SlotEvaluation evaluate_assignment(const SlotState& state, const Assignment& assignment);

// Shorthand for evaluate_assignment(...).drift_plus_penalty.
double slot_objective(const SlotState& state, const Assignment& assignment);

// Owning storage for a SlotState, used by tests and the oracle harness.
struct SlotInstance {
  std::vector<Task> tasks;
  std::vector<double> workloads;
  std::vector<Server> servers;
  std::vector<double> queues;
  LinkState links;
  double V = 1.0;
  double delta = 0.0;
  double min_rate = 0.0;
  double drop_delay = 100.0;

  SlotState view() const;
};

}  // namespace offload
