#pragma once

#include <span>
#include <vector>

#include "offload/types.hpp"

namespace offload {

// Per-server virtual queues that accumulate long-term compute-budget violation.
// Q_j starts at zero and never goes negative.
class VirtualQueueBank {
 public:
  explicit VirtualQueueBank(std::size_t num_servers = 0);

  std::size_t size() const { return queues_.size(); }
  std::span<const double> queues() const { return queues_; }
  double operator[](std::size_t j) const { return queues_.at(j); }

  // Q_j <- max(Q_j + y_j, 0); records y and the new Q.
  void update(std::span<const double> excess);

  std::size_t slots_recorded() const { return excess_history_.size(); }
  // Q(0), Q(1), ..., Q(t): one more entry than excess_history().
  const std::vector<std::vector<double>>& queue_history() const { return queue_history_; }
  const std::vector<std::vector<double>>& excess_history() const { return excess_history_; }

 private:
  std::vector<double> queues_;
  std::vector<std::vector<double>> queue_history_;
  std::vector<std::vector<double>> excess_history_;
};

// Pure form of the queue update.
std::vector<double> update_queues(std::span<const double> queues, std::span<const double> excess);

// y_j = (sum of workload assigned to j) / f_j - threshold_j.
// `assigned_workload` holds the per-server workload sums.
std::vector<double> excess(std::span<const double> assigned_workload, std::span<const Server> servers);

// Sums per-server workloads from a decision, in task order.
std::vector<double> assigned_workload(const Assignment& assignment, std::span<const double> workloads,
                                      std::size_t num_servers);

// Per-task QoE cost alpha * (kappa + tau) - delta * beta * phi, or
// alpha * drop_delay for a dropped task.
double task_cost(const TaskOutcome& outcome, double delta, double drop_delay);

// zeta(t): summed task costs, in task order.
double slot_cost_zeta(std::span<const TaskOutcome> outcomes, double delta, double drop_delay);

// V * zeta + sum_j Q_j * y_j. The constant bound B is omitted.
double drift_plus_penalty(double zeta, std::span<const double> excess, std::span<const double> queues,
                          double V);

// L = 1/2 * sum_j Q_j^2.
double lyapunov_value(std::span<const double> queues);

struct LyapunovDiagnostics {
  std::vector<double> lyapunov;        // L(Q(t)) for t = 0..T
  std::vector<double> drift;           // L(t+1) - L(t) for t = 0..T-1
  std::vector<double> bound_estimate;  // running max of 1/2 * sum_j y_j^2
  // Q_j(t) / t for t = 1..T, indexed [t-1][j].
  std::vector<std::vector<double>> mean_rate;
};

LyapunovDiagnostics lyapunov_diagnostics(const VirtualQueueBank& bank);

}  // namespace offload
