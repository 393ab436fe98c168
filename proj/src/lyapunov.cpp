#include "offload/lyapunov.hpp"

#include <algorithm>
#include <stdexcept>

namespace offload {

VirtualQueueBank::VirtualQueueBank(std::size_t num_servers)
    : queues_(num_servers, 0.0), queue_history_{queues_} {}

void VirtualQueueBank::update(std::span<const double> excess) {
  queues_ = update_queues(queues_, excess);
  excess_history_.emplace_back(excess.begin(), excess.end());
  queue_history_.push_back(queues_);
}

std::vector<double> update_queues(std::span<const double> queues, std::span<const double> excess) {
  if (queues.size() != excess.size()) throw std::invalid_argument("excess size does not match queue count");
  std::vector<double> next(queues.size());
  for (std::size_t j = 0; j < queues.size(); ++j) next[j] = std::max(queues[j] + excess[j], 0.0);
  return next;
}

std::vector<double> excess(std::span<const double> assigned_workload, std::span<const Server> servers) {
  if (assigned_workload.size() != servers.size()) {
    throw std::invalid_argument("workload size does not match server count");
  }
  std::vector<double> y(servers.size());
  for (std::size_t j = 0; j < servers.size(); ++j) {
    y[j] = assigned_workload[j] / servers[j].capacity - servers[j].threshold;
  }
  return y;
}

std::vector<double> assigned_workload(const Assignment& assignment, std::span<const double> workloads,
                                      std::size_t num_servers) {
  std::vector<double> load(num_servers, 0.0);
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (const auto& j = assignment.server[i]) load.at(*j) += workloads[i];
  }
  return load;
}

double task_cost(const TaskOutcome& outcome, double delta, double drop_delay) {
  if (outcome.dropped) return outcome.delay_sensitivity * drop_delay;
  return outcome.delay_sensitivity * (outcome.comm_delay + outcome.comp_delay) -
         delta * outcome.accuracy_sensitivity * outcome.accuracy;
}

double slot_cost_zeta(std::span<const TaskOutcome> outcomes, double delta, double drop_delay) {
  double zeta = 0.0;
  for (const auto& o : outcomes) zeta += task_cost(o, delta, drop_delay);
  return zeta;
}

double drift_plus_penalty(double zeta, std::span<const double> excess, std::span<const double> queues, double V) {
  if (excess.size() != queues.size()) throw std::invalid_argument("excess size does not match queue count");
  double value = V * zeta;
  for (std::size_t j = 0; j < queues.size(); ++j) value += queues[j] * excess[j];
  return value;
}

double lyapunov_value(std::span<const double> queues) {
  double sum = 0.0;
  for (double q : queues) sum += q * q;
  return 0.5 * sum;
}

LyapunovDiagnostics lyapunov_diagnostics(const VirtualQueueBank& bank) {
  LyapunovDiagnostics d;
  const auto& queues = bank.queue_history();
  const auto& excesses = bank.excess_history();
  d.lyapunov.reserve(queues.size());
  for (const auto& q : queues) d.lyapunov.push_back(lyapunov_value(q));
  for (std::size_t t = 0; t + 1 < d.lyapunov.size(); ++t) d.drift.push_back(d.lyapunov[t + 1] - d.lyapunov[t]);

  double bound = 0.0;
  for (const auto& y : excesses) {
    bound = std::max(bound, lyapunov_value(y));
    d.bound_estimate.push_back(bound);
  }
  for (std::size_t t = 1; t < queues.size(); ++t) {
    std::vector<double> rate(queues[t].size());
    for (std::size_t j = 0; j < rate.size(); ++j) rate[j] = queues[t][j] / static_cast<double>(t);
    d.mean_rate.push_back(std::move(rate));
  }
  return d;
}

}  // namespace offload
