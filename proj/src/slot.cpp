#include "offload/slot.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "offload/lyapunov.hpp"

namespace offload {

bool SlotState::feasible(std::size_t task, ServerId server) const {
  return links->feasible(tasks[task].client, server, min_rate);
}

double comm_delay(double data_size, double rate, double propagation) {
  if (!(rate > 0.0)) throw std::logic_error("comm_delay called on a link with non-positive rate");
  return data_size / rate + propagation;
}

double comp_delay(double backlog, std::span<const double> predecessor_workloads, double workload,
                  double capacity) {
  double queued = backlog;
  for (double w : predecessor_workloads) queued += w;
  return (queued + workload) / capacity;
}

std::vector<std::size_t> arrival_order(std::span<const Task> tasks) {
  std::vector<std::size_t> order(tasks.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return tasks[a].intra_slot_rank < tasks[b].intra_slot_rank;
  });
  return order;
}

SlotEvaluation evaluate_assignment(const SlotState& state, const Assignment& assignment) {
  const std::size_t n = state.num_tasks();
  if (assignment.size() != n) throw std::invalid_argument("assignment size does not match task count");

  SlotEvaluation eval;
  eval.outcomes.resize(n);
  // Same-slot workloads already queued on each server, in arrival order.
  std::vector<std::vector<double>> queued(state.num_servers());
  for (const std::size_t i : arrival_order(state.tasks)) {
    const Task& task = state.tasks[i];
    TaskOutcome& out = eval.outcomes[i];
    out.delay_sensitivity = task.delay_sensitivity;
    out.accuracy_sensitivity = task.accuracy_sensitivity;
    out.server = assignment.server[i];
    if (!out.server) {
      out.dropped = true;
      continue;
    }
    const ServerId j = *out.server;
    const Server& server = state.servers[j];
    if (!state.feasible(i, j)) throw std::logic_error("assignment places a task on an infeasible link");
    out.comm_delay =
        comm_delay(task.data_size, state.links->rate(task.client, j), state.links->propagation(task.client, j));
    out.comp_delay = comp_delay(server.backlog, queued[j], state.workloads[i], server.capacity);
    out.accuracy = server.accuracy.at(task.type);
    queued[j].push_back(state.workloads[i]);
  }
  eval.assigned_workload = assigned_workload(assignment, state.workloads, state.num_servers());
  eval.excess = excess(eval.assigned_workload, state.servers);
  eval.zeta = slot_cost_zeta(eval.outcomes, state.delta, state.drop_delay);
  eval.drift_plus_penalty = drift_plus_penalty(eval.zeta, eval.excess, state.queues, state.V);
  return eval;
}

double slot_objective(const SlotState& state, const Assignment& assignment) {
  return evaluate_assignment(state, assignment).drift_plus_penalty;
}

SlotState SlotInstance::view() const {
  SlotState s;
  s.tasks = tasks;
  s.workloads = workloads;
  s.servers = servers;
  s.queues = queues;
  s.links = &links;
  s.V = V;
  s.delta = delta;
  s.min_rate = min_rate;
  s.drop_delay = drop_delay;
  return s;
}

}  // namespace offload
