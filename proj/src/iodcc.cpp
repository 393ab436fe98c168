#include "offload/iodcc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace offload {

CostMatrix::CostMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), base_(rows * cols, 0.0), congestion_(rows * cols, 0.0) {}

double CostMatrix::at(std::size_t i, ServerId j) const {
  const double b = base(i, j);
  if (std::isinf(b)) return b;
  return b + congestion(i, j);
}

void CostMatrix::scale(double factor) {
  for (auto& v : base_) v *= factor;
  for (auto& v : congestion_) v *= factor;
}

double base_cost(const SlotState& state, std::size_t task, ServerId server) {
  if (!state.feasible(task, server)) return kInfinity;
  const Task& t = state.tasks[task];
  const Server& s = state.servers[server];
  const double q = state.workloads[task];
  const double kappa = comm_delay(t.data_size, state.links->rate(t.client, server),
                                  state.links->propagation(t.client, server));
  const double delay = kappa + (s.backlog + q) / s.capacity;
  const double qoe = t.delay_sensitivity * delay - state.delta * t.accuracy_sensitivity * s.accuracy.at(t.type);
  return state.V * qoe + state.queues[server] * (q / s.capacity);
}

double congestion_penalty(double perceived_load, double capacity, double rho) {
  return rho * perceived_load / capacity;
}

Assignment solve_assignment(const CostMatrix& cost) {
  Assignment a;
  a.server.resize(cost.rows());
  for (std::size_t i = 0; i < cost.rows(); ++i) {
    double best = kInfinity;
    for (ServerId j = 0; j < cost.cols(); ++j) {
      const double c = cost.at(i, j);
      if (c < best) {
        best = c;
        a.server[i] = j;
      }
    }
  }
  return a;
}

std::vector<double> damped_load_update(std::span<const double> previous, const Assignment& assignment,
                                       std::span<const double> workloads, double damping) {
  std::vector<double> instant(previous.size(), 0.0);
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (const auto& j = assignment.server[i]) instant.at(*j) += workloads[i];
  }
  std::vector<double> next(previous.size());
  for (std::size_t j = 0; j < previous.size(); ++j) {
    next[j] = (1.0 - damping) * previous[j] + damping * instant[j];
  }
  return next;
}

namespace {

CostMatrix base_matrix(const SlotState& state) {
  CostMatrix m(state.num_tasks(), state.num_servers());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (ServerId j = 0; j < m.cols(); ++j) m.set_base(i, j, base_cost(state, i, j));
  }
  return m;
}

// The congestion surcharge stands in for the intra-slot queueing part of
// V * zeta, so it is weighted like a delay: V * alpha_i * penalty(L_j). A task
// is charged for the load of the others only; `membership` holds each task's
// damped share of every server (row-major, may be empty).
void apply_congestion(CostMatrix& m, const SlotState& state, std::span<const double> perceived_load,
                      std::span<const double> membership, double rho) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double weight = state.V * state.tasks[i].delay_sensitivity;
    for (ServerId j = 0; j < m.cols(); ++j) {
      const double own = membership.empty() ? 0.0 : membership[i * m.cols() + j] * state.workloads[i];
      const double others = std::max(perceived_load[j] - own, 0.0);
      m.set_congestion(i, j, weight * congestion_penalty(others, state.servers[j].capacity, rho));
    }
  }
}

}  // namespace

CostMatrix build_cost_matrix(const SlotState& state, std::span<const double> perceived_load,
                             std::span<const double> membership, double rho) {
  CostMatrix m = base_matrix(state);
  apply_congestion(m, state, perceived_load, membership, rho);
  return m;
}

IodccResult iodcc_solve(const SlotState& state, const IodccParams& params) {
  if (const auto errors = validate_iodcc_params(params); !errors.empty()) {
    throw std::invalid_argument(errors.front());
  }
  const std::size_t n = state.num_tasks();
  const std::size_t m = state.num_servers();
  IodccResult result;
  result.perceived_load.assign(m, 0.0);
  if (n == 0) {
    result.converged = true;
    return result;
  }

  CostMatrix cost = base_matrix(state);
  // Damped assignment indicators; their workload-weighted column sums follow
  // the same recursion as the perceived load.
  std::vector<double> membership(n * m, 0.0);
  std::optional<Assignment> previous;
  for (int k = 1; k <= params.max_iters; ++k) {
    apply_congestion(cost, state, result.perceived_load, membership, params.congestion_weight);
    Assignment current = solve_assignment(cost);
    result.perceived_load = damped_load_update(result.perceived_load, current, state.workloads, params.damping);
    for (std::size_t i = 0; i < n; ++i) {
      for (ServerId j = 0; j < m; ++j) {
        const double hit = current.server[i] == j ? 1.0 : 0.0;
        double& x = membership[i * m + j];
        x = (1.0 - params.damping) * x + params.damping * hit;
      }
    }
    result.iterations = k;
    const bool repeated = previous && *previous == current;
    result.assignment = std::move(current);
    if (repeated) {
      result.converged = true;
      break;
    }
    previous = result.assignment;
  }
  return result;
}

std::vector<std::string> validate_iodcc_params(const IodccParams& params) {
  std::vector<std::string> errors;
  if (params.max_iters < 1) errors.push_back(fmt::format("max_iters must be >= 1, got {}", params.max_iters));
  if (!(params.damping > 0.0 && params.damping <= 1.0)) {
    errors.push_back(fmt::format("damping must lie in (0, 1], got {}", params.damping));
  }
  if (!(params.congestion_weight >= 0.0)) {
    errors.push_back(fmt::format("congestion_weight must be >= 0, got {}", params.congestion_weight));
  }
  return errors;
}

}  // namespace offload
