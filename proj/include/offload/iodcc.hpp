#pragma once

#include <span>
#include <vector>

#include "offload/config.hpp"
#include "offload/slot.hpp"
#include "offload/types.hpp"

namespace offload {

// Dense tasks x servers cost table. Infeasible cells are +infinity in both the
// base and total views; finite cells total exactly base + congestion.
class CostMatrix {
 public:
  CostMatrix(std::size_t rows, std::size_t cols);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double base(std::size_t i, ServerId j) const { return base_[i * cols_ + j]; }
  double congestion(std::size_t i, ServerId j) const { return congestion_[i * cols_ + j]; }
  double at(std::size_t i, ServerId j) const;

  void set_base(std::size_t i, ServerId j, double value) { base_[i * cols_ + j] = value; }
  void set_congestion(std::size_t i, ServerId j, double value) { congestion_[i * cols_ + j] = value; }

  // Multiplies every cell by a positive factor.
  void scale(double factor);

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> base_;
  std::vector<double> congestion_;
};

// Separable part of the slot objective for one (task, server) pair:
//   V * [alpha * (kappa + (B_j + q) / f_j) - delta * beta * phi] + Q_j * q / f_j
// or +infinity when the link is infeasible.
double base_cost(const SlotState& state, std::size_t task, ServerId server);

// rho * load / capacity.
double congestion_penalty(double perceived_load, double capacity, double rho);

// Exact minimizer of sum_ij C_ij a_ij subject to one server per task: row-wise
// argmin with ties to the lowest server index. All-infinite rows are dropped.
Assignment solve_assignment(const CostMatrix& cost);

// L_j <- (1 - lambda) * L_j + lambda * sum of workloads assigned to j.
std::vector<double> damped_load_update(std::span<const double> previous, const Assignment& assignment,
                                       std::span<const double> workloads, double damping);

struct IodccResult {
  Assignment assignment;
  int iterations = 0;
  bool converged = false;
  std::vector<double> perceived_load;
};

// Iterates cost construction, assignment and damped load updates until the
// assignment repeats or max_iters is reached. Uses state.workloads as the
// planner's workload estimates.
IodccResult iodcc_solve(const SlotState& state, const IodccParams& params);

// Cost matrix for one iteration given the current perceived loads. Each task's
// own damped share (`membership`, tasks x servers, row-major) is removed from
// the load it is charged for; pass an empty span to charge the full load.
CostMatrix build_cost_matrix(const SlotState& state, std::span<const double> perceived_load,
                             std::span<const double> membership, double rho);

std::vector<std::string> validate_iodcc_params(const IodccParams& params);

}  // namespace offload
