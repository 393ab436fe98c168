#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "offload/lyapunov.hpp"
#include "support.hpp"

using namespace offload;

namespace {

TaskOutcome placed(double alpha, double kappa, double tau, double beta, double phi) {
  TaskOutcome o;
  o.server = 0;
  o.delay_sensitivity = alpha;
  o.comm_delay = kappa;
  o.comp_delay = tau;
  o.accuracy_sensitivity = beta;
  o.accuracy = phi;
  return o;
}

}  // namespace

TEST(Excess, TwoTasksOnOneServer) {
  const std::vector<Server> servers{fixtures::make_server(0, 5.0, 2.0)};
  const Assignment a{{0, 0}};
  const auto load = assigned_workload(a, std::vector<double>{10.0, 5.0}, 1);
  EXPECT_DOUBLE_EQ(excess(load, servers)[0], 1.0);
}

TEST(Excess, IdleServerGivesMinusThreshold) {
  const std::vector<Server> servers{fixtures::make_server(0, 5.0, 2.0)};
  EXPECT_DOUBLE_EQ(excess(std::vector<double>{0.0}, servers)[0], -2.0);
}

TEST(Excess, BoundaryIsZero) {
  const std::vector<Server> servers{fixtures::make_server(0, 5.0, 2.0)};
  EXPECT_DOUBLE_EQ(excess(std::vector<double>{10.0}, servers)[0], 0.0);
}

TEST(AssignedWorkload, DroppedTasksContributeNothing) {
  const Assignment a{{1, std::nullopt, 1, 0}};
  const auto load = assigned_workload(a, std::vector<double>{1.0, 100.0, 2.0, 4.0}, 2);
  EXPECT_EQ(load, (std::vector<double>{4.0, 3.0}));
}

TEST(UpdateQueues, Examples) {
  EXPECT_EQ(update_queues(std::vector<double>{0.0}, std::vector<double>{-5.0})[0], 0.0);
  EXPECT_EQ(update_queues(std::vector<double>{3.0}, std::vector<double>{2.0})[0], 5.0);
  EXPECT_EQ(update_queues(std::vector<double>{3.0}, std::vector<double>{-3.0})[0], 0.0);
}

TEST(UpdateQueues, BankRecordsHistory) {
  VirtualQueueBank bank(2);
  bank.update(std::vector<double>{1.0, -1.0});
  bank.update(std::vector<double>{2.0, 3.0});
  EXPECT_EQ(bank[0], 3.0);
  EXPECT_EQ(bank[1], 3.0);
  ASSERT_EQ(bank.queue_history().size(), 3u);
  EXPECT_EQ(bank.queue_history()[0], (std::vector<double>{0.0, 0.0}));
  EXPECT_EQ(bank.excess_history()[1], (std::vector<double>{2.0, 3.0}));
}

TEST(SlotCost, SingleTask) {
  const std::vector<TaskOutcome> o{placed(1.0, 0.0, 2.0, 1.0, 0.8)};
  EXPECT_DOUBLE_EQ(slot_cost_zeta(o, 0.5, 100.0), 1.6);
}

TEST(SlotCost, EmptyIsZero) { EXPECT_EQ(slot_cost_zeta({}, 0.5, 100.0), 0.0); }

TEST(SlotCost, Additive) {
  const auto a = placed(0.7, 0.3, 2.0, 0.9, 0.4);
  const auto b = placed(0.5, 1.2, 0.5, 0.6, 0.9);
  const std::vector<TaskOutcome> both{a, b};
  EXPECT_DOUBLE_EQ(slot_cost_zeta(both, 2.0, 100.0), task_cost(a, 2.0, 100.0) + task_cost(b, 2.0, 100.0));
}

TEST(SlotCost, DelayIncludesCommunication) {
  EXPECT_DOUBLE_EQ(task_cost(placed(2.0, 0.5, 1.5, 1.0, 0.0), 1.0, 100.0), 4.0);
}

TEST(SlotCost, DroppedTaskPaysDropDelay) {
  TaskOutcome o;
  o.dropped = true;
  o.delay_sensitivity = 0.5;
  o.accuracy_sensitivity = 1.0;
  EXPECT_DOUBLE_EQ(task_cost(o, 2.0, 30.0), 15.0);
}

TEST(DriftPlusPenalty, Examples) {
  EXPECT_EQ(drift_plus_penalty(7.3, std::vector<double>{4.0}, std::vector<double>{0.0}, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(drift_plus_penalty(1.6, std::vector<double>{1.0}, std::vector<double>{5.0}, 10.0), 21.0);
  EXPECT_EQ(drift_plus_penalty(1.6, std::vector<double>{3.0, -2.0}, std::vector<double>{0.0, 0.0}, 50.0),
            50.0 * 1.6);
}

TEST(LyapunovValue, HalfSumOfSquares) { EXPECT_DOUBLE_EQ(lyapunov_value(std::vector<double>{3.0, 4.0}), 12.5); }

TEST(Diagnostics, ConstantQueuesHaveZeroDrift) {
  VirtualQueueBank bank(2);
  bank.update(std::vector<double>{2.0, 3.0});
  for (int t = 0; t < 5; ++t) bank.update(std::vector<double>{0.0, 0.0});
  const auto d = lyapunov_diagnostics(bank);
  for (std::size_t t = 1; t < d.drift.size(); ++t) EXPECT_EQ(d.drift[t], 0.0);
}

TEST(Diagnostics, MeanRateDecaysAsOneOverT) {
  VirtualQueueBank bank(1);
  bank.update(std::vector<double>{4.0});
  for (int t = 0; t < 99; ++t) bank.update(std::vector<double>{0.0});
  const auto d = lyapunov_diagnostics(bank);
  ASSERT_EQ(d.mean_rate.size(), 100u);
  for (std::size_t t = 1; t <= 100; ++t) EXPECT_DOUBLE_EQ(d.mean_rate[t - 1][0], 4.0 / static_cast<double>(t));
}

// Property checks on random excess sequences.
TEST(QueueProperties, RandomSequences) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> y_dist(-3.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t servers = 1 + trial % 4;
    VirtualQueueBank bank(servers);
    std::vector<double> sum_y(servers, 0.0);
    for (int t = 0; t < 200; ++t) {
      std::vector<double> y(servers);
      for (auto& v : y) v = y_dist(rng);
      bank.update(y);
      for (std::size_t j = 0; j < servers; ++j) {
        sum_y[j] += y[j];
        EXPECT_GE(bank[j], 0.0);
        // Q(t) >= Q(0) + sum of y, the standard queue lower bound.
        EXPECT_GE(bank[j], sum_y[j] - 1e-9);
      }
    }
    const auto d = lyapunov_diagnostics(bank);
    ASSERT_EQ(d.lyapunov.size(), 201u);
    // Drifts telescope to L(T) - L(0).
    const double total = std::accumulate(d.drift.begin(), d.drift.end(), 0.0);
    EXPECT_NEAR(total, d.lyapunov.back() - d.lyapunov.front(), 1e-6);
    // One-slot drift never exceeds 1/2 sum y^2 + sum Q y.
    const auto& qh = bank.queue_history();
    const auto& yh = bank.excess_history();
    for (std::size_t t = 0; t < yh.size(); ++t) {
      double bound = 0.0;
      for (std::size_t j = 0; j < servers; ++j) bound += 0.5 * yh[t][j] * yh[t][j] + qh[t][j] * yh[t][j];
      EXPECT_LE(d.drift[t], bound + 1e-9);
      EXPECT_LE(0.5 * std::inner_product(yh[t].begin(), yh[t].end(), yh[t].begin(), 0.0),
                d.bound_estimate[t] + 1e-12);
    }
  }
}
