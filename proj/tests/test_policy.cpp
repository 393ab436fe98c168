#include <gtest/gtest.h>

#include "offload/policy.hpp"
#include "support.hpp"

using namespace offload;
using fixtures::make_server;
using fixtures::make_task;

namespace {

SlotInstance two_servers(double f0, double f1, double phi0, double phi1, std::size_t tasks = 3) {
  SlotInstance inst;
  for (std::size_t i = 0; i < tasks; ++i) {
    inst.tasks.push_back(make_task(i, i, 1.0));
    inst.workloads.push_back(4.0);
  }
  inst.servers = {make_server(0, f0, 1.0, phi0), make_server(1, f1, 1.0, phi1)};
  inst.queues = {0.0, 0.0};
  inst.links = fixtures::uniform_links(2, 2.0, 0.1);
  inst.V = 10.0;
  inst.delta = 1.0;
  return inst;
}

}  // namespace

TEST(GreedyCompute, PicksFastestServer) {
  const auto inst = two_servers(3.0, 7.0, 0.5, 0.5);
  const auto d = GreedyComputePolicy{}.decide(inst.view());
  for (const auto& s : d.assignment.server) EXPECT_EQ(s, ServerId{1});
}

TEST(GreedyAccuracy, PicksMostAccurateServer) {
  const auto inst = two_servers(5.0, 5.0, 0.3, 0.9);
  const auto d = GreedyAccuracyPolicy{}.decide(inst.view());
  for (const auto& s : d.assignment.server) EXPECT_EQ(s, ServerId{1});
}

TEST(GreedyDelay, IdenticalTasksSplitAcrossIdenticalServers) {
  const auto inst = two_servers(2.0, 2.0, 0.5, 0.5, 2);
  // Task 0: both servers cost 0.6 + 4/2, tie goes to server 0.
  // Task 1: server 0 now costs 0.6 + 8/2 against 0.6 + 4/2 on server 1.
  const auto d = GreedyDelayPolicy{}.decide(inst.view());
  EXPECT_EQ(d.assignment, (Assignment{{0, 1}}));
}

TEST(GreedyDelay, FollowsArrivalRankNotArrayOrder) {
  auto inst = two_servers(2.0, 2.0, 0.5, 0.5, 2);
  inst.tasks[0].intra_slot_rank = 1;
  inst.tasks[1].intra_slot_rank = 0;
  const auto d = GreedyDelayPolicy{}.decide(inst.view());
  EXPECT_EQ(d.assignment, (Assignment{{1, 0}}));
}

TEST(Greedy, InfeasibleServersSkipped) {
  auto inst = two_servers(3.0, 7.0, 0.3, 0.9, 1);
  inst.links.set(0, 1, 0.1, 0.1);
  inst.min_rate = 0.5;
  EXPECT_EQ(GreedyComputePolicy{}.decide(inst.view()).assignment.server[0], ServerId{0});
  EXPECT_EQ(GreedyAccuracyPolicy{}.decide(inst.view()).assignment.server[0], ServerId{0});
  EXPECT_EQ(GreedyDelayPolicy{}.decide(inst.view()).assignment.server[0], ServerId{0});
  inst.links.set(0, 0, 0.1, 0.1);
  EXPECT_TRUE(GreedyComputePolicy{}.decide(inst.view()).assignment.dropped(0));
  EXPECT_TRUE(RandomPolicy{1}.decide(inst.view()).assignment.dropped(0));
}

TEST(RandomPolicy, DeterministicAndFeasible) {
  auto inst = two_servers(3.0, 7.0, 0.3, 0.9, 20);
  RandomPolicy a(5), b(5);
  const auto da = a.decide(inst.view());
  EXPECT_EQ(da.assignment, b.decide(inst.view()).assignment);
  std::size_t on_one = 0;
  for (const auto& s : da.assignment.server) on_one += (s == ServerId{1});
  EXPECT_GT(on_one, 0u);
  EXPECT_LT(on_one, 20u);
}

TEST(MakePolicy, NamesMatchKinds) {
  PolicySpec spec;
  for (auto [kind, name] : {std::pair{PolicyKind::Iodcc, "iodcc"}, {PolicyKind::GreedyAccuracy, "greedy_accuracy"},
                            {PolicyKind::GreedyCompute, "greedy_compute"}, {PolicyKind::GreedyDelay, "greedy_delay"},
                            {PolicyKind::Random, "random"}}) {
    spec.kind = kind;
    EXPECT_EQ(make_policy(spec)->name(), name);
  }
}
