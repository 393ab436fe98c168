#pragma once

#include <memory>
#include <random>
#include <string>

#include "offload/config.hpp"
#include "offload/slot.hpp"

namespace offload {

struct Decision {
  Assignment assignment;
  int iterations = 0;
  bool converged = true;
  std::vector<double> perceived_load;
};

// Maps a slot state to a decision. Every placed task uses a feasible link; tasks
// with no feasible server are dropped.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual Decision decide(const SlotState& state) = 0;
  virtual std::string name() const = 0;
};

class IodccPolicy final : public Policy {
 public:
  explicit IodccPolicy(IodccParams params) : params_(params) {}
  Decision decide(const SlotState& state) override;
  std::string name() const override { return "iodcc"; }

 private:
  IodccParams params_;
};

// Highest accuracy for the task's type.
class GreedyAccuracyPolicy final : public Policy {
 public:
  Decision decide(const SlotState& state) override;
  std::string name() const override { return "greedy_accuracy"; }
};

// Highest capacity.
class GreedyComputePolicy final : public Policy {
 public:
  Decision decide(const SlotState& state) override;
  std::string name() const override { return "greedy_compute"; }
};

// Lowest kappa + (B_j + q) / f_j, placing tasks in arrival order and charging
// each placement to the server's backlog before the next task decides.
class GreedyDelayPolicy final : public Policy {
 public:
  Decision decide(const SlotState& state) override;
  std::string name() const override { return "greedy_delay"; }
};

class RandomPolicy final : public Policy {
 public:
  explicit RandomPolicy(std::uint64_t seed);
  Decision decide(const SlotState& state) override;
  std::string name() const override { return "random"; }

 private:
  std::mt19937_64 rng_;
};

std::unique_ptr<Policy> make_policy(const PolicySpec& spec);

}  // namespace offload
