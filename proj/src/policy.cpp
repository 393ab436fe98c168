#include "offload/policy.hpp"

#include "offload/iodcc.hpp"
#include "offload/rng.hpp"

namespace offload {

namespace {

// Per task, the feasible server with the lowest score; ties go to the lowest id.
template <typename Score>
Assignment pick_min(const SlotState& state, Score score) {
  Assignment a;
  a.server.resize(state.num_tasks());
  for (std::size_t i = 0; i < state.num_tasks(); ++i) {
    double best = kInfinity;
    for (ServerId j = 0; j < state.num_servers(); ++j) {
      if (!state.feasible(i, j)) continue;
      const double s = score(i, j);
      if (!a.server[i] || s < best) {
        best = s;
        a.server[i] = j;
      }
    }
  }
  return a;
}

Decision plain(Assignment a) {
  Decision d;
  d.assignment = std::move(a);
  return d;
}

}  // namespace

Decision IodccPolicy::decide(const SlotState& state) {
  auto result = iodcc_solve(state, params_);
  return Decision{std::move(result.assignment), result.iterations, result.converged,
                  std::move(result.perceived_load)};
}

Decision GreedyAccuracyPolicy::decide(const SlotState& state) {
  return plain(pick_min(state, [&](std::size_t i, ServerId j) {
    return -state.servers[j].accuracy.at(state.tasks[i].type);
  }));
}

Decision GreedyComputePolicy::decide(const SlotState& state) {
  return plain(pick_min(state, [&](std::size_t, ServerId j) { return -state.servers[j].capacity; }));
}

Decision GreedyDelayPolicy::decide(const SlotState& state) {
  Assignment a;
  a.server.resize(state.num_tasks());
  std::vector<double> backlog(state.num_servers());
  for (ServerId j = 0; j < state.num_servers(); ++j) backlog[j] = state.servers[j].backlog;

  for (const std::size_t i : arrival_order(state.tasks)) {
    const Task& t = state.tasks[i];
    const double q = state.workloads[i];
    double best = kInfinity;
    for (ServerId j = 0; j < state.num_servers(); ++j) {
      if (!state.feasible(i, j)) continue;
      const double kappa =
          comm_delay(t.data_size, state.links->rate(t.client, j), state.links->propagation(t.client, j));
      const double delay = kappa + (backlog[j] + q) / state.servers[j].capacity;
      if (!a.server[i] || delay < best) {
        best = delay;
        a.server[i] = j;
      }
    }
    if (a.server[i]) backlog[*a.server[i]] += q;
  }
  return plain(std::move(a));
}

RandomPolicy::RandomPolicy(std::uint64_t seed) : rng_(derive_seed(seed, Stream::Policy)) {}

Decision RandomPolicy::decide(const SlotState& state) {
  Assignment a;
  a.server.resize(state.num_tasks());
  std::vector<ServerId> options;
  for (std::size_t i = 0; i < state.num_tasks(); ++i) {
    options.clear();
    for (ServerId j = 0; j < state.num_servers(); ++j) {
      if (state.feasible(i, j)) options.push_back(j);
    }
    if (options.empty()) continue;
    std::uniform_int_distribution<std::size_t> pick(0, options.size() - 1);
    a.server[i] = options[pick(rng_)];
  }
  return plain(std::move(a));
}

std::unique_ptr<Policy> make_policy(const PolicySpec& spec) {
  switch (spec.kind) {
    case PolicyKind::Iodcc: return std::make_unique<IodccPolicy>(spec.iodcc);
    case PolicyKind::GreedyAccuracy: return std::make_unique<GreedyAccuracyPolicy>();
    case PolicyKind::GreedyCompute: return std::make_unique<GreedyComputePolicy>();
    case PolicyKind::GreedyDelay: return std::make_unique<GreedyDelayPolicy>();
    case PolicyKind::Random: return std::make_unique<RandomPolicy>(spec.seed);
  }
  return std::make_unique<IodccPolicy>(spec.iodcc);
}

}  // namespace offload
