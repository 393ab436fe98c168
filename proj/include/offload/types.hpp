#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace offload {

using ServerId = std::size_t;
using TaskId = std::uint64_t;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class Tier { Edge, Cloud };

// One compute device. Ids [0, N) are edge servers, [N, N+U) are cloud servers.
struct Server {
  ServerId id = 0;
  Tier tier = Tier::Edge;
  double capacity = 1.0;           // f_j, workload-units per time-unit
  double threshold = 0.0;          // long-term compute-time budget per slot
  std::vector<double> accuracy;    // indexed by task type, each in [0, 1]
  double backlog = 0.0;            // physical unfinished workload, >= 0
};

// Delay and accuracy preferences shared by every task of one type.
struct TaskTypeProfile {
  double delay_sensitivity = 1.0;     // alpha_k
  double accuracy_sensitivity = 1.0;  // beta_k
};

struct Task {
  TaskId id = 0;
  std::size_t client = 0;
  std::size_t type = 0;
  std::int64_t arrival_slot = 0;
  std::size_t intra_slot_rank = 0;
  double data_size = 0.0;
  std::int64_t prompt_tokens = 0;
  std::int64_t true_output_tokens = 0;
  std::int64_t predicted_output_tokens = 0;
  double delay_sensitivity = 1.0;
  double accuracy_sensitivity = 1.0;
};

// Per-slot channel state for every (client, server) pair, row-major by client.
class LinkState {
 public:
  LinkState() = default;
  LinkState(std::size_t num_clients, std::size_t num_servers)
      : num_clients_(num_clients),
        num_servers_(num_servers),
        rate_(num_clients * num_servers, 0.0),
        propagation_(num_clients * num_servers, 0.0) {}

  std::size_t num_clients() const { return num_clients_; }
  std::size_t num_servers() const { return num_servers_; }

  double rate(std::size_t client, ServerId server) const { return rate_.at(index(client, server)); }
  double propagation(std::size_t client, ServerId server) const {
    return propagation_.at(index(client, server));
  }
  void set(std::size_t client, ServerId server, double rate, double propagation) {
    rate_.at(index(client, server)) = rate;
    propagation_.at(index(client, server)) = propagation;
  }

  // Link feasibility indicator: the rate must strictly exceed the minimum.
  bool feasible(std::size_t client, ServerId server, double min_rate) const {
    return rate(client, server) > min_rate;
  }

 private:
  std::size_t index(std::size_t client, ServerId server) const {
    if (client >= num_clients_ || server >= num_servers_) {
      throw std::out_of_range("link index out of range");
    }
    return client * num_servers_ + server;
  }

  std::size_t num_clients_ = 0;
  std::size_t num_servers_ = 0;
  std::vector<double> rate_;
  std::vector<double> propagation_;
};

// Offloading decision for the tasks of one slot, aligned with the slot's task order.
// An empty entry marks a dropped task.
struct Assignment {
  std::vector<std::optional<ServerId>> server;

  std::size_t size() const { return server.size(); }
  bool dropped(std::size_t i) const { return !server.at(i).has_value(); }
  std::size_t drop_count() const;
  bool operator==(const Assignment&) const = default;
};

// Realized (or planned) consequences of placing one task.
struct TaskOutcome {
  std::optional<ServerId> server;
  bool dropped = false;
  double comm_delay = 0.0;   // kappa
  double comp_delay = 0.0;   // tau
  double accuracy = 0.0;     // phi
  double delay_sensitivity = 0.0;
  double accuracy_sensitivity = 0.0;
};

}  // namespace offload
