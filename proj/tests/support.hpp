#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>

#include "offload/config.hpp"
#include "offload/slot.hpp"

namespace offload::fixtures {

inline Server make_server(ServerId id, double capacity, double threshold = 1.0, double accuracy = 0.5,
                          double backlog = 0.0, std::size_t types = 1) {
  Server s;
  s.id = id;
  s.capacity = capacity;
  s.threshold = threshold;
  s.accuracy.assign(types, accuracy);
  s.backlog = backlog;
  return s;
}

inline Task make_task(TaskId id, std::size_t rank = 0, double data = 0.0, double alpha = 1.0, double beta = 1.0) {
  Task t;
  t.id = id;
  t.intra_slot_rank = rank;
  t.data_size = data;
  t.delay_sensitivity = alpha;
  t.accuracy_sensitivity = beta;
  return t;
}

// One client; every link gets the same rate and propagation delay.
inline LinkState uniform_links(std::size_t servers, double rate, double propagation, std::size_t clients = 1) {
  LinkState links(clients, servers);
  for (std::size_t m = 0; m < clients; ++m) {
    for (ServerId j = 0; j < servers; ++j) links.set(m, j, rate, propagation);
  }
  return links;
}

// Scratch directory under the system temp dir, wiped on construction.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("offload_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::filesystem::path write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  return path;
}

// Small deterministic config for fast simulator tests.
inline Config small_config(std::int64_t horizon = 20) {
  Config c = default_config();
  c.system.num_edge = 2;
  c.system.num_cloud = 2;
  c.system.num_clients = 3;
  c.system.horizon = horizon;
  return c;
}

}  // namespace offload::fixtures
