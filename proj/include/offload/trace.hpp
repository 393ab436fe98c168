#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "offload/config.hpp"
#include "offload/types.hpp"

namespace offload {

inline constexpr const char* kTraceHeader =
    "slot,client,task_type,prompt_tokens,output_tokens,data_size";

struct TraceRow {
  TaskId id = 0;  // row index in the source file (or generation order)
  std::int64_t slot = 0;
  std::size_t client = 0;
  std::size_t task_type = 0;
  std::int64_t prompt_tokens = 0;
  std::int64_t output_tokens = 0;
  double data_size = 0.0;
  bool operator==(const TraceRow&) const = default;
};

// Rows ordered by (slot, arrival order within the slot).
struct Trace {
  std::vector<TraceRow> rows;
  std::string source;
  std::uint64_t seed = 0;

  double mean_output_tokens() const;
};

Trace load_trace(const std::filesystem::path& path);
void save_trace(const Trace& trace, const std::filesystem::path& path);

// Deterministic synthetic trace for `horizon` slots. Pure in (config, params, seed).
Trace generate_trace(const SystemConfig& system, const GeneratorParams& params, std::uint64_t seed);

// Converts trace rows into tasks, assigning intra-slot ranks and per-type sensitivities.
std::vector<Task> tasks_from_trace(const Trace& trace, const std::vector<TaskTypeProfile>& types);

}  // namespace offload
