#include "offload/trace.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <string>
#include <string_view>

#include <fmt/format.h>

#include "offload/errors.hpp"
#include "offload/rng.hpp"
#include "csv.hpp"

namespace offload {

using csv::parse_number;
using csv::split;
using csv::trim;

double Trace::mean_output_tokens() const {
  if (rows.empty()) return 0.0;
  double total = 0.0;
  for (const auto& r : rows) total += static_cast<double>(r.output_tokens);
  return total / static_cast<double>(rows.size());
}

Trace load_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace file " + path.string());

  Trace trace;
  trace.source = path.string();
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto content = trim(line);
    if (content.empty()) continue;
    if (!header_seen) {
      if (content != kTraceHeader) {
        throw ParseError(line_no, fmt::format("expected header '{}'", kTraceHeader));
      }
      header_seen = true;
      continue;
    }
    const auto fields = split(content);
    if (fields.size() != 6) {
      throw ParseError(line_no, fmt::format("expected 6 fields, found {}", fields.size()));
    }
    const auto slot = parse_number<std::int64_t>(fields[0], line_no, "slot");
    const auto client = parse_number<std::int64_t>(fields[1], line_no, "client");
    const auto type = parse_number<std::int64_t>(fields[2], line_no, "task_type");
    const auto prompt = parse_number<std::int64_t>(fields[3], line_no, "prompt_tokens");
    const auto output = parse_number<std::int64_t>(fields[4], line_no, "output_tokens");
    const auto data = parse_number<double>(fields[5], line_no, "data_size");
    if (slot < 0 || client < 0 || type < 0 || prompt < 0 || output < 0 || !(data >= 0.0)) {
      throw ValidationError(fmt::format("line {}: negative value in trace row", line_no));
    }
    TraceRow row;
    row.id = trace.rows.size();
    row.slot = slot;
    row.client = static_cast<std::size_t>(client);
    row.task_type = static_cast<std::size_t>(type);
    row.prompt_tokens = prompt;
    row.output_tokens = output;
    row.data_size = data;
    trace.rows.push_back(row);
  }
  if (!header_seen) throw ParseError(line_no + 1, "missing header");
  std::stable_sort(trace.rows.begin(), trace.rows.end(),
                   [](const TraceRow& a, const TraceRow& b) { return a.slot < b.slot; });
  return trace;
}

void save_trace(const Trace& trace, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trace file " + path.string());
  out << kTraceHeader << '\n';
  for (const auto& r : trace.rows) {
    out << fmt::format("{},{},{},{},{},{}\n", r.slot, r.client, r.task_type, r.prompt_tokens, r.output_tokens,
                       r.data_size);
  }
}

namespace {

std::int64_t draw_tokens(std::mt19937_64& rng, const LogNormalTokens& dist, std::int64_t lo, std::int64_t hi) {
  const double raw = std::lognormal_distribution<double>(dist.log_mean, dist.log_sd)(rng);
  const double clipped = std::clamp(std::round(raw), static_cast<double>(lo), static_cast<double>(hi));
  return static_cast<std::int64_t>(clipped);
}

}  // namespace

Trace generate_trace(const SystemConfig& system, const GeneratorParams& params, std::uint64_t seed) {
  if (params.task_types.empty()) throw ValidationError("generator needs at least one task type");
  if (!(params.rate_per_client >= 0.0) || !(params.burst_multiplier >= 0.0) ||
      !(params.burst_prob >= 0.0 && params.burst_prob <= 1.0)) {
    throw ValidationError("invalid arrival parameters");
  }
  std::vector<double> weights;
  for (const auto& t : params.task_types) {
    if (!(t.weight >= 0.0) || !(t.prompt.log_sd >= 0.0) || !(t.output.log_sd >= 0.0)) {
      throw ValidationError("invalid token-length parameters");
    }
    weights.push_back(t.weight);
  }

  Trace trace;
  trace.source = "synthetic";
  trace.seed = seed;
  auto rng = make_rng(seed, Stream::Arrivals);
  std::discrete_distribution<std::size_t> pick_type(weights.begin(), weights.end());
  std::bernoulli_distribution burst(params.burst_prob);

  std::vector<TraceRow> slot_rows;
  for (std::int64_t t = 0; t < system.horizon; ++t) {
    slot_rows.clear();
    for (std::size_t m = 0; m < system.num_clients; ++m) {
      double rate = params.rate_per_client;
      if (params.arrival == ArrivalProcess::Bursty && burst(rng)) rate *= params.burst_multiplier;
      const auto count = rate > 0.0 ? std::poisson_distribution<std::int64_t>(rate)(rng) : 0;
      for (std::int64_t n = 0; n < count; ++n) {
        TraceRow row;
        row.slot = t;
        row.client = m;
        row.task_type = pick_type(rng);
        const auto& dist = params.task_types[row.task_type];
        row.prompt_tokens = draw_tokens(rng, dist.prompt, params.token_min, params.token_max);
        row.output_tokens = draw_tokens(rng, dist.output, params.token_min, params.token_max);
        row.data_size = static_cast<double>(row.prompt_tokens) * params.data_per_token;
        slot_rows.push_back(row);
      }
    }
    // Arrival order within the slot interleaves clients.
    std::shuffle(slot_rows.begin(), slot_rows.end(), rng);
    for (auto& row : slot_rows) {
      row.id = trace.rows.size();
      trace.rows.push_back(row);
    }
  }
  return trace;
}

std::vector<Task> tasks_from_trace(const Trace& trace, const std::vector<TaskTypeProfile>& types) {
  std::vector<Task> tasks;
  tasks.reserve(trace.rows.size());
  std::int64_t current_slot = -1;
  std::size_t rank = 0;
  for (const auto& row : trace.rows) {
    if (row.task_type >= types.size()) {
      throw ValidationError(fmt::format("trace row {} has task_type {} but only {} types are configured", row.id,
                                        row.task_type, types.size()));
    }
    if (row.slot < current_slot) throw ValidationError("trace slots must be non-decreasing");
    if (row.slot != current_slot) {
      current_slot = row.slot;
      rank = 0;
    }
    Task task;
    task.id = row.id;
    task.client = row.client;
    task.type = row.task_type;
    task.arrival_slot = row.slot;
    task.intra_slot_rank = rank++;
    task.data_size = row.data_size;
    task.prompt_tokens = row.prompt_tokens;
    task.true_output_tokens = row.output_tokens;
    task.predicted_output_tokens = row.output_tokens;
    task.delay_sensitivity = types[row.task_type].delay_sensitivity;
    task.accuracy_sensitivity = types[row.task_type].accuracy_sensitivity;
    tasks.push_back(task);
  }
  return tasks;
}

}  // namespace offload
