#pragma once

#include <cstdint>
#include <filesystem>
#include <unordered_map>

#include "offload/config.hpp"
#include "offload/types.hpp"

namespace offload {

inline constexpr const char* kPredictionsHeader = "task_id,predicted_tokens";

using PredictionTable = std::unordered_map<TaskId, std::int64_t>;

PredictionTable load_predictions(const std::filesystem::path& path);
void save_predictions(const PredictionTable& table, const std::filesystem::path& path);

// Output-length predictor. Noisy draws are keyed by (seed, task id) so results do
// not depend on the order in which tasks are predicted.
class Predictor {
 public:
  static Predictor oracle();
  static Predictor constant(double mean);
  static Predictor noisy(double relative_stddev, std::uint64_t seed);
  static Predictor from_table(PredictionTable table);

  // Builds from a spec; `trace_mean` fills an unset Constant mean.
  static Predictor from_spec(const PredictorSpec& spec, double trace_mean, std::uint64_t seed);

  PredictorKind kind() const { return kind_; }
  std::int64_t predict(const Task& task) const;

 private:
  PredictorKind kind_ = PredictorKind::Oracle;
  double mean_ = 0.0;
  double relative_stddev_ = 0.0;
  std::uint64_t seed_ = 0;
  PredictionTable table_;
};

}  // namespace offload
