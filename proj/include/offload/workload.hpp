#pragma once

#include <string_view>

#include "offload/types.hpp"

namespace offload {

enum class WorkloadMode { PerToken, FlatStage };
enum class ModelScale { Small, Large, Custom };

// Compute cost of prefill and decode, in workload-units.
//
// PerToken charges every prompt token prefill_unit and every output token
// decode_unit, both divided by tokens_per_block so that token counts can be
// billed in blocks (e.g. per hundred tokens). FlatStage charges each stage once.
struct WorkloadModel {
  double prefill_unit = 2.0;
  double decode_unit = 1.0;
  WorkloadMode mode = WorkloadMode::PerToken;
  ModelScale scale = ModelScale::Small;
  double tokens_per_block = 1.0;

  static WorkloadModel small(WorkloadMode mode = WorkloadMode::PerToken);
  static WorkloadModel large(WorkloadMode mode = WorkloadMode::PerToken);
};

double workload_units(const Task& task, const WorkloadModel& model, bool use_predicted);

std::string_view to_string(WorkloadMode mode);
std::string_view to_string(ModelScale scale);
WorkloadMode parse_workload_mode(std::string_view name);
ModelScale parse_model_scale(std::string_view name);

}  // namespace offload
