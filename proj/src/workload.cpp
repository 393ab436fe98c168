#include "offload/workload.hpp"

#include <string>

#include "offload/errors.hpp"

namespace offload {

std::size_t Assignment::drop_count() const {
  std::size_t n = 0;
  for (const auto& s : server) {
    if (!s) ++n;
  }
  return n;
}

WorkloadModel WorkloadModel::small(WorkloadMode mode) {
  return WorkloadModel{2.0, 1.0, mode, ModelScale::Small, 1.0};
}

WorkloadModel WorkloadModel::large(WorkloadMode mode) {
  return WorkloadModel{8.0, 4.0, mode, ModelScale::Large, 1.0};
}

double workload_units(const Task& task, const WorkloadModel& model, bool use_predicted) {
  if (model.mode == WorkloadMode::FlatStage) {
    return model.prefill_unit + model.decode_unit;
  }
  const auto output = use_predicted ? task.predicted_output_tokens : task.true_output_tokens;
  const double prefill = model.prefill_unit * static_cast<double>(task.prompt_tokens);
  const double decode = model.decode_unit * static_cast<double>(output);
  return (prefill + decode) / model.tokens_per_block;
}

std::string_view to_string(WorkloadMode mode) {
  return mode == WorkloadMode::PerToken ? "per_token" : "flat_stage";
}

std::string_view to_string(ModelScale scale) {
  switch (scale) {
    case ModelScale::Small: return "small";
    case ModelScale::Large: return "large";
    case ModelScale::Custom: return "custom";
  }
  return "custom";
}

WorkloadMode parse_workload_mode(std::string_view name) {
  if (name == "per_token") return WorkloadMode::PerToken;
  if (name == "flat_stage") return WorkloadMode::FlatStage;
  throw ConfigError("unknown workload mode '" + std::string(name) + "'");
}

ModelScale parse_model_scale(std::string_view name) {
  if (name == "small") return ModelScale::Small;
  if (name == "large") return ModelScale::Large;
  if (name == "custom") return ModelScale::Custom;
  throw ConfigError("unknown model scale '" + std::string(name) + "'");
}

}  // namespace offload
