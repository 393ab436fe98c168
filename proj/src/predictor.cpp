#include "offload/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <string>

#include <fmt/format.h>

#include "offload/errors.hpp"
#include "offload/rng.hpp"
#include "csv.hpp"

namespace offload {

using csv::parse_number;
using csv::trim;

PredictionTable load_predictions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open predictions file " + path.string());
  PredictionTable table;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto content = trim(line);
    if (content.empty()) continue;
    if (!header_seen) {
      if (content != kPredictionsHeader) {
        throw ParseError(line_no, fmt::format("expected header '{}'", kPredictionsHeader));
      }
      header_seen = true;
      continue;
    }
    const auto comma = content.find(',');
    if (comma == std::string_view::npos || content.find(',', comma + 1) != std::string_view::npos) {
      throw ParseError(line_no, "expected 2 fields");
    }
    const auto id = parse_number<TaskId>(trim(content.substr(0, comma)), line_no, "task_id");
    const auto tokens = parse_number<std::int64_t>(trim(content.substr(comma + 1)), line_no, "predicted_tokens");
    if (tokens < 0) throw ValidationError(fmt::format("line {}: negative prediction", line_no));
    if (!table.emplace(id, tokens).second) {
      throw ParseError(line_no, fmt::format("duplicate task_id {}", id));
    }
  }
  if (!header_seen) throw ParseError(line_no + 1, "missing header");
  return table;
}

void save_predictions(const PredictionTable& table, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write predictions file " + path.string());
  const std::map<TaskId, std::int64_t> ordered(table.begin(), table.end());
  out << kPredictionsHeader << '\n';
  for (const auto& [id, tokens] : ordered) out << id << ',' << tokens << '\n';
}

Predictor Predictor::oracle() { return Predictor{}; }

Predictor Predictor::constant(double mean) {
  Predictor p;
  p.kind_ = PredictorKind::Constant;
  p.mean_ = mean;
  return p;
}

Predictor Predictor::noisy(double relative_stddev, std::uint64_t seed) {
  Predictor p;
  p.kind_ = PredictorKind::Noisy;
  p.relative_stddev_ = relative_stddev;
  p.seed_ = seed;
  return p;
}

Predictor Predictor::from_table(PredictionTable table) {
  Predictor p;
  p.kind_ = PredictorKind::FromFile;
  p.table_ = std::move(table);
  return p;
}

Predictor Predictor::from_spec(const PredictorSpec& spec, double trace_mean, std::uint64_t seed) {
  switch (spec.kind) {
    case PredictorKind::Oracle: return oracle();
    case PredictorKind::Constant: return constant(spec.mean.value_or(trace_mean));
    case PredictorKind::Noisy: return noisy(spec.relative_stddev, seed);
    case PredictorKind::FromFile: return from_table(load_predictions(spec.path));
  }
  return oracle();
}

std::int64_t Predictor::predict(const Task& task) const {
  switch (kind_) {
    case PredictorKind::Oracle: return task.true_output_tokens;
    case PredictorKind::Constant: return std::llround(std::max(mean_, 0.0));
    case PredictorKind::Noisy: {
      if (relative_stddev_ == 0.0) return task.true_output_tokens;
      auto rng = make_rng(seed_, Stream::Predictor, task.id);
      const double eps = std::normal_distribution<double>(0.0, relative_stddev_)(rng);
      const double value = std::round(static_cast<double>(task.true_output_tokens) * (1.0 + eps));
      return static_cast<std::int64_t>(std::max(0.0, value));
    }
    case PredictorKind::FromFile: {
      const auto it = table_.find(task.id);
      if (it == table_.end()) throw LookupError(fmt::format("no prediction for task {}", task.id));
      return it->second;
    }
  }
  return task.true_output_tokens;
}

}  // namespace offload
