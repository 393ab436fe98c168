#include "offload/config.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "offload/errors.hpp"
#include "offload/rng.hpp"

namespace offload {

using nlohmann::json;

Config default_config() {
  Config config;
  config.workload = WorkloadModel::small();
  config.workload.tokens_per_block = 100.0;
  config.servers.edge_threshold = {0.4, 0.8};
  config.servers.cloud_threshold = {0.4, 0.8};
  config.generator.task_types = {
      // short chat
      TaskTypeTokens{{4.8, 0.7}, {5.0, 0.9}, 1.0},
      // long-context summarization
      TaskTypeTokens{{6.4, 0.6}, {4.8, 0.7}, 1.0},
      // reasoning / code generation
      TaskTypeTokens{{5.3, 0.8}, {6.1, 0.9}, 1.0},
  };
  return config;
}

namespace {

void check_range(std::vector<std::string>& errors, const char* name, const Range& r, double min_lo,
                 double max_hi = kInfinity) {
  if (!(r.lo <= r.hi)) {
    errors.push_back(fmt::format("{} range must satisfy lo <= hi", name));
  }
  if (!(r.lo >= min_lo) || !(r.hi <= max_hi)) {
    errors.push_back(fmt::format("{} range must lie within [{}, {}]", name, min_lo, max_hi));
  }
}

}  // namespace

std::vector<std::string> validate_config(const Config& config) {
  std::vector<std::string> errors;
  const auto& sys = config.system;
  if (sys.num_edge == 0 && sys.num_cloud == 0) errors.emplace_back("at least one server is required");
  if (sys.num_clients == 0) errors.emplace_back("num_clients must be >= 1");
  if (sys.num_task_types == 0) errors.emplace_back("num_task_types must be >= 1");
  if (sys.horizon < 1) errors.emplace_back("horizon must be >= 1");
  if (!(sys.slot_duration > 0.0)) errors.emplace_back("slot_duration must be positive");
  if (!(sys.tradeoff_V >= 0.0)) errors.emplace_back("tradeoff_V must be >= 0");
  if (!(sys.accuracy_weight_delta >= 0.0)) errors.emplace_back("accuracy_weight_delta must be >= 0");
  if (!(sys.min_rate >= 0.0)) errors.emplace_back("min_rate must be >= 0");
  if (!(sys.drop_delay >= 0.0)) errors.emplace_back("drop_delay must be >= 0");

  const auto& s = config.servers;
  if (!(s.edge_capacity.lo > 0.0) || !(s.cloud_capacity.lo > 0.0)) {
    errors.emplace_back("capacity must be positive");
  }
  check_range(errors, "edge_capacity", s.edge_capacity, 0.0);
  check_range(errors, "cloud_capacity", s.cloud_capacity, 0.0);
  check_range(errors, "edge_threshold", s.edge_threshold, 0.0);
  check_range(errors, "cloud_threshold", s.cloud_threshold, 0.0);
  check_range(errors, "edge_accuracy", s.edge_accuracy, 0.0, 1.0);
  check_range(errors, "cloud_accuracy", s.cloud_accuracy, 0.0, 1.0);
  check_range(errors, "edge_propagation", s.edge_propagation, 0.0);
  check_range(errors, "cloud_propagation", s.cloud_propagation, 0.0);
  check_range(errors, "edge_rate", s.edge_rate, 0.0);
  check_range(errors, "cloud_rate", s.cloud_rate, 0.0);
  check_range(errors, "delay_sensitivity", config.tasks.delay_sensitivity, 0.0);
  check_range(errors, "accuracy_sensitivity", config.tasks.accuracy_sensitivity, 0.0);

  const auto& w = config.workload;
  if (!(w.prefill_unit > 0.0) || !(w.decode_unit > 0.0)) {
    errors.emplace_back("prefill_unit and decode_unit must be positive");
  }
  if (!(w.tokens_per_block > 0.0)) errors.emplace_back("tokens_per_block must be positive");

  const auto& g = config.generator;
  if (!(g.rate_per_client >= 0.0)) errors.emplace_back("rate_per_client must be >= 0");
  if (!(g.burst_prob >= 0.0 && g.burst_prob <= 1.0)) errors.emplace_back("burst_prob must lie in [0, 1]");
  if (!(g.burst_multiplier >= 0.0)) errors.emplace_back("burst_multiplier must be >= 0");
  if (!(g.data_per_token > 0.0)) errors.emplace_back("data_per_token must be positive");
  if (g.token_min < 0 || g.token_max < g.token_min) errors.emplace_back("token bounds must satisfy 0 <= min <= max");
  if (g.task_types.size() != sys.num_task_types) {
    errors.push_back(fmt::format("generator defines {} task types but num_task_types is {}", g.task_types.size(),
                                 sys.num_task_types));
  }
  double total_weight = 0.0;
  for (const auto& t : g.task_types) {
    if (!(t.prompt.log_sd >= 0.0) || !(t.output.log_sd >= 0.0)) {
      errors.emplace_back("token log_sd must be >= 0");
    }
    if (!(t.weight >= 0.0)) errors.emplace_back("task type weight must be >= 0");
    total_weight += t.weight;
  }
  if (!g.task_types.empty() && !(total_weight > 0.0)) errors.emplace_back("task type weights must not all be zero");

  const auto& p = config.predictor;
  if (p.kind == PredictorKind::Constant && p.mean && !(*p.mean >= 0.0)) {
    errors.emplace_back("constant predictor mean must be >= 0");
  }
  if (p.kind == PredictorKind::Noisy && !(p.relative_stddev >= 0.0)) {
    errors.emplace_back("noisy predictor relative_stddev must be >= 0");
  }
  if (p.kind == PredictorKind::FromFile && p.path.empty()) errors.emplace_back("file predictor requires a path");

  const auto& it = config.policy.iodcc;
  if (it.max_iters < 1) errors.emplace_back("iodcc max_iters must be >= 1");
  if (!(it.damping > 0.0 && it.damping <= 1.0)) errors.emplace_back("iodcc damping must lie in (0, 1]");
  if (!(it.congestion_weight >= 0.0)) errors.emplace_back("iodcc congestion_weight must be >= 0");
  return errors;
}

std::string_view to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::Iodcc: return "iodcc";
    case PolicyKind::GreedyAccuracy: return "greedy_accuracy";
    case PolicyKind::GreedyCompute: return "greedy_compute";
    case PolicyKind::GreedyDelay: return "greedy_delay";
    case PolicyKind::Random: return "random";
  }
  return "iodcc";
}

PolicyKind parse_policy_kind(std::string_view name) {
  for (auto kind : {PolicyKind::Iodcc, PolicyKind::GreedyAccuracy, PolicyKind::GreedyCompute,
                    PolicyKind::GreedyDelay, PolicyKind::Random}) {
    if (to_string(kind) == name) return kind;
  }
  throw ConfigError("unknown policy '" + std::string(name) + "'");
}

std::string_view to_string(PredictorKind kind) {
  switch (kind) {
    case PredictorKind::Oracle: return "oracle";
    case PredictorKind::Constant: return "constant";
    case PredictorKind::Noisy: return "noisy";
    case PredictorKind::FromFile: return "file";
  }
  return "oracle";
}

PredictorKind parse_predictor_kind(std::string_view name) {
  for (auto kind : {PredictorKind::Oracle, PredictorKind::Constant, PredictorKind::Noisy, PredictorKind::FromFile}) {
    if (to_string(kind) == name) return kind;
  }
  throw ConfigError("unknown predictor '" + std::string(name) + "'");
}

namespace {

json range_json(const Range& r) { return json::array({r.lo, r.hi}); }

Range range_from(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ConfigError("range must be a two-element array");
  return Range{j[0].get<double>(), j[1].get<double>()};
}

json tokens_json(const LogNormalTokens& t) { return json{{"log_mean", t.log_mean}, {"log_sd", t.log_sd}}; }

LogNormalTokens tokens_from(const json& j) {
  return LogNormalTokens{j.at("log_mean").get<double>(), j.at("log_sd").get<double>()};
}

template <typename T>
void read_if(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

void read_range_if(const json& obj, const char* key, Range& out) {
  if (obj.contains(key)) out = range_from(obj.at(key));
}

}  // namespace

json config_to_json(const Config& c) {
  const auto& s = c.system;
  json doc;
  doc["schema_version"] = kConfigSchemaVersion;
  doc["system"] = {
      {"num_edge", s.num_edge},
      {"num_cloud", s.num_cloud},
      {"num_clients", s.num_clients},
      {"num_task_types", s.num_task_types},
      {"horizon", s.horizon},
      {"slot_duration", s.slot_duration},
      {"tradeoff_V", s.tradeoff_V},
      {"accuracy_weight_delta", s.accuracy_weight_delta},
      {"min_rate", s.min_rate},
      {"rng_seed", s.rng_seed},
      {"drop_delay", s.drop_delay},
  };
  const auto& v = c.servers;
  doc["servers"] = {
      {"edge_capacity", range_json(v.edge_capacity)},
      {"cloud_capacity", range_json(v.cloud_capacity)},
      {"edge_threshold", range_json(v.edge_threshold)},
      {"cloud_threshold", range_json(v.cloud_threshold)},
      {"edge_accuracy", range_json(v.edge_accuracy)},
      {"cloud_accuracy", range_json(v.cloud_accuracy)},
      {"edge_propagation", range_json(v.edge_propagation)},
      {"cloud_propagation", range_json(v.cloud_propagation)},
      {"edge_rate", range_json(v.edge_rate)},
      {"cloud_rate", range_json(v.cloud_rate)},
  };
  doc["tasks"] = {
      {"delay_sensitivity", range_json(c.tasks.delay_sensitivity)},
      {"accuracy_sensitivity", range_json(c.tasks.accuracy_sensitivity)},
  };
  doc["workload"] = {
      {"mode", to_string(c.workload.mode)},
      {"scale", to_string(c.workload.scale)},
      {"prefill_unit", c.workload.prefill_unit},
      {"decode_unit", c.workload.decode_unit},
      {"tokens_per_block", c.workload.tokens_per_block},
  };
  const auto& g = c.generator;
  json types = json::array();
  for (const auto& t : g.task_types) {
    types.push_back({{"prompt", tokens_json(t.prompt)}, {"output", tokens_json(t.output)}, {"weight", t.weight}});
  }
  doc["generator"] = {
      {"arrival", g.arrival == ArrivalProcess::Poisson ? "poisson" : "bursty"},
      {"rate_per_client", g.rate_per_client},
      {"burst_prob", g.burst_prob},
      {"burst_multiplier", g.burst_multiplier},
      {"data_per_token", g.data_per_token},
      {"token_min", g.token_min},
      {"token_max", g.token_max},
      {"task_types", types},
  };
  const auto& p = c.predictor;
  doc["predictor"] = {
      {"kind", to_string(p.kind)},
      {"mean", p.mean ? json(*p.mean) : json(nullptr)},
      {"relative_stddev", p.relative_stddev},
      {"path", p.path},
  };
  doc["policy"] = {
      {"name", to_string(c.policy.kind)},
      {"seed", c.policy.seed},
      {"iodcc",
       {{"max_iters", c.policy.iodcc.max_iters},
        {"damping", c.policy.iodcc.damping},
        {"congestion_weight", c.policy.iodcc.congestion_weight}}},
  };
  return doc;
}

Config config_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  if (doc.contains("schema_version") && doc.at("schema_version").get<int>() != kConfigSchemaVersion) {
    throw ConfigError(fmt::format("unsupported config schema_version {}", doc.at("schema_version").dump()));
  }
  Config c = default_config();
  try {
    if (doc.contains("system")) {
      const auto& j = doc.at("system");
      auto& s = c.system;
      read_if(j, "num_edge", s.num_edge);
      read_if(j, "num_cloud", s.num_cloud);
      read_if(j, "num_clients", s.num_clients);
      read_if(j, "num_task_types", s.num_task_types);
      read_if(j, "horizon", s.horizon);
      read_if(j, "slot_duration", s.slot_duration);
      read_if(j, "tradeoff_V", s.tradeoff_V);
      read_if(j, "accuracy_weight_delta", s.accuracy_weight_delta);
      read_if(j, "min_rate", s.min_rate);
      read_if(j, "rng_seed", s.rng_seed);
      read_if(j, "drop_delay", s.drop_delay);
    }
    if (doc.contains("servers")) {
      const auto& j = doc.at("servers");
      auto& v = c.servers;
      read_range_if(j, "edge_capacity", v.edge_capacity);
      read_range_if(j, "cloud_capacity", v.cloud_capacity);
      read_range_if(j, "edge_threshold", v.edge_threshold);
      read_range_if(j, "cloud_threshold", v.cloud_threshold);
      read_range_if(j, "edge_accuracy", v.edge_accuracy);
      read_range_if(j, "cloud_accuracy", v.cloud_accuracy);
      read_range_if(j, "edge_propagation", v.edge_propagation);
      read_range_if(j, "cloud_propagation", v.cloud_propagation);
      read_range_if(j, "edge_rate", v.edge_rate);
      read_range_if(j, "cloud_rate", v.cloud_rate);
    }
    if (doc.contains("tasks")) {
      const auto& j = doc.at("tasks");
      read_range_if(j, "delay_sensitivity", c.tasks.delay_sensitivity);
      read_range_if(j, "accuracy_sensitivity", c.tasks.accuracy_sensitivity);
    }
    if (doc.contains("workload")) {
      const auto& j = doc.at("workload");
      auto& w = c.workload;
      if (j.contains("mode")) w.mode = parse_workload_mode(j.at("mode").get<std::string>());
      if (j.contains("scale")) {
        w.scale = parse_model_scale(j.at("scale").get<std::string>());
        if (w.scale == ModelScale::Small) {
          w.prefill_unit = 2.0;
          w.decode_unit = 1.0;
        } else if (w.scale == ModelScale::Large) {
          w.prefill_unit = 8.0;
          w.decode_unit = 4.0;
        }
      }
      read_if(j, "prefill_unit", w.prefill_unit);
      read_if(j, "decode_unit", w.decode_unit);
      read_if(j, "tokens_per_block", w.tokens_per_block);
    }
    if (doc.contains("generator")) {
      const auto& j = doc.at("generator");
      auto& g = c.generator;
      if (j.contains("arrival")) {
        const auto name = j.at("arrival").get<std::string>();
        if (name == "poisson") {
          g.arrival = ArrivalProcess::Poisson;
        } else if (name == "bursty") {
          g.arrival = ArrivalProcess::Bursty;
        } else {
          throw ConfigError("unknown arrival process '" + name + "'");
        }
      }
      read_if(j, "rate_per_client", g.rate_per_client);
      read_if(j, "burst_prob", g.burst_prob);
      read_if(j, "burst_multiplier", g.burst_multiplier);
      read_if(j, "data_per_token", g.data_per_token);
      read_if(j, "token_min", g.token_min);
      read_if(j, "token_max", g.token_max);
      if (j.contains("task_types")) {
        g.task_types.clear();
        for (const auto& t : j.at("task_types")) {
          TaskTypeTokens tt;
          tt.prompt = tokens_from(t.at("prompt"));
          tt.output = tokens_from(t.at("output"));
          read_if(t, "weight", tt.weight);
          g.task_types.push_back(tt);
        }
      }
    }
    if (doc.contains("predictor")) {
      const auto& j = doc.at("predictor");
      auto& p = c.predictor;
      if (j.contains("kind")) p.kind = parse_predictor_kind(j.at("kind").get<std::string>());
      if (j.contains("mean")) {
        p.mean = j.at("mean").is_null() ? std::nullopt : std::optional<double>(j.at("mean").get<double>());
      }
      read_if(j, "relative_stddev", p.relative_stddev);
      read_if(j, "path", p.path);
    }
    if (doc.contains("policy")) {
      const auto& j = doc.at("policy");
      if (j.contains("name")) c.policy.kind = parse_policy_kind(j.at("name").get<std::string>());
      read_if(j, "seed", c.policy.seed);
      if (j.contains("iodcc")) {
        const auto& k = j.at("iodcc");
        read_if(k, "max_iters", c.policy.iodcc.max_iters);
        read_if(k, "damping", c.policy.iodcc.damping);
        read_if(k, "congestion_weight", c.policy.iodcc.congestion_weight);
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  return c;
}

std::string serialize_config(const Config& config) { return config_to_json(config).dump(2) + "\n"; }

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("cannot parse config file " + path.string() + ": " + e.what());
  }
  return config_from_json(doc);
}

void save_config(const Config& config, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config file " + path.string());
  out << serialize_config(config);
}

namespace {

// Always consumes one draw so that degenerate ranges do not shift later samples.
double uniform(std::mt19937_64& rng, const Range& r) {
  return r.lo + (r.hi - r.lo) * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace

SystemInstance build_system(const Config& config) {
  const auto& sys = config.system;
  const auto& ranges = config.servers;
  const std::size_t num_servers = sys.num_servers();

  SystemInstance out;
  auto server_rng = make_rng(sys.rng_seed, Stream::Servers);
  out.servers.reserve(num_servers);
  for (ServerId j = 0; j < num_servers; ++j) {
    const bool edge = j < sys.num_edge;
    Server s;
    s.id = j;
    s.tier = edge ? Tier::Edge : Tier::Cloud;
    s.capacity = uniform(server_rng, edge ? ranges.edge_capacity : ranges.cloud_capacity);
    s.threshold = uniform(server_rng, edge ? ranges.edge_threshold : ranges.cloud_threshold);
    s.accuracy.resize(sys.num_task_types);
    for (auto& a : s.accuracy) a = uniform(server_rng, edge ? ranges.edge_accuracy : ranges.cloud_accuracy);
    out.servers.push_back(std::move(s));
  }

  auto type_rng = make_rng(sys.rng_seed, Stream::TaskTypes);
  out.task_types.resize(sys.num_task_types);
  for (auto& t : out.task_types) {
    t.delay_sensitivity = uniform(type_rng, config.tasks.delay_sensitivity);
    t.accuracy_sensitivity = uniform(type_rng, config.tasks.accuracy_sensitivity);
  }

  auto prop_rng = make_rng(sys.rng_seed, Stream::Propagation);
  out.propagation_delay.resize(sys.num_clients * num_servers);
  for (std::size_t m = 0; m < sys.num_clients; ++m) {
    for (ServerId j = 0; j < num_servers; ++j) {
      const bool edge = j < sys.num_edge;
      out.propagation_delay[m * num_servers + j] =
          uniform(prop_rng, edge ? ranges.edge_propagation : ranges.cloud_propagation);
    }
  }
  return out;
}

}  // namespace offload
