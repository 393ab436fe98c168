#include "offload/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "offload/errors.hpp"
#include "offload/rng.hpp"
#include "offload/workload.hpp"

namespace offload {

using nlohmann::json;

double RunReport::max_queue_rate_at(std::int64_t t) const {
  if (t < 1 || t > static_cast<std::int64_t>(slots.size())) {
    throw std::out_of_range(fmt::format("no queue state recorded for slot {}", t));
  }
  double best = 0.0;
  for (const auto& s : slots[static_cast<std::size_t>(t - 1)].servers) {
    best = std::max(best, s.queue_after / static_cast<double>(t));
  }
  return best;
}

double RunReport::converged_fraction() const {
  if (slots.empty()) return 1.0;
  const auto n = std::count_if(slots.begin(), slots.end(), [](const SlotRecord& r) { return r.converged; });
  return static_cast<double>(n) / static_cast<double>(slots.size());
}

double RunReport::max_iterations() const {
  int best = 0;
  for (const auto& s : slots) best = std::max(best, s.iterations);
  return best;
}

void finalize_report(RunReport& report) {
  const auto horizon = static_cast<double>(report.slots.size());
  double zeta = 0.0;
  double total_queue = 0.0;
  double penalty = 0.0;
  std::size_t tasks = 0;
  std::size_t drops = 0;
  std::vector<double> usage(report.servers.size(), 0.0);
  for (const auto& slot : report.slots) {
    zeta += slot.zeta;
    penalty += slot.drift_plus_penalty;
    for (std::size_t j = 0; j < slot.servers.size(); ++j) {
      total_queue += slot.servers[j].queue_after;
      usage.at(j) += slot.servers[j].assigned_workload / report.servers.at(j).capacity;
    }
    tasks += slot.tasks.size();
    for (const auto& t : slot.tasks) drops += t.dropped ? 1 : 0;
  }
  report.mean_zeta = horizon > 0 ? zeta / horizon : 0.0;
  report.mean_total_queue = horizon > 0 ? total_queue / horizon : 0.0;
  report.lyapunov_reward = -penalty;
  report.tasks = tasks;
  report.drops = drops;
  for (std::size_t j = 0; j < report.servers.size(); ++j) {
    report.servers[j].mean_usage = horizon > 0 ? usage[j] / horizon : 0.0;
  }
  report.final_queues.assign(report.servers.size(), 0.0);
  if (!report.slots.empty()) {
    const auto& last = report.slots.back().servers;
    for (std::size_t j = 0; j < last.size(); ++j) report.final_queues[j] = last[j].queue_after;
  }
}

Simulator::Simulator(const Config& config, const Trace& trace, std::unique_ptr<Policy> policy, Predictor predictor)
    : config_(config),
      system_(build_system(config)),
      policy_(std::move(policy)),
      predictor_(std::move(predictor)),
      bank_(config.system.num_servers()),
      link_rng_(derive_seed(config.system.rng_seed, Stream::Links)) {
  if (const auto errors = validate_config(config_); !errors.empty()) {
    throw ConfigError(fmt::format("invalid config: {}", fmt::join(errors, "; ")));
  }
  tasks_ = tasks_from_trace(trace, system_.task_types);
  for (const auto& t : tasks_) {
    if (t.client >= config_.system.num_clients) {
      throw ValidationError(fmt::format("task {} has client {} but only {} clients are configured", t.id, t.client,
                                        config_.system.num_clients));
    }
  }
  const auto beyond = std::count_if(tasks_.begin(), tasks_.end(),
                                    [&](const Task& t) { return t.arrival_slot >= config_.system.horizon; });
  report_.ignored_tasks = static_cast<std::size_t>(beyond);
  if (beyond > 0) {
    report_.warnings.push_back(
        fmt::format("{} trace rows arrive after the horizon of {} slots and were ignored", beyond,
                    config_.system.horizon));
  }

  report_.policy = policy_->name();
  report_.predictor = std::string(to_string(predictor_.kind()));
  report_.seed = config_.system.rng_seed;
  report_.V = config_.system.tradeoff_V;
  report_.delta = config_.system.accuracy_weight_delta;
  report_.slot_duration = config_.system.slot_duration;
  report_.drop_delay = config_.system.drop_delay;
  for (const auto& s : system_.servers) {
    report_.servers.push_back(ServerSummary{s.id, s.tier, s.capacity, s.threshold, s.accuracy, 0.0});
  }
}

LinkState Simulator::realize_links(std::int64_t) {
  const auto& sys = config_.system;
  LinkState links(sys.num_clients, sys.num_servers());
  for (std::size_t m = 0; m < sys.num_clients; ++m) {
    for (ServerId j = 0; j < sys.num_servers(); ++j) {
      const Range& r = j < sys.num_edge ? config_.servers.edge_rate : config_.servers.cloud_rate;
      const double rate = r.lo + (r.hi - r.lo) * std::uniform_real_distribution<double>(0.0, 1.0)(link_rng_);
      links.set(m, j, rate, system_.propagation(m, j));
    }
  }
  return links;
}

SlotRecord Simulator::step() {
  if (done()) throw std::logic_error("simulation already reached its horizon");
  const std::int64_t t = next_slot_++;
  const auto& sys = config_.system;
  const LinkState links = realize_links(t);

  std::vector<Task> slot_tasks;
  while (cursor_ < tasks_.size() && tasks_[cursor_].arrival_slot == t) slot_tasks.push_back(tasks_[cursor_++]);

  std::vector<double> planned(slot_tasks.size());
  std::vector<double> realized(slot_tasks.size());
  for (std::size_t i = 0; i < slot_tasks.size(); ++i) {
    auto& task = slot_tasks[i];
    task.predicted_output_tokens = predictor_.predict(task);
    planned[i] = workload_units(task, config_.workload, true);
    realized[i] = workload_units(task, config_.workload, false);
  }

  const std::vector<double> queues_before(bank_.queues().begin(), bank_.queues().end());
  SlotState state;
  state.tasks = slot_tasks;
  state.workloads = planned;
  state.servers = system_.servers;
  state.queues = queues_before;
  state.links = &links;
  state.V = sys.tradeoff_V;
  state.delta = sys.accuracy_weight_delta;
  state.min_rate = sys.min_rate;
  state.drop_delay = sys.drop_delay;

  Decision decision = policy_->decide(state);
  const SlotEvaluation plan = evaluate_assignment(state, decision.assignment);
  state.workloads = realized;
  const SlotEvaluation real = evaluate_assignment(state, decision.assignment);

  SlotRecord record;
  record.slot = t;
  record.zeta = real.zeta;
  record.drift_plus_penalty = real.drift_plus_penalty;
  record.iterations = decision.iterations;
  record.converged = decision.converged;
  record.tasks.reserve(slot_tasks.size());
  for (std::size_t i = 0; i < slot_tasks.size(); ++i) {
    const auto& task = slot_tasks[i];
    const auto& out = real.outcomes[i];
    TaskRecord tr;
    tr.id = task.id;
    tr.client = task.client;
    tr.type = task.type;
    tr.rank = task.intra_slot_rank;
    tr.server = out.server;
    tr.dropped = out.dropped;
    tr.data_size = task.data_size;
    if (out.server) {
      tr.link_rate = links.rate(task.client, *out.server);
      tr.propagation = links.propagation(task.client, *out.server);
    }
    tr.comm_delay = out.comm_delay;
    tr.comp_delay = out.comp_delay;
    tr.accuracy = out.accuracy;
    tr.delay_sensitivity = out.delay_sensitivity;
    tr.accuracy_sensitivity = out.accuracy_sensitivity;
    tr.predicted_tokens = task.predicted_output_tokens;
    tr.planned_workload = planned[i];
    tr.workload = realized[i];
    record.workload_error += std::abs(planned[i] - realized[i]);
    record.tasks.push_back(tr);
  }

  bank_.update(real.excess);
  record.servers.resize(system_.servers.size());
  for (ServerId j = 0; j < system_.servers.size(); ++j) {
    auto& server = system_.servers[j];
    auto& sr = record.servers[j];
    sr.assigned_workload = real.assigned_workload[j];
    sr.backlog_before = server.backlog;
    // FIFO drain of up to f_j * slot_duration workload per slot.
    server.backlog = std::max(server.backlog + sr.assigned_workload - server.capacity * sys.slot_duration, 0.0);
    sr.backlog_after = server.backlog;
    sr.excess = real.excess[j];
    sr.planned_excess = plan.excess[j];
    sr.queue_before = queues_before[j];
    sr.queue_after = bank_[j];
  }
  report_.slots.push_back(record);
  return record;
}

RunReport Simulator::finish() {
  while (!done()) step();
  finalize_report(report_);
  return report_;
}

RunReport run(const Config& config, const Trace& trace, const PolicySpec& policy, const PredictorSpec& predictor) {
  if (const auto errors = validate_config(config); !errors.empty()) {
    throw ConfigError(fmt::format("invalid config: {}", fmt::join(errors, "; ")));
  }
  Simulator sim(config, trace, make_policy(policy),
                Predictor::from_spec(predictor, trace.mean_output_tokens(), config.system.rng_seed));
  return sim.finish();
}

RunReport run(const Config& config) {
  if (const auto errors = validate_config(config); !errors.empty()) {
    throw ConfigError(fmt::format("invalid config: {}", fmt::join(errors, "; ")));
  }
  const Trace trace = generate_trace(config.system, config.generator, config.system.rng_seed);
  return run(config, trace, config.policy, config.predictor);
}

// --- serialization ---------------------------------------------------------

json slot_to_json(const SlotRecord& r) {
  json tasks = json::array();
  for (const auto& t : r.tasks) {
    tasks.push_back({
        {"id", t.id},
        {"client", t.client},
        {"type", t.type},
        {"rank", t.rank},
        {"server", t.server ? json(*t.server) : json(nullptr)},
        {"dropped", t.dropped},
        {"data", t.data_size},
        {"rate", t.link_rate},
        {"eta", t.propagation},
        {"kappa", t.comm_delay},
        {"tau", t.comp_delay},
        {"phi", t.accuracy},
        {"alpha", t.delay_sensitivity},
        {"beta", t.accuracy_sensitivity},
        {"predicted_tokens", t.predicted_tokens},
        {"planned_workload", t.planned_workload},
        {"workload", t.workload},
    });
  }
  json servers = json::array();
  for (const auto& s : r.servers) {
    servers.push_back({
        {"assigned_workload", s.assigned_workload},
        {"backlog_before", s.backlog_before},
        {"backlog_after", s.backlog_after},
        {"y", s.excess},
        {"planned_y", s.planned_excess},
        {"q_before", s.queue_before},
        {"q_after", s.queue_after},
    });
  }
  return json{{"slot", r.slot},
              {"zeta", r.zeta},
              {"dpp", r.drift_plus_penalty},
              {"iterations", r.iterations},
              {"converged", r.converged},
              {"workload_error", r.workload_error},
              {"tasks", tasks},
              {"servers", servers}};
}

SlotRecord slot_from_json(const json& doc) {
  SlotRecord r;
  r.slot = doc.at("slot").get<std::int64_t>();
  r.zeta = doc.at("zeta").get<double>();
  r.drift_plus_penalty = doc.at("dpp").get<double>();
  r.iterations = doc.at("iterations").get<int>();
  r.converged = doc.at("converged").get<bool>();
  r.workload_error = doc.at("workload_error").get<double>();
  for (const auto& t : doc.at("tasks")) {
    TaskRecord tr;
    tr.id = t.at("id").get<TaskId>();
    tr.client = t.at("client").get<std::size_t>();
    tr.type = t.at("type").get<std::size_t>();
    tr.rank = t.at("rank").get<std::size_t>();
    if (!t.at("server").is_null()) tr.server = t.at("server").get<ServerId>();
    tr.dropped = t.at("dropped").get<bool>();
    tr.data_size = t.at("data").get<double>();
    tr.link_rate = t.at("rate").get<double>();
    tr.propagation = t.at("eta").get<double>();
    tr.comm_delay = t.at("kappa").get<double>();
    tr.comp_delay = t.at("tau").get<double>();
    tr.accuracy = t.at("phi").get<double>();
    tr.delay_sensitivity = t.at("alpha").get<double>();
    tr.accuracy_sensitivity = t.at("beta").get<double>();
    tr.predicted_tokens = t.at("predicted_tokens").get<std::int64_t>();
    tr.planned_workload = t.at("planned_workload").get<double>();
    tr.workload = t.at("workload").get<double>();
    r.tasks.push_back(tr);
  }
  for (const auto& s : doc.at("servers")) {
    ServerSlotRecord sr;
    sr.assigned_workload = s.at("assigned_workload").get<double>();
    sr.backlog_before = s.at("backlog_before").get<double>();
    sr.backlog_after = s.at("backlog_after").get<double>();
    sr.excess = s.at("y").get<double>();
    sr.planned_excess = s.at("planned_y").get<double>();
    sr.queue_before = s.at("q_before").get<double>();
    sr.queue_after = s.at("q_after").get<double>();
    r.servers.push_back(sr);
  }
  return r;
}

json summary_to_json(const RunReport& r) {
  json servers = json::array();
  for (const auto& s : r.servers) {
    servers.push_back({{"id", s.id},
                       {"tier", s.tier == Tier::Edge ? "edge" : "cloud"},
                       {"capacity", s.capacity},
                       {"threshold", s.threshold},
                       {"accuracy", s.accuracy},
                       {"mean_usage", s.mean_usage}});
  }
  return json{{"schema", kReportSchema},
              {"policy", r.policy},
              {"predictor", r.predictor},
              {"seed", r.seed},
              {"V", r.V},
              {"delta", r.delta},
              {"slot_duration", r.slot_duration},
              {"drop_delay", r.drop_delay},
              {"horizon", r.slots.size()},
              {"servers", servers},
              {"aggregates",
               {{"mean_zeta", r.mean_zeta},
                {"mean_total_queue", r.mean_total_queue},
                {"final_queues", r.final_queues},
                {"lyapunov_reward", r.lyapunov_reward},
                {"tasks", r.tasks},
                {"drops", r.drops},
                {"ignored_tasks", r.ignored_tasks},
                {"converged_fraction", r.converged_fraction()}}},
              {"warnings", r.warnings}};
}

void write_report(const RunReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "summary.json");
    if (!out) throw std::runtime_error("cannot write " + (dir / "summary.json").string());
    out << summary_to_json(report).dump(2) << '\n';
  }
  std::ofstream out(dir / "slots.jsonl");
  if (!out) throw std::runtime_error("cannot write " + (dir / "slots.jsonl").string());
  for (const auto& slot : report.slots) out << slot_to_json(slot).dump() << '\n';
}

RunReport read_report(const std::filesystem::path& dir) {
  std::ifstream in(dir / "summary.json");
  if (!in) throw std::runtime_error("cannot open " + (dir / "summary.json").string());
  const json summary = json::parse(in);
  if (summary.at("schema").get<std::string>() != kReportSchema) {
    throw std::runtime_error("unsupported report schema " + summary.at("schema").dump());
  }
  RunReport r;
  r.policy = summary.at("policy").get<std::string>();
  r.predictor = summary.at("predictor").get<std::string>();
  r.seed = summary.at("seed").get<std::uint64_t>();
  r.V = summary.at("V").get<double>();
  r.delta = summary.at("delta").get<double>();
  r.slot_duration = summary.at("slot_duration").get<double>();
  r.drop_delay = summary.at("drop_delay").get<double>();
  for (const auto& s : summary.at("servers")) {
    ServerSummary ss;
    ss.id = s.at("id").get<ServerId>();
    ss.tier = s.at("tier").get<std::string>() == "edge" ? Tier::Edge : Tier::Cloud;
    ss.capacity = s.at("capacity").get<double>();
    ss.threshold = s.at("threshold").get<double>();
    ss.accuracy = s.at("accuracy").get<std::vector<double>>();
    r.servers.push_back(ss);
  }
  r.warnings = summary.at("warnings").get<std::vector<std::string>>();
  r.ignored_tasks = summary.at("aggregates").at("ignored_tasks").get<std::size_t>();

  std::ifstream slots(dir / "slots.jsonl");
  if (!slots) throw std::runtime_error("cannot open " + (dir / "slots.jsonl").string());
  std::string line;
  while (std::getline(slots, line)) {
    if (!line.empty()) r.slots.push_back(slot_from_json(json::parse(line)));
  }
  finalize_report(r);
  return r;
}

}  // namespace offload
