// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "offload/analysis.hpp"
#include "offload/config.hpp"
#include "offload/simulator.hpp"

namespace fs = std::filesystem;
using namespace offload;

namespace {

// Pinned tolerances.
constexpr std::size_t kGapInstances = 100;
constexpr std::size_t kGapTasks = 6;
constexpr std::size_t kGapServers = 3;
constexpr std::uint64_t kGapSeed = 42;
constexpr double kGapTolerance = 0.10;
constexpr double kGapHitFraction = 0.90;
constexpr double kGapSeconds = 60.0;

constexpr double kStabilitySlack = 1.5;
constexpr std::int64_t kStabilityShort = 100;
constexpr std::int64_t kStabilityLong = 2000;
constexpr double kStabilityRatio = 0.10;
constexpr double kStabilitySeconds = 120.0;

constexpr double kTradeoffStepTolerance = 0.02;  // fraction of the value range

constexpr double kConvergedFraction = 0.95;
constexpr int kUndampedMaxIterations = 2;

const std::vector<std::uint64_t> kSeeds{1, 2, 3, 4, 5};

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Outcome oracle_gap() {
  const auto start = std::chrono::steady_clock::now();
  const auto rows = oracle_gap_study(kGapInstances, kGapTasks, kGapServers, kGapSeed, default_config().policy.iodcc);
  const double elapsed = seconds_since(start);
  std::size_t hits = 0, below = 0;
  double worst = 0.0;
  for (const auto& r : rows) {
    if (r.relative_gap <= kGapTolerance) ++hits;
    if (r.iodcc_value < r.oracle_value) ++below;
    worst = std::max(worst, r.relative_gap);
  }
  const double fraction = static_cast<double>(hits) / static_cast<double>(rows.size());
  return {fraction >= kGapHitFraction && below == 0 && elapsed < kGapSeconds,
          fmt::format("{}/{} within {:.0f}% (need {:.0f}%), worst gap {:.4f}, {} below optimum, {:.1f}s", hits,
                      rows.size(), kGapTolerance * 100, kGapHitFraction * 100, worst, below, elapsed)};
}

Outcome queue_stability() {
  const auto start = std::chrono::steady_clock::now();
  const auto rows = stability_check(default_config(), {kStabilityShort, kStabilityLong}, kSeeds, kStabilitySlack);
  const double elapsed = seconds_since(start);
  const double short_rate = rows[0].max_queue_rate;
  const double long_rate = rows[1].max_queue_rate;
  return {long_rate <= kStabilityRatio * short_rate && short_rate > 0.0 && elapsed < kStabilitySeconds,
          fmt::format("max_j Q_j(T)/T: {:.6f} at T={}, {:.6f} at T={} (ratio {:.4f}, need <= {:.2f}), {:.1f}s",
                      short_rate, kStabilityShort, long_rate, kStabilityLong,
                      short_rate > 0.0 ? long_rate / short_rate : 0.0, kStabilityRatio, elapsed)};
}

Outcome tradeoff() {
  const std::vector<double> Vs{1.0, 10.0, 100.0, 1000.0};
  const auto rows = v_sweep(default_config(), Vs, {kSeeds.front()});
  auto monotone = [](const std::vector<double>& v, bool increasing) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    const double slack = kTradeoffStepTolerance * (*hi - *lo);
    for (std::size_t k = 1; k < v.size(); ++k) {
      const double step = increasing ? v[k - 1] - v[k] : v[k] - v[k - 1];
      if (step > slack) return false;
    }
    return true;
  };
  std::vector<double> zeta, queue;
  for (const auto& r : rows) {
    zeta.push_back(r.mean_zeta);
    queue.push_back(r.mean_total_queue);
  }
  const bool ok = monotone(zeta, false) && monotone(queue, true);
  return {ok, fmt::format("zeta {:.4f}; sumQ {:.4f}", fmt::join(zeta, " "), fmt::join(queue, " "))};
}

Outcome policy_ordering() {
  const Config c = default_config();
  std::vector<PolicySpec> specs;
  for (auto k : {PolicyKind::Iodcc, PolicyKind::GreedyAccuracy, PolicyKind::GreedyCompute, PolicyKind::GreedyDelay}) {
    PolicySpec p = c.policy;
    p.kind = k;
    specs.push_back(p);
  }
  const auto rows = compare_policies(c, specs, kSeeds);
  double iodcc = 0.0;
  for (const auto& r : rows) {
    if (r.policy == "iodcc") iodcc = r.mean_reward;
  }
  bool ok = true;
  std::vector<std::string> parts;
  for (const auto& r : rows) {
    parts.push_back(fmt::format("{} {:.1f}", r.policy, r.mean_reward));
    if (r.policy != "iodcc" && !(iodcc > r.mean_reward)) ok = false;
  }
  return {ok, fmt::format("mean reward: {}", fmt::join(parts, ", "))};
}

Outcome predictor_direction() {
  bool ok = true;
  std::vector<std::string> parts;
  for (std::size_t U : {6u, 8u, 10u}) {
    Config c = default_config();
    c.system.num_edge = 4;
    c.system.num_cloud = U;
    PredictorSpec oracle;
    PredictorSpec constant;
    constant.kind = PredictorKind::Constant;
    const auto rows = compare_predictors(c, {oracle, constant}, kSeeds);
    double r_oracle = 0.0, r_constant = 0.0;
    for (const auto& r : rows) (r.predictor == "oracle" ? r_oracle : r_constant) = r.mean_reward;
    if (!(r_oracle > r_constant)) ok = false;
    parts.push_back(fmt::format("U={}: oracle {:.1f} vs constant {:.1f}", U, r_oracle, r_constant));
  }
  return {ok, fmt::format("{}", fmt::join(parts, "; "))};
}

Outcome convergence() {
  std::size_t slots = 0, converged = 0, undamped_slots = 0, undamped_ok = 0;
  for (auto seed : kSeeds) {
    Config c = default_config();
    c.system.rng_seed = seed;
    c.policy.iodcc.damping = 0.5;
    c.policy.iodcc.max_iters = 20;
    for (const auto& s : run(c).slots) {
      if (s.tasks.empty()) continue;
      ++slots;
      converged += s.converged ? 1 : 0;
    }
    c.policy.iodcc.damping = 1.0;
    c.policy.iodcc.congestion_weight = 0.0;
    for (const auto& s : run(c).slots) {
      if (s.tasks.empty()) continue;
      ++undamped_slots;
      undamped_ok += (s.converged && s.iterations <= kUndampedMaxIterations) ? 1 : 0;
    }
  }
  const double fraction = static_cast<double>(converged) / static_cast<double>(slots);
  return {fraction >= kConvergedFraction && undamped_ok == undamped_slots,
          fmt::format("damped: {}/{} non-empty slots converged ({:.3f}, need {:.2f}); undamped rho=0: {}/{} within {} "
                      "iterations",
                      converged, slots, fraction, kConvergedFraction, undamped_ok, undamped_slots,
                      kUndampedMaxIterations)};
}

// Recomputes kappa, tau, zeta and y from the per-task fields of a re-read report.
Outcome formula_replay() {
  const Config c = default_config();
  const RunReport original = run(c);
  const fs::path dir = fs::temp_directory_path() / "offload_acceptance_replay";
  fs::remove_all(dir);
  write_report(original, dir);
  const RunReport report = read_report(dir);

  std::size_t checked = 0, mismatches = 0;
  auto check = [&](double stored, double recomputed) {
    ++checked;
    if (stored != recomputed) ++mismatches;
  };
  for (const auto& slot : report.slots) {
    const std::size_t m = report.servers.size();
    std::vector<std::size_t> order(slot.tasks.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return slot.tasks[a].rank < slot.tasks[b].rank; });
    std::vector<double> queued(m);
    for (std::size_t j = 0; j < m; ++j) queued[j] = slot.servers[j].backlog_before;
    for (std::size_t i : order) {
      const auto& t = slot.tasks[i];
      if (!t.server) continue;
      const std::size_t j = *t.server;
      check(t.comm_delay, t.data_size / t.link_rate + t.propagation);
      check(t.comp_delay, (queued[j] + t.workload) / report.servers[j].capacity);
      queued[j] += t.workload;
    }
    double zeta = 0.0;
    std::vector<double> load(m, 0.0);
    for (const auto& t : slot.tasks) {
      if (t.dropped) {
        zeta += t.delay_sensitivity * report.drop_delay;
        continue;
      }
      zeta += t.delay_sensitivity * (t.comm_delay + t.comp_delay) -
              report.delta * t.accuracy_sensitivity * t.accuracy;
      load[*t.server] += t.workload;
    }
    check(slot.zeta, zeta);
    for (std::size_t j = 0; j < m; ++j) {
      check(slot.servers[j].excess, load[j] / report.servers[j].capacity - report.servers[j].threshold);
    }
  }
  // The in-memory and re-read reports must agree as well.
  for (std::size_t t = 0; t < original.slots.size(); ++t) {
    if (slot_to_json(original.slots[t]) != slot_to_json(report.slots[t])) ++mismatches;
  }
  fs::remove_all(dir);
  return {mismatches == 0 && checked > 0,
          fmt::format("{} values recomputed over {} slots, {} mismatches", checked, report.slots.size(), mismatches)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome cli_determinism() {
  const fs::path root = fs::temp_directory_path() / "offload_acceptance_cli";
  fs::remove_all(root);
  const std::string config = std::string(OFFLOAD_SOURCE_DIR) + "/configs/default.json";
  std::vector<fs::path> outs{root / "a", root / "b"};
  for (const auto& out : outs) {
    const std::string cmd =
        fmt::format("\"{}\" run --config \"{}\" --out \"{}\" --series > /dev/null", OFFLOAD_CLI, config, out.string());
    if (const int rc = std::system(cmd.c_str()); rc != 0) return {false, fmt::format("run exited with {}", rc)};
  }
  std::size_t files = 0, differing = 0;
  for (const auto& entry : fs::directory_iterator(outs[0])) {
    ++files;
    const auto name = entry.path().filename();
    if (!fs::exists(outs[1] / name) || slurp(outs[0] / name) != slurp(outs[1] / name)) ++differing;
  }
  std::size_t other = 0;
  for ([[maybe_unused]] const auto& entry : fs::directory_iterator(outs[1])) ++other;
  fs::remove_all(root);
  return {files > 0 && differing == 0 && files == other,
          fmt::format("{} output files compared, {} differ", files, differing)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 oracle gap", oracle_gap},
      {"2 queue stability", queue_stability},
      {"3 V tradeoff", tradeoff},
      {"4 policy ordering", policy_ordering},
      {"5 predictor direction", predictor_direction},
      {"6 solver convergence", convergence},
      {"7 formula replay", formula_replay},
      {"8 CLI determinism", cli_determinism},
  };
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << fmt::format("[{}] {}: {}", o.pass ? "PASS" : "FAIL", name, o.detail) << std::endl;
  }
  std::cout << fmt::format("{} of {} criteria passed", criteria.size() - failures, criteria.size()) << std::endl;
  return failures == 0 ? 0 : 1;
}
