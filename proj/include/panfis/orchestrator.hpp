#pragma once

#include <atomic>
#include <chrono>
#include <exception>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "panfis/dataio.hpp"
#include "panfis/fusion.hpp"
#include "panfis/learner.hpp"

namespace panfis {

struct PartitionPlan {
  int parts = 0;
  std::vector<std::pair<std::size_t, std::size_t>> bounds;  // [start, end) per chunk
};

struct RunReport {
  double total_seconds = 0.0;
  double learn_seconds = 0.0;
  double fuse_seconds = 0.0;
  double eval_seconds = 0.0;
  std::vector<std::size_t> chunk_rule_counts;
  std::vector<LearnerState> chunk_states;
  FusionReport fusion;
  double accuracy = std::numeric_limits<double>::quiet_NaN();  // set when a holdout is given
  int partitions = 1;
  int workers = 1;
  LearnerConfig cfg;
  MergeConfig mcfg;

  std::size_t rules_before_merge() const {
    std::size_t total = 0;
    for (std::size_t c : chunk_rule_counts) total += c;
    return total;
  }
};

/// Contiguous balanced index ranges; earlier chunks absorb the remainder.
inline PartitionPlan partition(std::size_t n, int parts) {
  if (parts < 1) throw UsageError("partition: need at least one partition");
  if (static_cast<std::size_t>(parts) > n) throw UsageError("partition: more partitions than samples");
  PartitionPlan plan;
  plan.parts = parts;
  const std::size_t base = n / static_cast<std::size_t>(parts);
  const std::size_t rem = n % static_cast<std::size_t>(parts);
  std::size_t start = 0;
  for (int i = 0; i < parts; ++i) {
    const std::size_t len = base + (static_cast<std::size_t>(i) < rem ? 1 : 0);
    plan.bounds.emplace_back(start, start + len);
    start += len;
  }
  return plan;
}

namespace detail {

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

/// Run one learner over a contiguous slice of the dataset.
inline RuleBase learn_slice(const Dataset& data, std::size_t begin, std::size_t end,
                            const LearnerConfig& cfg, std::string origin, LearnerState* state) {
  Learner learner(data.dim(), data.classes, cfg, std::move(origin));
  for (std::size_t i = begin; i < end; ++i) learner.observe(data.row(i), data.y[i]);
  learner.finish();
  if (state) *state = learner.state();
  return learner.take_base();
}

inline LearnerConfig resolved_config(LearnerConfig cfg, const Dataset& data) {
  if (cfg.init_spread.size() == 0) cfg.init_spread = auto_init_spread(data);
  return cfg;
}

}  // namespace detail

/// One learner over the whole set; the single-machine baseline.
inline std::pair<RuleBase, RunReport> train_single(const Dataset& data, LearnerConfig cfg,
                                                   const Dataset* holdout = nullptr) {
  if (data.size() == 0) throw UsageError("train_single: empty dataset");
  const auto t0 = detail::Clock::now();
  cfg = detail::resolved_config(std::move(cfg), data);

  RunReport report;
  report.partitions = 1;
  report.workers = 1;
  report.cfg = cfg;

  LearnerState state;
  RuleBase model = detail::learn_slice(data, 0, data.size(), cfg, "single", &state);
  report.learn_seconds = detail::seconds_since(t0);
  report.chunk_rule_counts = {model.size()};
  report.chunk_states = {state};

  if (holdout) {
    const auto te = detail::Clock::now();
    report.accuracy = evaluate(model, *holdout).accuracy;
    report.eval_seconds = detail::seconds_since(te);
  }
  report.total_seconds = detail::seconds_since(t0);
  return {std::move(model), std::move(report)};
}

/// Chunk-parallel training: partition the stream, run independent learners
/// in a worker pool, gather their models in partition order, fuse. The model
/// is a pure function of (data, partitions, cfg, mcfg) regardless of worker
/// count or scheduling.
inline std::pair<RuleBase, RunReport> train_scalable(const Dataset& data, int partitions,
                                                     LearnerConfig cfg, MergeConfig mcfg,
                                                     int workers = 0,
                                                     const Dataset* holdout = nullptr) {
  if (data.size() == 0) throw UsageError("train_scalable: empty dataset");
  const auto t0 = detail::Clock::now();
  cfg = detail::resolved_config(std::move(cfg), data);
  mcfg.rls_init = cfg.rls_init;
  const PartitionPlan plan = partition(data.size(), partitions);

  if (workers <= 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    workers = static_cast<int>(hw > 0 ? hw : 1);
  }
  workers = std::min(workers, partitions);

  RunReport report;
  report.partitions = partitions;
  report.workers = workers;
  report.cfg = cfg;
  report.mcfg = mcfg;

  std::vector<RuleBase> models(plan.bounds.size());
  std::vector<LearnerState> states(plan.bounds.size());
  std::vector<std::exception_ptr> failures(plan.bounds.size());
  std::atomic<std::size_t> next{0};

  auto worker_loop = [&]() {
    std::size_t i;
    while ((i = next.fetch_add(1)) < plan.bounds.size()) {
      try {
        const auto [begin, end] = plan.bounds[i];
        models[i] = detail::learn_slice(data, begin, end, cfg, std::to_string(i), &states[i]);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker_loop);
  for (std::thread& t : pool) t.join();

  for (std::size_t i = 0; i < failures.size(); ++i) {
    if (!failures[i]) continue;
    try {
      std::rethrow_exception(failures[i]);
    } catch (const std::exception& e) {
      throw NumericError("learner failed on chunk " + std::to_string(i) + ": " + e.what());
    }
  }
  report.learn_seconds = detail::seconds_since(t0);

  for (const RuleBase& m : models) report.chunk_rule_counts.push_back(m.size());
  report.chunk_states = std::move(states);

  const auto tf = detail::Clock::now();
  auto [model, fusion_report] = fuse(models, mcfg);
  report.fusion = std::move(fusion_report);
  report.fuse_seconds = detail::seconds_since(tf);

  if (holdout) {
    const auto te = detail::Clock::now();
    report.accuracy = evaluate(model, *holdout).accuracy;
    report.eval_seconds = detail::seconds_since(te);
  }
  report.total_seconds = detail::seconds_since(t0);
  return {std::move(model), std::move(report)};
}

}  // namespace panfis
