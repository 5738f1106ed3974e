#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <utility>
#include <vector>

#include "panfis/rule_model.hpp"

namespace panfis {

inline constexpr double kDefaultRlsInit = 1e5;

struct MergeConfig {
  double thr = 0.8;        // overlap-score threshold in (0, 1]
  int max_passes = 1000;   // safety cap on fixed-point iterations
  bool conjunctive = true; // overlap AND homogeneity; false tries overlap OR homogeneity
  double rls_init = kDefaultRlsInit;  // RLS covariance reset scale for merged rules

  void validate() const {
    if (!(thr > 0.0 && thr <= 1.0)) throw UsageError("MergeConfig: thr must be in (0,1]");
    if (max_passes < 1) throw UsageError("MergeConfig: max_passes must be positive");
    if (!(rls_init > 0.0)) throw UsageError("MergeConfig: rls_init must be positive");
  }
};

struct MergeEvent {
  std::size_t winner;    // pool slot of the surviving rule at merge time
  std::size_t absorbed;  // pool slot of the removed rule at merge time
  double score;          // overlap score of the merged pair
};

struct FusionReport {
  std::size_t rules_before = 0;
  std::size_t rules_after = 0;
  std::vector<MergeEvent> events;
  int passes = 0;
  bool max_passes_hit = false;
};

/// Overlap degree between two rules, computed over the stored inverse
/// dispersions with M = (A_win + A_k) / 2:
///   1/8 (c_win - c_k)' M (c_win - c_k) + 1/2 ln(det M / sqrt(det A_win det A_k))
/// Zero for identical rules, symmetric, non-negative for SPD inputs.
inline double bhattacharyya_olap(const Rule& win, const Rule& k) {
  if (win.dim() != k.dim()) throw UsageError("bhattacharyya_olap: dimension mismatch");
  const Eigen::MatrixXd m = 0.5 * (win.inv_dispersion + k.inv_dispersion);
  const Eigen::VectorXd d = win.center - k.center;
  const double quad = 0.125 * d.dot(m * d);
  const double det_m = detail::spd_determinant(m);
  const double det_w = detail::spd_determinant(win.inv_dispersion);
  const double det_k = detail::spd_determinant(k.inv_dispersion);
  const double logdet = 0.5 * (std::log(det_m) - 0.5 * (std::log(det_w) + std::log(det_k)));
  const double olap = quad + logdet;
  if (!std::isfinite(olap)) throw NumericError("bhattacharyya_olap: non-finite result");
  return olap;
}

/// Similarity in (0, 1]: exp(-olap). 1 iff the rules are identical.
inline double overlap_score(const Rule& win, const Rule& k) {
  return std::exp(-bhattacharyya_olap(win, k));
}

/// Merge k into win (win must have support >= k's; ties resolved by the
/// caller in favor of the lower pool index). Antecedents, support, and
/// consequents combine support-weighted; RLS state restarts.
inline Rule merge_pair(const Rule& win, const Rule& k, double rls_init = kDefaultRlsInit) {
  if (win.dim() != k.dim() || win.classes() != k.classes()) {
    throw UsageError("merge_pair: rule shapes do not match");
  }
  const double nw = static_cast<double>(win.support);
  const double nk = static_cast<double>(k.support);
  const double nt = nw + nk;
  Rule out;
  out.center = (win.center * nw + k.center * nk) / nt;
  out.inv_dispersion = (win.inv_dispersion * nw + k.inv_dispersion * nk) / nt;
  detail::symmetrize(out.inv_dispersion);
  out.support = win.support + k.support;
  out.consequent = (win.consequent * nw + k.consequent * nk) / nt;
  out.rls_cov = rls_init * Eigen::MatrixXd::Identity(win.dim() + 1, win.dim() + 1);
  return out;
}

/// Blow-up guard: the merged ellipsoid may not exceed p times the parents'
/// combined volume.
inline bool homogeneity_check(const Rule& win, const Rule& k) {
  const Rule merged = merge_pair(win, k);
  const double v_merged = rule_volume(merged);
  const double bound = win.dim() * (rule_volume(win) + rule_volume(k));
  return v_merged <= bound;
}

namespace detail {

/// Orients a candidate pair so the support-winner comes first; pool-index
/// order breaks support ties.
inline std::pair<std::size_t, std::size_t> orient_by_support(const std::vector<Rule>& pool,
                                                             std::size_t a, std::size_t b) {
  if (pool[a].support > pool[b].support) return {a, b};
  if (pool[b].support > pool[a].support) return {b, a};
  return a < b ? std::pair{a, b} : std::pair{b, a};
}

inline bool pair_mergeable(const Rule& win, const Rule& k, const MergeConfig& cfg,
                           double* score_out) {
  const double score = overlap_score(win, k);
  if (score_out) *score_out = score;
  const bool overlap_ok = score >= cfg.thr;
  if (cfg.conjunctive) return overlap_ok && homogeneity_check(win, k);
  return overlap_ok || homogeneity_check(win, k);
}

/// Contribution-ranked merge loop shared by intra-learner redundancy removal
/// and cross-chunk fusion. Each pass works through targets in descending
/// statistical-contribution order, scanning the pool in order for a partner;
/// the first merge ends the pass (the ranking is stale after a merge). A pass
/// in which every target comes up empty is the fixed point: no pair in the
/// pool satisfies the merge test. cfg.max_passes caps the number of passes,
/// hence of merges.
inline void merge_to_fixed_point(std::vector<Rule>& pool, const MergeConfig& cfg,
                                 FusionReport& report) {
  report.rules_before = pool.size();
  while (true) {
    if (report.passes >= cfg.max_passes) {
      report.max_passes_hit = true;
      break;
    }
    ++report.passes;

    // Rank by statistical contribution, descending; index breaks ties.
    // Volumes only change on merge, so one ranking serves the whole pass.
    std::vector<double> volumes;
    volumes.reserve(pool.size());
    for (const Rule& r : pool) volumes.push_back(rule_volume(r));
    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return volumes[a] > volumes[b];
    });

    bool merged = false;
    for (std::size_t target : order) {
      for (std::size_t j = 0; j < pool.size(); ++j) {
        if (j == target) continue;
        const auto [w, l] = orient_by_support(pool, target, j);
        double score = 0.0;
        if (!pair_mergeable(pool[w], pool[l], cfg, &score)) continue;
        pool[w] = merge_pair(pool[w], pool[l], cfg.rls_init);
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(l));
        report.events.push_back({w, l, score});
        merged = true;
        break;
      }
      if (merged) break;
    }
    if (!merged) break;  // full sweep without a merge: fixed point
  }
  report.rules_after = pool.size();
}

}  // namespace detail

/// Merge all collected rule bases into one model. The pool is the
/// concatenation of the inputs in list order; pairs merge while their
/// overlap score reaches cfg.thr and the homogeneity check holds.
inline std::pair<RuleBase, FusionReport> fuse(const std::vector<RuleBase>& bases,
                                              const MergeConfig& cfg) {
  cfg.validate();
  int p = 0;
  int classes = 0;
  for (const RuleBase& b : bases) {
    if (b.empty()) continue;
    if (p == 0) {
      p = b.p;
      classes = b.classes;
    } else if (b.p != p || b.classes != classes) {
      throw UsageError("fuse: rule bases disagree on dimension or class count");
    }
  }
  if (p == 0) throw UsageError("fuse: no non-empty rule base given");

  RuleBase out;
  out.p = p;
  out.classes = classes;
  out.origin = "fused";
  for (const RuleBase& b : bases) {
    out.rules.insert(out.rules.end(), b.rules.begin(), b.rules.end());
  }

  FusionReport report;
  detail::merge_to_fixed_point(out.rules, cfg, report);
  return {std::move(out), std::move(report)};
}

}  // namespace panfis
