#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "panfis/fusion.hpp"
#include "panfis/rule_model.hpp"

namespace panfis {

struct LearnerConfig {
  double eps_coverage = 0.135;  // growth trigger: grow when max firing falls below
  double kerr = 0.01;           // prune threshold on statistical contribution
  double sker = 0.8;            // intra-learner redundancy threshold
  double thr = 0.8;             // fusion overlap threshold (consumed by the fusion stage)
  Eigen::VectorXd init_spread;  // first-rule sigma per dimension; empty until resolved
  double rls_init = kDefaultRlsInit;
  int prune_every = 50;
  int merge_every = 50;

  void validate(int p) const {
    if (!(eps_coverage > 0.0 && eps_coverage < 1.0))
      throw UsageError("LearnerConfig: eps_coverage must be in (0,1)");
    if (!(kerr > 0.0 && kerr < 1.0)) throw UsageError("LearnerConfig: kerr must be in (0,1)");
    if (!(sker > 0.0 && sker <= 1.0)) throw UsageError("LearnerConfig: sker must be in (0,1]");
    if (!(thr > 0.0 && thr <= 1.0)) throw UsageError("LearnerConfig: thr must be in (0,1]");
    if (init_spread.size() != p && init_spread.size() != 1)
      throw UsageError("LearnerConfig: init_spread is unresolved or has wrong dimension");
    if (!(init_spread.minCoeff() > 0.0))
      throw UsageError("LearnerConfig: init_spread entries must be positive");
    if (!(rls_init > 0.0)) throw UsageError("LearnerConfig: rls_init must be positive");
    if (prune_every < 1 || merge_every < 1)
      throw UsageError("LearnerConfig: cadences must be positive");
  }

  /// Per-dimension spread, broadcasting a scalar config over p dimensions.
  Eigen::VectorXd spread_for(int p) const {
    if (init_spread.size() == p) return init_spread;
    return Eigen::VectorXd::Constant(p, init_spread(0));
  }
};

struct LearnerState {
  std::int64_t processed = 0;
  std::int64_t grown = 0;
  std::int64_t winner_updates = 0;
  std::int64_t pruned = 0;
  std::int64_t merged = 0;
  std::int64_t spd_jitters = 0;  // rank-one inverse updates rescued by jitter
};

/// True when the base gives the sample insufficient coverage: empty base or
/// max firing below eps_coverage.
inline bool should_grow(const RuleBase& base, const Sample& s, const LearnerConfig& cfg) {
  if (base.empty()) return true;
  double best = 0.0;
  for (const Rule& r : base.rules) best = std::max(best, firing_strength(r, s.x));
  return best < cfg.eps_coverage;
}

/// Append a fresh rule at the sample. Spread is half the per-dimension gap
/// to the nearest center, floored by init_spread; the first rule uses
/// init_spread directly. The true class gets a unit bias.
inline void grow_rule(RuleBase& base, const Sample& s, const LearnerConfig& cfg) {
  const int p = static_cast<int>(s.x.size());
  const Eigen::VectorXd floor_sigma = cfg.spread_for(p);
  Eigen::VectorXd sigma = floor_sigma;
  if (!base.empty()) {
    std::size_t nearest = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < base.rules.size(); ++i) {
      const double d = (base.rules[i].center - s.x).norm();
      if (d < best) {
        best = d;
        nearest = i;
      }
    }
    const Eigen::VectorXd gap = (s.x - base.rules[nearest].center).cwiseAbs();
    sigma = (0.5 * gap).cwiseMax(floor_sigma);
  }

  Rule r;
  r.center = s.x;
  r.inv_dispersion = sigma.array().square().inverse().matrix().asDiagonal();
  r.support = 1;
  r.consequent = Eigen::MatrixXd::Zero(p + 1, base.classes);
  r.consequent(0, s.y) = 1.0;
  r.rls_cov = cfg.rls_init * Eigen::MatrixXd::Identity(p + 1, p + 1);
  base.rules.push_back(std::move(r));
}

/// Move the winner toward the sample: running mean for the center and a
/// recursive covariance with the same 1/support gain, maintained directly on
/// the inverse through a rank-one (Sherman-Morrison) update.
inline void update_winner(Rule& rule, const Sample& s, std::int64_t* jitter_count = nullptr) {
  const Eigen::VectorXd delta = s.x - rule.center;
  rule.support += 1;
  const double n = static_cast<double>(rule.support);
  rule.center += delta / n;

  // Sigma_new = alpha * Sigma + beta * delta delta', with
  // alpha = (n-1)/n and beta = (n-1)/n^2 (Welford step around the moving mean).
  const double alpha = (n - 1.0) / n;
  const double beta = (n - 1.0) / (n * n);
  const Eigen::VectorXd ad = rule.inv_dispersion * delta;
  const double denom = 1.0 + (beta / alpha) * delta.dot(ad);
  if (!std::isfinite(denom) || denom <= 0.0) {
    throw NumericError("update_winner: degenerate rank-one denominator");
  }
  Eigen::MatrixXd a_new =
      rule.inv_dispersion / alpha - (beta / (alpha * alpha)) * (ad * ad.transpose()) / denom;
  detail::symmetrize(a_new);
  if (!detail::is_positive_definite(a_new)) {
    a_new += 1e-9 * Eigen::MatrixXd::Identity(a_new.rows(), a_new.cols());
    if (jitter_count) ++*jitter_count;
  }
  rule.inv_dispersion = std::move(a_new);
}

/// One weighted RLS step on the winner's consequent. Target is the one-hot
/// class vector over the extended input [1, x]; weight is the winner's
/// normalized firing strength; forgetting factor 1.
inline void update_consequents(Rule& rule, const Sample& s, double weight) {
  if (weight == 0.0) return;
  const int p = rule.dim();
  Eigen::VectorXd z(p + 1);
  z(0) = 1.0;
  z.tail(p) = s.x;

  const Eigen::VectorXd pz = rule.rls_cov * z;
  const double denom = 1.0 + weight * z.dot(pz);
  if (!std::isfinite(denom) || denom <= 0.0) {
    throw NumericError("update_consequents: non-finite RLS gain");
  }
  const Eigen::VectorXd gain = (weight / denom) * pz;

  Eigen::VectorXd target = Eigen::VectorXd::Zero(rule.classes());
  target(s.y) = 1.0;
  const Eigen::VectorXd residual = target - rule.consequent.transpose() * z;
  rule.consequent += gain * residual.transpose();

  rule.rls_cov -= gain * pz.transpose();
  detail::symmetrize(rule.rls_cov);
}

namespace detail {

/// Dominant class of a rule by its bias row; lowest index wins ties.
inline ClassLabel dominant_class(const Rule& r) {
  ClassLabel best = 0;
  for (int o = 1; o < r.classes(); ++o) {
    if (r.consequent(0, o) > r.consequent(0, best)) best = o;
  }
  return best;
}

}  // namespace detail

/// Drop every rule whose statistical contribution (evaluated once against
/// the incoming base) falls below kerr. The last remaining rule and any rule
/// that is the sole carrier of its dominant class survive regardless.
/// Returns the number of rules removed.
inline std::size_t prune_rules(RuleBase& base, const LearnerConfig& cfg) {
  if (base.empty()) throw UsageError("prune_rules: empty rule base");
  const std::vector<double> volumes = rule_volumes(base);
  const double total = std::accumulate(volumes.begin(), volumes.end(), 0.0);

  std::vector<ClassLabel> dominant;
  dominant.reserve(base.rules.size());
  for (const Rule& r : base.rules) dominant.push_back(detail::dominant_class(r));

  std::vector<bool> alive(base.rules.size(), true);
  std::size_t alive_count = base.rules.size();
  for (std::size_t i = 0; i < base.rules.size(); ++i) {
    if (volumes[i] / total >= cfg.kerr) continue;
    if (alive_count == 1) break;
    bool sole_carrier = true;
    for (std::size_t j = 0; j < base.rules.size(); ++j) {
      if (j != i && alive[j] && dominant[j] == dominant[i]) {
        sole_carrier = false;
        break;
      }
    }
    if (sole_carrier) continue;
    alive[i] = false;
    --alive_count;
  }

  std::vector<Rule> kept;
  kept.reserve(alive_count);
  for (std::size_t i = 0; i < base.rules.size(); ++i) {
    if (alive[i]) kept.push_back(std::move(base.rules[i]));
  }
  const std::size_t removed = base.rules.size() - kept.size();
  base.rules = std::move(kept);
  return removed;
}

/// Collapse redundant rules inside one learner's base, reusing the fusion
/// pair test with sker as the similarity threshold. Support is conserved.
/// Returns the number of merge events.
inline std::size_t merge_redundant(RuleBase& base, const LearnerConfig& cfg) {
  MergeConfig mcfg;
  mcfg.thr = cfg.sker;
  mcfg.conjunctive = true;
  mcfg.rls_init = cfg.rls_init;
  FusionReport report;
  detail::merge_to_fixed_point(base.rules, mcfg, report);
  return report.events.size();
}

/// Single-pass evolving learner over one data chunk. Feed samples in stream
/// order through observe(); call finish() once at end of chunk.
class Learner {
 public:
  Learner(int p, int classes, LearnerConfig cfg, std::string origin = "")
      : cfg_(std::move(cfg)) {
    if (p < 1) throw UsageError("Learner: dimension must be positive");
    if (classes < 1) throw UsageError("Learner: class count must be positive");
    cfg_.validate(p);
    base_.p = p;
    base_.classes = classes;
    base_.origin = std::move(origin);
  }

  void observe(const Eigen::VectorXd& x, ClassLabel y) {
    if (x.size() != base_.p) throw UsageError("Learner: sample dimension mismatch");
    if (!x.allFinite()) throw UsageError("Learner: sample has non-finite features");
    if (y < 0 || y >= base_.classes) throw UsageError("Learner: label out of range");

    const Sample s{x, y};
    double total = 0.0;
    double best = 0.0;
    std::size_t winner = 0;
    for (std::size_t i = 0; i < base_.rules.size(); ++i) {
      const double phi = firing_strength(base_.rules[i], x);
      total += phi;
      if (phi > best) {
        best = phi;
        winner = i;
      }
    }

    if (base_.empty() || best < cfg_.eps_coverage) {
      grow_rule(base_, s, cfg_);
      ++state_.grown;
    } else {
      const double weight = total > 0.0 ? best / total : 0.0;
      update_winner(base_.rules[winner], s, &state_.spd_jitters);
      update_consequents(base_.rules[winner], s, weight);
      ++state_.winner_updates;
    }
    ++state_.processed;

    if (state_.processed % cfg_.prune_every == 0) {
      state_.pruned += static_cast<std::int64_t>(prune_rules(base_, cfg_));
    }
    if (state_.processed % cfg_.merge_every == 0) {
      state_.merged += static_cast<std::int64_t>(merge_redundant(base_, cfg_));
    }
  }

  /// End-of-chunk maintenance: prune and merge once more unless the cadence
  /// already fired on the final sample.
  void finish() {
    if (base_.empty()) return;
    if (state_.processed % cfg_.prune_every != 0) {
      state_.pruned += static_cast<std::int64_t>(prune_rules(base_, cfg_));
    }
    if (state_.processed % cfg_.merge_every != 0) {
      state_.merged += static_cast<std::int64_t>(merge_redundant(base_, cfg_));
    }
  }

  const RuleBase& base() const { return base_; }
  RuleBase take_base() { return std::move(base_); }
  const LearnerState& state() const { return state_; }
  const LearnerConfig& config() const { return cfg_; }

 private:
  LearnerConfig cfg_;
  RuleBase base_;
  LearnerState state_;
};

/// Learn one chunk in a single pass and return its rule base.
inline RuleBase learn_chunk(const std::vector<Sample>& samples, const LearnerConfig& cfg,
                            int classes = 0, std::string origin = "",
                            LearnerState* state_out = nullptr) {
  if (samples.empty()) throw UsageError("learn_chunk: empty chunk");
  const int p = static_cast<int>(samples.front().x.size());
  if (classes == 0) {
    for (const Sample& s : samples) classes = std::max(classes, s.y + 1);
  }
  Learner learner(p, classes, cfg, std::move(origin));
  for (const Sample& s : samples) {
    if (s.x.size() != p) throw UsageError("learn_chunk: inconsistent sample dimensions");
    learner.observe(s.x, s.y);
  }
  learner.finish();
  if (state_out) *state_out = learner.state();
  return learner.take_base();
}

}  // namespace panfis
