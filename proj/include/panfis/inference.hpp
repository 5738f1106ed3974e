#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "panfis/rule_model.hpp"

namespace panfis {

struct Prediction {
  ClassLabel label = 0;
  Eigen::VectorXd scores;  // per-class blended TSK outputs
};

struct EvalMetrics {
  double accuracy = 0.0;
  Eigen::MatrixXd confusion;  // confusion(true, predicted), counts
  std::size_t n = 0;
};

namespace detail {

inline Eigen::VectorXd rule_outputs(const Rule& r, const Eigen::VectorXd& x) {
  Eigen::VectorXd z(x.size() + 1);
  z(0) = 1.0;
  z.tail(x.size()) = x;
  return r.consequent.transpose() * z;
}

inline ClassLabel argmax_label(const Eigen::VectorXd& scores) {
  ClassLabel best = 0;
  for (int o = 1; o < scores.size(); ++o) {
    if (scores(o) > scores(best)) best = o;
  }
  return best;
}

}  // namespace detail

/// Normalized TSK inference: scores are the firing-weighted average of the
/// per-rule linear outputs. When every firing underflows to zero, the
/// nearest rule by Mahalanobis distance answers alone.
inline Prediction predict(const RuleBase& base, const Eigen::VectorXd& x) {
  if (base.empty()) throw UsageError("predict: empty rule base");
  if (x.size() != base.p) throw UsageError("predict: input dimension mismatch");

  Eigen::VectorXd blended = Eigen::VectorXd::Zero(base.classes);
  double total = 0.0;
  for (const Rule& r : base.rules) {
    const double phi = firing_strength(r, x);
    if (phi > 0.0) blended += phi * detail::rule_outputs(r, x);
    total += phi;
  }

  Prediction pred;
  if (total > 0.0) {
    pred.scores = blended / total;
  } else {
    std::size_t nearest = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < base.rules.size(); ++i) {
      const double d = mahalanobis_sq(base.rules[i], x);
      if (d < best) {
        best = d;
        nearest = i;
      }
    }
    pred.scores = detail::rule_outputs(base.rules[nearest], x);
  }
  pred.label = detail::argmax_label(pred.scores);
  return pred;
}

}  // namespace panfis
