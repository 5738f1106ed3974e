#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "panfis/errors.hpp"

namespace panfis {

using ClassLabel = int;

/// One observation: feature vector plus class label in [0, classes).
struct Sample {
  Eigen::VectorXd x;
  ClassLabel y = 0;
};

/// An ellipsoidal fuzzy rule: Gaussian antecedent (center + inverse
/// dispersion) with a first-order per-class consequent and its RLS state.
struct Rule {
  Eigen::VectorXd center;          // p
  Eigen::MatrixXd inv_dispersion;  // p x p, SPD
  std::int64_t support = 1;
  Eigen::MatrixXd consequent;      // (p+1) x classes, column = weights over [1, x]
  Eigen::MatrixXd rls_cov;         // (p+1) x (p+1), SPD; local estimator state

  int dim() const { return static_cast<int>(center.size()); }
  int classes() const { return static_cast<int>(consequent.cols()); }
};

/// Ordered rule collection; list order is the canonical tie-break order.
struct RuleBase {
  std::vector<Rule> rules;
  int p = 0;
  int classes = 0;
  std::string origin;  // partition index or "fused"

  std::size_t size() const { return rules.size(); }
  bool empty() const { return rules.empty(); }
};

namespace detail {

inline constexpr double kSymmetryTol = 1e-9;

inline void symmetrize(Eigen::MatrixXd& a) { a = ((a + a.transpose()) * 0.5).eval(); }

inline bool is_symmetric(const Eigen::MatrixXd& a, double tol = kSymmetryTol) {
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= tol;
}

/// Cholesky-based SPD test. Symmetry is checked separately.
inline bool is_positive_definite(const Eigen::MatrixXd& a) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  return llt.info() == Eigen::Success;
}

/// Determinant of an SPD matrix through its Cholesky factor.
/// Throws NumericError when the matrix is not SPD.
inline double spd_determinant(const Eigen::MatrixXd& a) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    throw NumericError("matrix is not symmetric positive-definite");
  }
  const Eigen::VectorXd d = llt.matrixL().toDenseMatrix().diagonal();
  double det = 1.0;
  for (Eigen::Index i = 0; i < d.size(); ++i) det *= d(i) * d(i);
  return det;
}

/// Volume of the unit ball in dimension p: pi^(p/2) / Gamma(p/2 + 1).
inline double unit_ball_volume(int p) {
  return std::exp(0.5 * p * std::log(M_PI) - std::lgamma(0.5 * p + 1.0));
}

}  // namespace detail

/// Throws unless the rule satisfies its structural invariants.
inline void validate_rule(const Rule& r) {
  const int p = r.dim();
  if (p == 0) throw UsageError("rule has empty center");
  if (r.inv_dispersion.rows() != p || r.inv_dispersion.cols() != p) {
    throw UsageError("inv_dispersion shape does not match center dimension");
  }
  if (r.support < 1) throw UsageError("rule support must be >= 1");
  if (r.consequent.rows() != p + 1 || r.consequent.cols() < 1) {
    throw UsageError("consequent shape must be (p+1) x classes");
  }
  if (!r.center.allFinite() || !r.inv_dispersion.allFinite() || !r.consequent.allFinite()) {
    throw NumericError("rule holds non-finite values");
  }
  if (!detail::is_symmetric(r.inv_dispersion)) {
    throw NumericError("inv_dispersion is not symmetric within tolerance");
  }
  if (!detail::is_positive_definite(r.inv_dispersion)) {
    throw NumericError("inv_dispersion is not positive-definite");
  }
}

/// Gaussian membership exp(-1/2 (x-c)' A (x-c)); 1 at the center, strictly
/// decreasing in Mahalanobis distance.
inline double firing_strength(const Rule& rule, const Eigen::VectorXd& x) {
  if (x.size() != rule.center.size()) {
    throw UsageError("firing_strength: input dimension does not match rule");
  }
  const Eigen::VectorXd d = x - rule.center;
  const double q = d.dot(rule.inv_dispersion * d);
  const double phi = std::exp(-0.5 * q);
  if (!std::isfinite(phi)) throw NumericError("firing_strength: non-finite result");
  return phi;
}

/// Squared Mahalanobis distance of x from the rule center.
inline double mahalanobis_sq(const Rule& rule, const Eigen::VectorXd& x) {
  if (x.size() != rule.center.size()) {
    throw UsageError("mahalanobis_sq: input dimension does not match rule");
  }
  const Eigen::VectorXd d = x - rule.center;
  return d.dot(rule.inv_dispersion * d);
}

/// Volume of the unit-Mahalanobis-radius ellipsoid: U_p / sqrt(det A).
inline double rule_volume(const Rule& rule) {
  const double det = detail::spd_determinant(rule.inv_dispersion);
  if (!(det > 0.0) || !std::isfinite(det)) {
    throw NumericError("rule_volume: non-positive or non-finite determinant");
  }
  const double v = detail::unit_ball_volume(rule.dim()) / std::sqrt(det);
  if (!std::isfinite(v) || v <= 0.0) {
    throw NumericError("rule_volume: non-finite or non-positive volume");
  }
  return v;
}

/// Volumes of every rule in base order.
inline std::vector<double> rule_volumes(const RuleBase& base) {
  std::vector<double> v;
  v.reserve(base.rules.size());
  for (const Rule& r : base.rules) v.push_back(rule_volume(r));
  return v;
}

/// Share of rule i's volume in the total volume of the base.
inline double statistical_contribution(const RuleBase& base, std::size_t i) {
  if (base.empty()) throw UsageError("statistical_contribution: empty rule base");
  if (i >= base.rules.size()) throw UsageError("statistical_contribution: index out of range");
  const std::vector<double> v = rule_volumes(base);
  double total = 0.0;
  for (double vi : v) total += vi;
  return v[i] / total;
}

}  // namespace panfis
