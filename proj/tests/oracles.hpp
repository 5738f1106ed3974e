// Test-side oracles, kept independent of the library's computation paths:
// plain-loop kernel arithmetic, Simpson quadrature for the Bhattacharyya
// coefficient, and random generators for valid rules and bases.
#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "panfis/rule_model.hpp"

namespace oracles {

/// Gaussian kernel exp(-1/2 (x-c)' A (x-c)) via plain scalar loops.
inline double scalar_gaussian_kernel(const std::vector<double>& x, const std::vector<double>& c,
                                     const std::vector<std::vector<double>>& a) {
  const std::size_t p = x.size();
  double q = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      q += (x[i] - c[i]) * a[i][j] * (x[j] - c[j]);
    }
  }
  return std::exp(-0.5 * q);
}

inline double normal_pdf(double x, double mean, double var) {
  const double d = x - mean;
  return std::exp(-0.5 * d * d / var) / std::sqrt(2.0 * M_PI * var);
}

/// Bhattacharyya coefficient of two 1-D normals by Simpson quadrature:
/// integral of sqrt(p(x) q(x)) dx.
inline double bhattacharyya_coefficient_quadrature(double c1, double var1, double c2,
                                                   double var2) {
  const double sigma = std::sqrt(std::max(var1, var2));
  const double lo = std::min(c1, c2) - 14.0 * sigma;
  const double hi = std::max(c1, c2) + 14.0 * sigma;
  const int n = 40000;  // even
  const double h = (hi - lo) / n;
  auto f = [&](double x) { return std::sqrt(normal_pdf(x, c1, var1) * normal_pdf(x, c2, var2)); };
  double sum = f(lo) + f(hi);
  for (int i = 1; i < n; ++i) sum += f(lo + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

/// Closed-form 1-D Bhattacharyya coefficient.
inline double bhattacharyya_coefficient_closed_form(double c1, double var1, double c2,
                                                    double var2) {
  const double s = var1 + var2;
  const double d = c1 - c2;
  return std::sqrt(2.0 * std::sqrt(var1 * var2) / s) * std::exp(-0.25 * d * d / s);
}

/// Random SPD matrix with eigenvalues in [lo, hi].
inline Eigen::MatrixXd random_spd(std::mt19937_64& rng, int p, double lo = 0.3, double hi = 4.0) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> eig(lo, hi);
  Eigen::MatrixXd g(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) g(i, j) = gauss(rng);
  }
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  Eigen::VectorXd lambda(p);
  for (int i = 0; i < p; ++i) lambda(i) = eig(rng);
  Eigen::MatrixXd a = q * lambda.asDiagonal() * q.transpose();
  return 0.5 * (a + a.transpose());
}

inline panfis::Rule random_rule(std::mt19937_64& rng, int p, int classes,
                                double center_span = 3.0) {
  std::uniform_real_distribution<double> pos(-center_span, center_span);
  std::uniform_int_distribution<long long> supp(1, 500);
  std::normal_distribution<double> gauss(0.0, 1.0);
  panfis::Rule r;
  r.center = Eigen::VectorXd::NullaryExpr(p, [&](Eigen::Index) { return pos(rng); });
  r.inv_dispersion = random_spd(rng, p);
  r.support = supp(rng);
  r.consequent = Eigen::MatrixXd::NullaryExpr(p + 1, classes, [&](Eigen::Index, Eigen::Index) {
    return gauss(rng);
  });
  r.rls_cov = 1e5 * Eigen::MatrixXd::Identity(p + 1, p + 1);
  return r;
}

/// 1-D rule from center and inverse variance.
inline panfis::Rule rule1d(double center, double inv_var, long long support = 1,
                           int classes = 2) {
  panfis::Rule r;
  r.center = Eigen::VectorXd::Constant(1, center);
  r.inv_dispersion = Eigen::MatrixXd::Constant(1, 1, inv_var);
  r.support = support;
  r.consequent = Eigen::MatrixXd::Zero(2, classes);
  r.consequent(0, 0) = 1.0;
  r.rls_cov = 1e5 * Eigen::MatrixXd::Identity(2, 2);
  return r;
}

inline panfis::RuleBase random_base(std::mt19937_64& rng, int p, int classes, std::size_t n_rules,
                                    double center_span = 3.0) {
  panfis::RuleBase base;
  base.p = p;
  base.classes = classes;
  for (std::size_t i = 0; i < n_rules; ++i) {
    base.rules.push_back(random_rule(rng, p, classes, center_span));
  }
  return base;
}

}  // namespace oracles
