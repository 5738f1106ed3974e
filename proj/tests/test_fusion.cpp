#include <catch2/catch.hpp>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "panfis/fusion.hpp"

using namespace panfis;

TEST_CASE("bhattacharyya_olap hand cases") {
  const Rule a = oracles::rule1d(0.0, 1.0);
  CHECK(bhattacharyya_olap(a, a) == Approx(0.0).margin(1e-15));

  const Rule b = oracles::rule1d(2.0, 1.0);
  CHECK(bhattacharyya_olap(a, b) == Approx(0.5).margin(1e-9));

  const Rule narrow = oracles::rule1d(0.0, 4.0);
  const double expected = 0.5 * std::log(2.5 / 2.0);
  CHECK(bhattacharyya_olap(a, narrow) == Approx(expected).margin(1e-12));
  CHECK(bhattacharyya_olap(a, narrow) == Approx(0.111572).margin(1e-6));
}

TEST_CASE("bhattacharyya_olap is symmetric and non-negative") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 500; ++trial) {
    const int p = 1 + static_cast<int>(rng() % 3);
    const Rule a = oracles::random_rule(rng, p, 2);
    const Rule b = oracles::random_rule(rng, p, 2);
    const double ab = bhattacharyya_olap(a, b);
    const double ba = bhattacharyya_olap(b, a);
    CHECK(std::abs(ab - ba) < 1e-12);
    CHECK(ab >= -1e-15);
  }
}

TEST_CASE("overlap matches the integrated coefficient for shared dispersions") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> pos(-5.0, 5.0);
  std::uniform_real_distribution<double> var(0.25, 4.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double v = var(rng);
    const double c1 = pos(rng);
    const double c2 = pos(rng);
    const Rule a = oracles::rule1d(c1, 1.0 / v);
    const Rule b = oracles::rule1d(c2, 1.0 / v);
    const double coeff = std::exp(-bhattacharyya_olap(a, b));
    const double oracle = oracles::bhattacharyya_coefficient_quadrature(c1, v, c2, v);
    CHECK(coeff == Approx(oracle).margin(1e-6));
  }
}

TEST_CASE("overlap matches the closed form for shared centers") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> pos(-5.0, 5.0);
  std::uniform_real_distribution<double> var(0.25, 4.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double c = pos(rng);
    const double v1 = var(rng);
    const double v2 = var(rng);
    const Rule a = oracles::rule1d(c, 1.0 / v1);
    const Rule b = oracles::rule1d(c, 1.0 / v2);
    const double coeff = std::exp(-bhattacharyya_olap(a, b));
    const double oracle = oracles::bhattacharyya_coefficient_closed_form(c, v1, c, v2);
    CHECK(coeff == Approx(oracle).margin(1e-6));
  }
}

TEST_CASE("overlap_score hand cases") {
  const Rule a = oracles::rule1d(0.0, 1.0);
  CHECK(overlap_score(a, a) == 1.0);
  CHECK(overlap_score(a, oracles::rule1d(2.0, 1.0)) == Approx(std::exp(-0.5)).margin(1e-12));
  CHECK(overlap_score(a, oracles::rule1d(2.0, 1.0)) == Approx(0.606531).margin(1e-6));
  CHECK(overlap_score(a, oracles::rule1d(10.0, 1.0)) == Approx(std::exp(-12.5)).margin(1e-15));
  CHECK(overlap_score(a, oracles::rule1d(10.0, 1.0)) == Approx(3.73e-6).margin(1e-8));
}

TEST_CASE("merge_pair hand cases") {
  Rule win = oracles::rule1d(0.0, 1.0, 100);
  Rule k = oracles::rule1d(2.0, 4.0, 50);
  const Rule merged = merge_pair(win, k);
  CHECK(merged.center(0) == Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(merged.support == 150);
  CHECK(merged.inv_dispersion(0, 0) == Approx(2.0).epsilon(1e-12));

  // identical rules with equal support: parameters unchanged, support doubled
  Rule same = oracles::rule1d(1.5, 2.0, 40);
  same.consequent.setConstant(0.25);
  const Rule doubled = merge_pair(same, same);
  CHECK(doubled.center(0) == Approx(1.5).epsilon(1e-14));
  CHECK(doubled.inv_dispersion(0, 0) == Approx(2.0).epsilon(1e-14));
  CHECK((doubled.consequent.array() == 0.25).all());
  CHECK(doubled.support == 80);
}

TEST_CASE("merge_pair resets RLS state") {
  Rule win = oracles::rule1d(0.0, 1.0, 10);
  win.rls_cov.setConstant(3.0);
  const Rule merged = merge_pair(win, oracles::rule1d(0.5, 1.0, 5), 1e5);
  CHECK(merged.rls_cov.isApprox(1e5 * Eigen::MatrixXd::Identity(2, 2)));
}

TEST_CASE("merge algebra over random pairs") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 2000; ++trial) {
    const int p = 1 + static_cast<int>(rng() % 3);
    Rule a = oracles::random_rule(rng, p, 3);
    Rule b = oracles::random_rule(rng, p, 3);
    if (a.support < b.support) std::swap(a, b);
    const Rule m = merge_pair(a, b);

    CHECK(m.support == a.support + b.support);
    for (int d = 0; d < p; ++d) {
      CHECK(m.center(d) >= std::min(a.center(d), b.center(d)) - 1e-12);
      CHECK(m.center(d) <= std::max(a.center(d), b.center(d)) + 1e-12);
    }
    CHECK(detail::is_positive_definite(m.inv_dispersion));
    CHECK(detail::is_symmetric(m.inv_dispersion));
  }
}

TEST_CASE("homogeneity hand cases") {
  const Rule unit_a = oracles::rule1d(0.0, 1.0, 10);
  const Rule unit_b = oracles::rule1d(0.0, 1.0, 10);
  CHECK(homogeneity_check(unit_a, unit_b));

  // same center, A 1 vs 4 with supports 100/50: merged A = 2, V = sqrt(2)
  const Rule win = oracles::rule1d(0.0, 1.0, 100);
  const Rule k = oracles::rule1d(0.0, 4.0, 50);
  const Rule merged = merge_pair(win, k);
  CHECK(rule_volume(merged) == Approx(2.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(homogeneity_check(win, k));

  // tight far-apart pair with dominant winner support
  const Rule tight_w = oracles::rule1d(0.0, 10000.0, 100000);
  const Rule tight_k = oracles::rule1d(50.0, 10000.0, 1);
  CHECK(rule_volume(tight_w) == Approx(0.02).epsilon(1e-12));
  CHECK(homogeneity_check(tight_w, tight_k));
}

// Support-weighted averaging of inverse dispersions can never inflate the
// merged volume past the geometric mean of the parents (log-concavity of
// the determinant), so the blow-up bound V <= p (V_win + V_k) holds for
// every valid pair. The brute-force search documents that: it must find no
// counterexample while confirming the margin varies.
TEST_CASE("homogeneity bound holds across random pairs") {
  std::mt19937_64 rng(37);
  double worst_margin = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 10000; ++trial) {
    const int p = 1 + static_cast<int>(rng() % 3);
    Rule a = oracles::random_rule(rng, p, 2);
    Rule b = oracles::random_rule(rng, p, 2);
    if (a.support < b.support) std::swap(a, b);
    const double v_merged = rule_volume(merge_pair(a, b));
    const double bound = p * (rule_volume(a) + rule_volume(b));
    CHECK(v_merged <= bound);
    CHECK(v_merged <= std::max(rule_volume(a), rule_volume(b)) * (1.0 + 1e-9));
    worst_margin = std::min(worst_margin, bound - v_merged);
  }
  CHECK(worst_margin >= 0.0);
}

namespace {

RuleBase three_separated_rules() {
  RuleBase base;
  base.p = 1;
  base.classes = 2;
  base.rules.push_back(oracles::rule1d(0.0, 1.0, 10));
  base.rules.push_back(oracles::rule1d(10.0, 1.0, 20));
  base.rules.push_back(oracles::rule1d(20.0, 1.0, 30));
  return base;
}

}  // namespace

TEST_CASE("fuse leaves a base without qualifying pairs untouched") {
  const RuleBase base = three_separated_rules();
  const auto [fused, report] = fuse({base}, MergeConfig{});
  CHECK(report.events.empty());
  CHECK(report.rules_before == 3);
  CHECK(report.rules_after == 3);
  REQUIRE(fused.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(fused.rules[i].center == base.rules[i].center);
    CHECK(fused.rules[i].support == base.rules[i].support);
  }
}

TEST_CASE("fuse collapses duplicated bases pairwise") {
  const RuleBase base = three_separated_rules();
  const auto [fused, report] = fuse({base, base}, MergeConfig{});
  CHECK(report.rules_before == 6);
  CHECK(report.rules_after == 3);
  CHECK(report.events.size() == 3);
  REQUIRE(fused.size() == 3);
  long long total = 0;
  for (const Rule& r : fused.rules) total += r.support;
  CHECK(total == 120);
  for (const Rule& r : fused.rules) {
    CHECK((r.support == 20 || r.support == 40 || r.support == 60));
  }
  for (const MergeEvent& e : report.events) CHECK(e.score == Approx(1.0).margin(1e-12));
}

TEST_CASE("fuse is idempotent") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    const int p = 1 + static_cast<int>(rng() % 2);
    std::vector<RuleBase> bases;
    const std::size_t n_bases = 1 + rng() % 3;
    for (std::size_t i = 0; i < n_bases; ++i) {
      bases.push_back(oracles::random_base(rng, p, 2, 1 + rng() % 8, 2.0));
    }
    const auto [fused, report] = fuse(bases, MergeConfig{});
    const auto [refused, report2] = fuse({fused}, MergeConfig{});
    CHECK(report2.events.empty());
    CHECK(refused.size() == fused.size());
  }
}

TEST_CASE("fuse conserves support") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<RuleBase> bases;
    long long total_before = 0;
    const std::size_t n_bases = 1 + rng() % 4;
    for (std::size_t i = 0; i < n_bases; ++i) {
      RuleBase b = oracles::random_base(rng, 2, 3, 1 + rng() % 6, 1.5);
      for (const Rule& r : b.rules) total_before += r.support;
      bases.push_back(std::move(b));
    }
    const auto [fused, report] = fuse(bases, MergeConfig{});
    long long total_after = 0;
    for (const Rule& r : fused.rules) total_after += r.support;
    CHECK(total_after == total_before);
    CHECK(report.rules_after == report.rules_before - report.events.size());
  }
}

TEST_CASE("fuse output is deterministic") {
  std::mt19937_64 rng(47);
  std::vector<RuleBase> bases;
  for (int i = 0; i < 3; ++i) bases.push_back(oracles::random_base(rng, 1, 2, 6, 1.0));
  const auto [a, ra] = fuse(bases, MergeConfig{});
  const auto [b, rb] = fuse(bases, MergeConfig{});
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.rules[i].center == b.rules[i].center);
    CHECK(a.rules[i].inv_dispersion == b.rules[i].inv_dispersion);
    CHECK(a.rules[i].support == b.rules[i].support);
  }
  CHECK(ra.events.size() == rb.events.size());
}

TEST_CASE("fuse reports a hit pass cap without erroring") {
  RuleBase base;
  base.p = 1;
  base.classes = 2;
  for (int i = 0; i < 4; ++i) base.rules.push_back(oracles::rule1d(0.0, 1.0, 10));

  MergeConfig capped;
  capped.max_passes = 1;
  const auto [fused, report] = fuse({base}, capped);
  CHECK(report.max_passes_hit);
  CHECK(report.passes == 1);
  CHECK(report.events.size() == 1);  // one merge per pass
  CHECK(fused.size() == 3);

  const auto [full, full_report] = fuse({base}, MergeConfig{});
  CHECK_FALSE(full_report.max_passes_hit);
  CHECK(full.size() == 1);
  CHECK(full_report.passes == 4);  // three merging passes plus the fixed-point sweep
  CHECK(full.rules[0].support == 40);
}

TEST_CASE("fuse usage errors") {
  RuleBase a;
  a.p = 1;
  a.classes = 2;
  a.rules.push_back(oracles::rule1d(0.0, 1.0));
  RuleBase b;
  b.p = 2;
  b.classes = 2;
  std::mt19937_64 rng(53);
  b.rules.push_back(oracles::random_rule(rng, 2, 2));
  CHECK_THROWS_AS(fuse({a, b}, MergeConfig{}), UsageError);

  RuleBase empty;
  empty.p = 1;
  empty.classes = 2;
  CHECK_THROWS_AS(fuse({empty}, MergeConfig{}), UsageError);
  CHECK_THROWS_AS(fuse({}, MergeConfig{}), UsageError);
}

TEST_CASE("fuse ignores empty side bases") {
  RuleBase empty;
  empty.p = 1;
  empty.classes = 2;
  const RuleBase base = three_separated_rules();
  const auto [fused, report] = fuse({empty, base}, MergeConfig{});
  CHECK(fused.size() == 3);
  CHECK(report.rules_before == 3);
}
