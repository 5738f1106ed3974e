#pragma once

#include <cmath>
#include <cstdio>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "panfis/orchestrator.hpp"

namespace panfis {

namespace detail {

inline std::string fmt_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace detail

/// Machine-readable run block: key=value lines under a [run <name>] header.
inline std::string format_run_report(const std::string& name, const RunReport& r,
                                     std::size_t rules_final) {
  std::ostringstream out;
  out << "[run " << name << "]\n";
  out << "partitions=" << r.partitions << '\n';
  out << "workers=" << r.workers << '\n';
  out << "rules_before_merge=" << r.rules_before_merge() << '\n';
  out << "rules_after_merge=" << rules_final << '\n';
  out << "merge_events=" << r.fusion.events.size() << '\n';
  out << "fusion_passes=" << r.fusion.passes << '\n';
  if (r.fusion.max_passes_hit) out << "warning=max_passes_reached\n";
  out << "learn_seconds=" << detail::fmt_fixed(r.learn_seconds, 3) << '\n';
  out << "fuse_seconds=" << detail::fmt_fixed(r.fuse_seconds, 3) << '\n';
  out << "eval_seconds=" << detail::fmt_fixed(r.eval_seconds, 3) << '\n';
  out << "total_seconds=" << detail::fmt_fixed(r.total_seconds, 3) << '\n';
  if (!std::isnan(r.accuracy)) {
    out << "accuracy_pct=" << detail::fmt_fixed(100.0 * r.accuracy, 2) << '\n';
  }
  out << "eps_coverage=" << r.cfg.eps_coverage << '\n';
  out << "kerr=" << r.cfg.kerr << '\n';
  out << "sker=" << r.cfg.sker << '\n';
  out << "thr=" << r.mcfg.thr << '\n';
  out << "rls_init=" << r.cfg.rls_init << '\n';
  out << "prune_every=" << r.cfg.prune_every << '\n';
  out << "merge_every=" << r.cfg.merge_every << '\n';
  return out.str();
}

struct BenchRow {
  std::string name;
  double accuracy_pct = std::numeric_limits<double>::quiet_NaN();
  double seconds = 0.0;
  std::size_t rules_before = 0;
  std::size_t rules_after = 0;
};

/// Human-readable comparison table for bench runs.
inline std::string format_bench_table(const std::vector<BenchRow>& rows) {
  std::ostringstream out;
  std::size_t name_w = std::string("Algorithm").size();
  for (const BenchRow& r : rows) name_w = std::max(name_w, r.name.size());
  out << std::left << std::setw(static_cast<int>(name_w + 2)) << "Algorithm"
      << std::right << std::setw(12) << "Accuracy(%)" << std::setw(12) << "Time(s)"
      << std::setw(15) << "Rules(before)" << std::setw(14) << "Rules(after)" << '\n';
  for (const BenchRow& r : rows) {
    out << std::left << std::setw(static_cast<int>(name_w + 2)) << r.name << std::right
        << std::setw(12) << (std::isnan(r.accuracy_pct) ? "-" : detail::fmt_fixed(r.accuracy_pct, 2))
        << std::setw(12) << detail::fmt_fixed(r.seconds, 2) << std::setw(15) << r.rules_before
        << std::setw(14) << r.rules_after << '\n';
  }
  return out.str();
}

}  // namespace panfis
