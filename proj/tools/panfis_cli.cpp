// Command-line front end: synthetic stream generation, single and
// chunk-parallel training, model fusion, prediction, evaluation, and a
// single-vs-scalable benchmark.
#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "panfis/panfis.hpp"

namespace {

struct SchemaFlags {
  bool skip_header = false;
  int label_base = 0;
  bool no_labels = false;

  panfis::CsvSchema schema() const {
    panfis::CsvSchema s;
    s.skip_header = skip_header;
    s.label_base = label_base;
    s.has_labels = !no_labels;
    return s;
  }
};

struct ConfigFlags {
  double eps = 0.135;
  double kerr = 0.01;
  double sker = 0.8;
  double thr = 0.8;
  double init_spread = 0.0;  // 0: resolve from the training range
  double rls_init = panfis::kDefaultRlsInit;
  int prune_every = 50;
  int merge_every = 50;
  int max_passes = 1000;
  bool disjunctive = false;

  panfis::LearnerConfig learner() const {
    panfis::LearnerConfig cfg;
    cfg.eps_coverage = eps;
    cfg.kerr = kerr;
    cfg.sker = sker;
    cfg.thr = thr;
    if (init_spread > 0.0) cfg.init_spread = Eigen::VectorXd::Constant(1, init_spread);
    cfg.rls_init = rls_init;
    cfg.prune_every = prune_every;
    cfg.merge_every = merge_every;
    return cfg;
  }

  panfis::MergeConfig merge() const {
    panfis::MergeConfig m;
    m.thr = thr;
    m.max_passes = max_passes;
    m.conjunctive = !disjunctive;
    m.rls_init = rls_init;
    return m;
  }
};

void add_schema_flags(CLI::App* cmd, SchemaFlags& flags, bool with_no_labels = false) {
  cmd->add_flag("--skip-header", flags.skip_header, "Skip the first line of the CSV");
  cmd->add_option("--label-base", flags.label_base, "Labels in the file start at 0 or 1")
      ->check(CLI::IsMember({0, 1}));
  if (with_no_labels) {
    cmd->add_flag("--no-labels", flags.no_labels, "Treat every column as a feature");
  }
}

void add_config_flags(CLI::App* cmd, ConfigFlags& flags) {
  cmd->add_option("--eps", flags.eps, "Coverage threshold that triggers rule growth");
  cmd->add_option("--kerr", flags.kerr, "Prune threshold on statistical contribution");
  cmd->add_option("--sker", flags.sker, "Intra-learner redundancy threshold");
  cmd->add_option("--thr", flags.thr, "Fusion overlap-score threshold");
  cmd->add_option("--init-spread", flags.init_spread,
                  "First-rule sigma per dimension (0 = a tenth of the training range)");
  cmd->add_option("--rls-init", flags.rls_init, "Initial RLS covariance scale");
  cmd->add_option("--prune-every", flags.prune_every, "Prune cadence in samples");
  cmd->add_option("--merge-every", flags.merge_every, "Merge cadence in samples");
  cmd->add_option("--max-passes", flags.max_passes, "Fusion pass safety cap");
  cmd->add_flag("--disjunctive", flags.disjunctive,
                "Merge on overlap OR homogeneity instead of AND");
}

void write_or_print(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw panfis::UsageError("cannot open " + path + " for writing");
  out << text;
}

std::vector<Eigen::VectorXd> parse_means(const std::string& csv) {
  std::vector<Eigen::VectorXd> means;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    double v = 0.0;
    if (!panfis::detail::parse_double(tok, v)) {
      throw panfis::UsageError("bad --means entry '" + tok + "'");
    }
    means.push_back(Eigen::VectorXd::Constant(1, v));
  }
  return means;
}

std::string metrics_block(const panfis::EvalMetrics& m) {
  std::ostringstream out;
  out << "[run eval]\n";
  out << "n=" << m.n << '\n';
  out << "accuracy_pct=" << panfis::detail::fmt_fixed(100.0 * m.accuracy, 2) << '\n';
  for (Eigen::Index i = 0; i < m.confusion.rows(); ++i) {
    out << "confusion_" << i << '=';
    for (Eigen::Index j = 0; j < m.confusion.cols(); ++j) {
      if (j) out << ' ';
      out << static_cast<long long>(m.confusion(i, j));
    }
    out << '\n';
  }
  return out.str();
}

int run_synth(std::string& stage, const std::string& out_path, std::size_t n, int classes,
              double sigma, double drift, std::uint64_t seed, const std::string& means_csv) {
  stage = "synth";
  panfis::SynthConfig cfg;
  cfg.n = n;
  cfg.classes = classes;
  cfg.sigma = sigma;
  cfg.drift_rate = drift;
  cfg.seed = seed;
  if (!means_csv.empty()) cfg.class_means = parse_means(means_csv);
  const panfis::Dataset ds = panfis::synth_rss(cfg);
  stage = "write-csv";
  panfis::write_csv(out_path, ds);
  std::cout << "wrote " << ds.size() << " samples to " << out_path << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evolving fuzzy-rule stream classifier with chunk-parallel training and "
               "rule-base fusion"};
  app.require_subcommand(1);

  // ---- synth ----
  auto* synth = app.add_subcommand("synth", "Generate a synthetic RSS-like labeled stream");
  std::string synth_out;
  std::size_t synth_n = 10000;
  int synth_classes = 4;
  double synth_sigma = 2.0;
  double synth_drift = 0.0;
  std::uint64_t synth_seed = 0;
  std::string synth_means;
  synth->add_option("--out", synth_out, "Output CSV path")->required();
  synth->add_option("--n", synth_n, "Sample count")->required();
  synth->add_option("--classes", synth_classes, "Class count");
  synth->add_option("--sigma", synth_sigma, "Per-class spread");
  synth->add_option("--drift", synth_drift, "Mean shift per sample");
  synth->add_option("--seed", synth_seed, "RNG seed");
  synth->add_option("--means", synth_means, "Comma-separated 1-D class means");

  // ---- train ----
  auto* train = app.add_subcommand("train", "Train a model (single pass or chunk-parallel)");
  std::string train_data, train_test, train_model, train_report;
  int train_partitions = 0;
  int train_workers = 0;
  SchemaFlags train_schema;
  ConfigFlags train_config;
  train->add_option("--data", train_data, "Training CSV")->required();
  train->add_option("--test", train_test, "Held-out CSV for accuracy reporting");
  train->add_option("--model", train_model, "Output model path")->required();
  train->add_option("--report", train_report, "Report path (stdout when omitted)");
  train->add_option("--partitions", train_partitions,
                    "Chunk count; omit for single-machine training");
  train->add_option("--workers", train_workers, "Worker threads (0 = hardware)");
  add_schema_flags(train, train_schema);
  add_config_flags(train, train_config);

  // ---- fuse ----
  auto* fusec = app.add_subcommand("fuse", "Merge several model files into one");
  std::string fuse_out, fuse_report;
  std::vector<std::string> fuse_inputs;
  ConfigFlags fuse_config;
  fusec->add_option("--out", fuse_out, "Output model path")->required();
  fusec->add_option("inputs", fuse_inputs, "Model files to merge")->required()->expected(-1);
  fusec->add_option("--report", fuse_report, "Report path (stdout when omitted)");
  fusec->add_option("--thr", fuse_config.thr, "Fusion overlap-score threshold");
  fusec->add_option("--max-passes", fuse_config.max_passes, "Fusion pass safety cap");
  fusec->add_flag("--disjunctive", fuse_config.disjunctive,
                  "Merge on overlap OR homogeneity instead of AND");

  // ---- predict ----
  auto* predictc = app.add_subcommand("predict", "Write predicted labels for a CSV");
  std::string pred_model, pred_data, pred_out;
  SchemaFlags pred_schema;
  predictc->add_option("--model", pred_model, "Model file")->required();
  predictc->add_option("--data", pred_data, "Input CSV")->required();
  predictc->add_option("--out", pred_out, "Output label file")->required();
  add_schema_flags(predictc, pred_schema, /*with_no_labels=*/true);

  // ---- eval ----
  auto* evalc = app.add_subcommand("eval", "Evaluate a model against a labeled CSV");
  std::string eval_model, eval_data, eval_report;
  SchemaFlags eval_schema;
  evalc->add_option("--model", eval_model, "Model file")->required();
  evalc->add_option("--data", eval_data, "Labeled CSV")->required();
  evalc->add_option("--report", eval_report, "Report path (stdout when omitted)");
  add_schema_flags(evalc, eval_schema);

  // ---- bench ----
  auto* bench = app.add_subcommand("bench",
                                   "Run single and chunk-parallel training on the same data "
                                   "and compare accuracy, time, and rule counts");
  std::string bench_data, bench_test, bench_report, bench_model_single, bench_model_scalable;
  std::size_t bench_n = 200000;
  std::size_t bench_test_n = 83100;
  std::uint64_t bench_seed = 1;
  int bench_partitions = 50;
  int bench_workers = 0;
  SchemaFlags bench_schema;
  ConfigFlags bench_config;
  bench->add_option("--data", bench_data, "Training CSV (omit to synthesize)");
  bench->add_option("--test", bench_test, "Test CSV (omit to synthesize)");
  bench->add_option("--n", bench_n, "Synthetic training sample count");
  bench->add_option("--test-n", bench_test_n, "Synthetic test sample count");
  bench->add_option("--seed", bench_seed, "Synthetic data seed");
  bench->add_option("--partitions", bench_partitions, "Chunk count for the scalable run");
  bench->add_option("--workers", bench_workers, "Worker threads (0 = hardware)");
  bench->add_option("--report", bench_report, "Report path (stdout when omitted)");
  bench->add_option("--model-single", bench_model_single, "Optional path for the single model");
  bench->add_option("--model-scalable", bench_model_scalable,
                    "Optional path for the scalable model");
  add_schema_flags(bench, bench_schema);
  add_config_flags(bench, bench_config);

  CLI11_PARSE(app, argc, argv);

  std::string stage = "startup";
  try {
    if (*synth) {
      return run_synth(stage, synth_out, synth_n, synth_classes, synth_sigma, synth_drift,
                       synth_seed, synth_means);
    }

    if (*train) {
      stage = "load-data";
      const panfis::Dataset data = panfis::load_csv(train_data, train_schema.schema());
      panfis::Dataset test;
      if (!train_test.empty()) test = panfis::load_csv(train_test, train_schema.schema());
      const panfis::Dataset* holdout = train_test.empty() ? nullptr : &test;

      stage = "train";
      panfis::RuleBase model;
      panfis::RunReport report;
      std::string run_name;
      if (train_partitions > 0) {
        std::tie(model, report) =
            panfis::train_scalable(data, train_partitions, train_config.learner(),
                                   train_config.merge(), train_workers, holdout);
        run_name = "scalable(P=" + std::to_string(train_partitions) + ")";
      } else {
        std::tie(model, report) = panfis::train_single(data, train_config.learner(), holdout);
        run_name = "single";
      }

      stage = "save-model";
      panfis::save_model(model, train_model);
      stage = "report";
      write_or_print(train_report, panfis::format_run_report(run_name, report, model.size()));
      return 0;
    }

    if (*fusec) {
      stage = "load-models";
      std::vector<panfis::RuleBase> bases;
      for (const std::string& path : fuse_inputs) bases.push_back(panfis::load_model(path));
      stage = "fuse";
      const auto [fused, freport] = panfis::fuse(bases, fuse_config.merge());
      stage = "save-model";
      panfis::save_model(fused, fuse_out);
      std::ostringstream out;
      out << "[run fuse]\n";
      out << "rules_before_merge=" << freport.rules_before << '\n';
      out << "rules_after_merge=" << freport.rules_after << '\n';
      out << "merge_events=" << freport.events.size() << '\n';
      out << "fusion_passes=" << freport.passes << '\n';
      if (freport.max_passes_hit) out << "warning=max_passes_reached\n";
      write_or_print(fuse_report, out.str());
      return 0;
    }

    if (*predictc) {
      stage = "load-model";
      const panfis::RuleBase model = panfis::load_model(pred_model);
      stage = "load-data";
      const panfis::Dataset data = panfis::load_csv(pred_data, pred_schema.schema());
      stage = "predict";
      std::ofstream out(pred_out);
      if (!out) throw panfis::UsageError("cannot open " + pred_out + " for writing");
      for (std::size_t i = 0; i < data.size(); ++i) {
        out << panfis::predict(model, data.row(i)).label << '\n';
      }
      std::cout << "wrote " << data.size() << " labels to " << pred_out << '\n';
      return 0;
    }

    if (*evalc) {
      stage = "load-model";
      const panfis::RuleBase model = panfis::load_model(eval_model);
      stage = "load-data";
      const panfis::Dataset data = panfis::load_csv(eval_data, eval_schema.schema());
      stage = "evaluate";
      const panfis::EvalMetrics m = panfis::evaluate(model, data);
      write_or_print(eval_report, metrics_block(m));
      return 0;
    }

    if (*bench) {
      stage = "load-data";
      panfis::Dataset data, test;
      if (!bench_data.empty()) {
        data = panfis::load_csv(bench_data, bench_schema.schema());
        if (bench_test.empty()) throw panfis::UsageError("--data requires --test");
        test = panfis::load_csv(bench_test, bench_schema.schema());
      } else {
        panfis::SynthConfig scfg;
        scfg.n = bench_n;
        scfg.seed = bench_seed;
        data = panfis::synth_rss(scfg);
        scfg.n = bench_test_n;
        scfg.seed = bench_seed + 1;
        test = panfis::synth_rss(scfg);
      }

      stage = "train-single";
      const auto [single_model, single_report] =
          panfis::train_single(data, bench_config.learner(), &test);

      stage = "train-scalable";
      const auto [scalable_model, scalable_report] =
          panfis::train_scalable(data, bench_partitions, bench_config.learner(),
                                 bench_config.merge(), bench_workers, &test);

      stage = "save-model";
      if (!bench_model_single.empty()) panfis::save_model(single_model, bench_model_single);
      if (!bench_model_scalable.empty()) {
        panfis::save_model(scalable_model, bench_model_scalable);
      }

      stage = "report";
      const std::string scalable_name =
          "scalable(P=" + std::to_string(bench_partitions) + ")";
      std::ostringstream out;
      out << panfis::format_run_report("single", single_report, single_model.size()) << '\n';
      out << panfis::format_run_report(scalable_name, scalable_report, scalable_model.size())
          << '\n';
      out << panfis::format_bench_table(
          {{"single", 100.0 * single_report.accuracy, single_report.total_seconds,
            single_report.rules_before_merge(), single_model.size()},
           {scalable_name, 100.0 * scalable_report.accuracy, scalable_report.total_seconds,
            scalable_report.rules_before_merge(), scalable_model.size()}});
      write_or_print(bench_report, out.str());
      return 0;
    }
  } catch (const panfis::UsageError& e) {
    std::cerr << "error [" << stage << "]: " << e.what() << '\n';
    return 2;
  } catch (const panfis::ParseError& e) {
    std::cerr << "error [" << stage << "]: " << e.what() << '\n';
    return 2;
  } catch (const panfis::FormatError& e) {
    std::cerr << "error [" << stage << "]: " << e.what() << '\n';
    return 3;
  } catch (const panfis::NumericError& e) {
    std::cerr << "error [" << stage << "]: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error [" << stage << "]: " << e.what() << '\n';
    return 4;
  }
  return 0;
}
