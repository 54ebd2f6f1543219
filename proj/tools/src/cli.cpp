#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>
#include <variant>

#include <CLI11.hpp>

#include "atree/baselines.hpp"
#include "atree/dataset.hpp"
#include "atree/error.hpp"
#include "atree/metrics.hpp"
#include "atree/model_io.hpp"
#include "atree/tree.hpp"
#include "run_config.hpp"
#include "training_log.hpp"

namespace atree::cli {

namespace {

struct Globals {
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  std::string config_path;
  bool quiet = false;
};

// Command-line overrides of RunConfig fields; unset options leave the file's
// (or default) value alone.
struct TreeOverrides {
  std::optional<double> delta;
  std::optional<int> max_depth;
  std::optional<std::string> kernel;
  std::optional<int> rounds;
  std::optional<double> gamma;
  std::optional<double> c;
  std::optional<std::size_t> min_node_samples;
  std::vector<std::size_t> sv_budgets;
  bool auto_c = false;
  bool literal_split = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--delta", delta, "Routing threshold in [0.5, 1]");
    cmd->add_option("--max-depth", max_depth, "Maximum tree depth L (0 = 2*ceil(log2 n))");
    cmd->add_option("--kernel", kernel, "linear, rbf:<gamma>, chi2:<gamma> or intersection");
    cmd->add_option("--rounds", rounds, "Boosting rounds per node");
    cmd->add_option("--gamma", gamma, "Boosting early-exit error threshold");
    cmd->add_option("--c", c, "SVM regularization C");
    cmd->add_option("--min-node-samples", min_node_samples, "Smallest node that may split");
    cmd->add_option("--sv-budgets", sv_budgets, "Candidate support-vector budgets per node")
        ->delimiter(',');
    cmd->add_flag("--auto-c", auto_c, "Pick C per SVM by cross-validation");
    cmd->add_flag("--literal-split", literal_split, "Threshold class ids instead of features");
  }

  void apply(AtreeConfig& cfg) const {
    if (delta) cfg.delta = *delta;
    if (max_depth) cfg.max_depth = *max_depth;
    if (kernel) cfg.kernel = KernelSpec::parse(*kernel);
    if (rounds) cfg.boost.max_rounds = *rounds;
    if (gamma) cfg.boost.gamma = *gamma;
    if (c) cfg.svm.c = *c;
    if (min_node_samples) cfg.min_node_samples = *min_node_samples;
    if (!sv_budgets.empty()) cfg.sv_budget_search = sv_budgets;
    if (auto_c) cfg.auto_c = true;
    if (literal_split) cfg.split_rule = SplitRule::literal_label_threshold;
  }
};

RunConfig resolve_config(const Globals& g, const TreeOverrides* overrides,
                         const std::optional<std::string>& baseline) {
  RunConfig cfg = g.config_path.empty() ? RunConfig{} : load_run_config(g.config_path);
  if (g.seed) cfg.seed = *g.seed;
  if (overrides) overrides->apply(cfg.atree);
  if (baseline) cfg.baseline = *baseline;
  cfg.atree.svm.seed = cfg.seed;
  cfg.validate();
  return cfg;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeError("cannot write " + path);
  out << text;
  if (!out) throw RuntimeError("write failed for " + path);
}

// Writes to `path`, or to `fallback` when the path is empty.
void emit(const std::string& path, const std::string& text, std::ostream& fallback) {
  if (path.empty()) {
    fallback << text;
  } else {
    write_text(path, text);
  }
}

std::string format_double(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  std::string kind;
  std::size_t count = 3000;
  int classes = 20;
  std::size_t per_class = 100;
  std::size_t dim = 16;
  double spread = 0.5;
  std::string out;
  double train_fraction = 0.0;
  std::string test_out;
};

void cmd_synth(const SynthArgs& a, const Globals& g, std::ostream& out) {
  const std::uint64_t seed = g.seed.value_or(0);
  Dataset data;
  if (a.kind == "two-cluster-2d") {
    data = generate_two_cluster_2d(a.count, seed);
  } else if (a.kind == "blobs") {
    data = generate_gaussian_blobs(a.classes, a.per_class, a.dim, a.spread, seed);
  } else {
    throw ValidationError("unknown dataset kind '" + a.kind + "' (two-cluster-2d or blobs)");
  }
  if (a.train_fraction > 0.0) {
    if (a.test_out.empty()) throw ValidationError("--train-fraction needs --test-out");
    if (a.train_fraction >= 1.0) throw ValidationError("--train-fraction must lie in (0, 1)");
    auto [train, test] = split_train_test(data, a.train_fraction, seed, true);
    write_csv(train, std::filesystem::path(a.out));
    write_csv(test, std::filesystem::path(a.test_out));
    if (!g.quiet) {
      out << "wrote " << train.size() << " train rows to " << a.out << " and " << test.size()
          << " test rows to " << a.test_out << " (n=" << data.num_classes()
          << ", d=" << data.dimension() << ")\n";
    }
    return;
  }
  if (!a.test_out.empty()) throw ValidationError("--test-out needs --train-fraction");
  write_csv(data, std::filesystem::path(a.out));
  if (!g.quiet) {
    out << "wrote " << data.size() << " rows to " << a.out << " (n=" << data.num_classes()
        << ", d=" << data.dimension() << ")\n";
  }
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string train;
  std::string model;
  std::string log;
  bool header = false;
  bool no_timestamp = false;
  TreeOverrides overrides;
};

void cmd_train(const TrainArgs& a, const Globals& g, std::ostream& out) {
  const RunConfig cfg = resolve_config(g, &a.overrides, std::nullopt);
  const Dataset data = load_csv(a.train, a.header).normalized();
  const Atree tree = train_atree(data, cfg.atree);
  save_model(tree, a.model);
  std::ostringstream log;
  write_training_log(tree, log, !a.no_timestamp);
  if (!a.log.empty()) {
    write_text(a.log, log.str());
  } else if (!g.quiet) {
    out << log.str();
  }
  if (!g.quiet) {
    out << "model " << a.model << ": " << tree.nodes.size() << " nodes, depth " << tree.depth()
        << "\n";
  }
}

// ---------------------------------------------------------------- evaluation helpers

struct BaselineRun {
  std::string name;
  EvaluationRecord record;
};

std::optional<BaselineRun> run_baseline(const std::string& kind, const Dataset& train,
                                        const Dataset& test, const AtreeConfig& cfg) {
  if (kind == "none") return std::nullopt;
  if (kind == "ova") {
    return BaselineRun{"ova", evaluate(train_one_vs_all(train, cfg.kernel, cfg.svm, cfg.auto_c),
                                       test)};
  }
  return BaselineRun{"ovo",
                     evaluate(train_one_vs_one(train, cfg.kernel, cfg.svm, cfg.auto_c), test)};
}

// One-vs-all cost for normalization, whatever baseline was requested.
EvaluationRecord ova_reference(const std::optional<BaselineRun>& baseline, const Dataset& train,
                               const Dataset& test, const AtreeConfig& cfg) {
  if (baseline && baseline->name == "ova") return baseline->record;
  return evaluate(train_one_vs_all(train, cfg.kernel, cfg.svm, cfg.auto_c), test);
}

const char* kMetricsHeader =
    "method,delta,kernel,accuracy,mean_evals,mean_kernel_computations,relative_complexity\n";

std::string metrics_row(const std::string& method, const std::string& delta,
                        const KernelSpec& kernel, const ComplexityReport& r) {
  std::ostringstream s;
  s << method << "," << delta << "," << kernel.to_string() << "," << format_double(r.accuracy)
    << "," << format_double(r.mean_classifier_evaluations) << ","
    << format_double(r.mean_kernel_computations) << ","
    << (r.relative_complexity ? format_double(*r.relative_complexity) : "") << "\n";
  return s.str();
}

std::string trace_csv(const EvaluationRecord& rec, const Atree& tree) {
  std::ostringstream s;
  s << "instance,true_label,predicted_label,evaluations,kernel_computations,visited_nodes\n";
  for (std::size_t i = 0; i < rec.size(); ++i) {
    s << i << "," << tree.label_names[static_cast<std::size_t>(rec.truth[i])] << ","
      << tree.label_names[static_cast<std::size_t>(rec.predictions[i])] << ","
      << rec.classifier_evaluations[i] << "," << rec.kernel_computations[i] << ",";
    for (std::size_t k = 0; k < rec.visited_nodes[i].size(); ++k) {
      s << (k ? ";" : "") << rec.visited_nodes[i][k];
    }
    s << "\n";
  }
  return s.str();
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  std::string model;
  std::string test;
  std::string train;
  std::optional<std::string> baseline;
  std::string metrics;
  std::string trace;
  bool header = false;
};

void cmd_eval(const EvalArgs& a, const Globals& g, std::ostream& out) {
  const RunConfig run = resolve_config(g, nullptr, a.baseline);
  const Atree tree = load_model(a.model);
  const Dataset test = load_csv(a.test, a.header).remap_to(tree.label_names);
  if (test.dimension() != tree.dimension) {
    throw ValidationError("test data has dimension " + std::to_string(test.dimension()) +
                          ", model expects " + std::to_string(tree.dimension));
  }
  const EvaluationRecord rec = evaluate(tree, test);

  // Baselines use the tree's own kernel and SVM settings.
  AtreeConfig base_cfg = tree.config;
  base_cfg.svm.seed = run.seed;
  std::optional<BaselineRun> baseline;
  std::optional<EvaluationRecord> reference;
  if (run.baseline != "none") {
    if (a.train.empty()) throw ValidationError("--baseline " + run.baseline + " needs --train");
    const Dataset train = load_csv(a.train, a.header).remap_to(tree.label_names);
    baseline = run_baseline(run.baseline, train, test, base_cfg);
    reference = ova_reference(baseline, train, test, base_cfg);
  }

  std::string csv = kMetricsHeader;
  const auto tree_report = reference ? complexity_report(rec, *reference) : complexity_report(rec);
  csv += metrics_row("atree", format_double(tree.config.delta), tree.config.kernel, tree_report);
  if (baseline) {
    csv += metrics_row(baseline->name, "", tree.config.kernel,
                       complexity_report(baseline->record, *reference));
  }
  emit(a.metrics, csv, out);
  if (!a.trace.empty()) write_text(a.trace, trace_csv(rec, tree));
  if (!g.quiet && !a.metrics.empty()) {
    out << "accuracy " << format_double(tree_report.accuracy) << " mean_evals "
        << format_double(tree_report.mean_classifier_evaluations) << "\n";
  }
}

// ---------------------------------------------------------------- sweep

struct SweepArgs {
  std::string train;
  std::string test;
  std::vector<double> deltas;
  std::vector<int> class_counts;
  std::optional<std::string> baseline;
  std::string out;
  bool header = false;
  TreeOverrides overrides;
};

// Runs `work(i)` for i in [0, count) on up to `jobs` threads. The first
// exception (lowest index) is rethrown after all workers stop.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& work) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        work(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min<std::size_t>(std::max(jobs, 1), std::max<std::size_t>(count, 1));
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

struct SweepEntry {
  double delta = 0.0;
  int classes = 0;
};

void cmd_sweep(const SweepArgs& a, const Globals& g, std::ostream& out) {
  RunConfig run = resolve_config(g, &a.overrides, a.baseline.value_or("ova"));
  if (!a.class_counts.empty() && a.deltas.size() > 1) {
    throw ValidationError("a class-count sweep takes at most one --deltas value");
  }
  if (a.class_counts.empty() && a.deltas.empty()) throw ValidationError("empty delta list");
  const Dataset train_all = load_csv(a.train, a.header);
  const Dataset test_all = load_csv(a.test, a.header).remap_to(train_all.label_names());

  std::vector<SweepEntry> entries;
  if (a.class_counts.empty()) {
    for (double d : a.deltas) entries.push_back({d, train_all.num_classes()});
  } else {
    const double delta = a.deltas.empty() ? 0.6 : a.deltas.front();
    for (int n : a.class_counts) {
      if (n < 2 || n > train_all.num_classes()) {
        throw ValidationError("class count " + std::to_string(n) + " outside [2, " +
                              std::to_string(train_all.num_classes()) + "]");
      }
      entries.push_back({delta, n});
    }
  }
  for (const auto& e : entries) {
    AtreeConfig probe = run.atree;
    probe.delta = e.delta;
    probe.validate();
  }

  // Class subsets and their one-vs-all references, one per distinct count.
  struct Subset {
    Dataset train;
    Dataset test;
    std::optional<BaselineRun> baseline;
    std::optional<EvaluationRecord> reference;
  };
  std::map<int, std::unique_ptr<Subset>> subsets;
  for (const auto& e : entries) {
    if (subsets.count(e.classes)) continue;
    auto s = std::make_unique<Subset>();
    std::vector<int> keep(static_cast<std::size_t>(e.classes));
    for (int k = 0; k < e.classes; ++k) keep[static_cast<std::size_t>(k)] = k;
    s->train = train_all.select_classes(keep).normalized();
    s->test = test_all.select_classes(keep);
    subsets.emplace(e.classes, std::move(s));
  }
  std::vector<int> counts;
  for (const auto& [n, s] : subsets) counts.push_back(n);
  parallel_for(counts.size(), g.jobs, [&](std::size_t i) {
    Subset& s = *subsets.at(counts[i]);
    s.baseline = run_baseline(run.baseline, s.train, s.test, run.atree);
    if (run.baseline != "none") s.reference = ova_reference(s.baseline, s.train, s.test, run.atree);
  });

  std::vector<std::string> rows(entries.size());
  parallel_for(entries.size(), g.jobs, [&](std::size_t i) {
    const SweepEntry& e = entries[i];
    const Subset& s = *subsets.at(e.classes);
    AtreeConfig cfg = run.atree;
    cfg.delta = e.delta;
    try {
      const Atree tree = train_atree(s.train, cfg);
      const EvaluationRecord rec = evaluate(tree, s.test);
      const auto rep = s.reference ? complexity_report(rec, *s.reference) : complexity_report(rec);
      std::ostringstream row;
      row << format_double(e.delta) << "," << e.classes << "," << cfg.kernel.to_string() << ","
          << format_double(rep.accuracy) << "," << format_double(rep.mean_classifier_evaluations)
          << "," << format_double(rep.mean_kernel_computations) << ","
          << (rep.relative_complexity ? format_double(*rep.relative_complexity) : "") << ","
          << tree.depth() << "," << tree.nodes.size() << "\n";
      rows[i] = row.str();
    } catch (const ValidationError& err) {
      throw ValidationError("sweep entry delta=" + format_double(e.delta) +
                            " classes=" + std::to_string(e.classes) + ": " + err.what());
    } catch (const std::exception& err) {
      throw RuntimeError("sweep entry delta=" + format_double(e.delta) +
                         " classes=" + std::to_string(e.classes) + ": " + err.what());
    }
  });

  std::string csv =
      "delta,num_classes,kernel,accuracy,mean_evals,mean_kernel_computations,"
      "relative_complexity,depth,nodes\n";
  for (const auto& r : rows) csv += r;
  emit(a.out, csv, out);
  if (!g.quiet && !a.out.empty()) out << "wrote " << rows.size() << " rows to " << a.out << "\n";
}

// ---------------------------------------------------------------- export-tree

struct ExportArgs {
  std::string model;
  std::string out;
  int max_depth = -1;
};

void cmd_export(const ExportArgs& a, const Globals& g, std::ostream& out) {
  const Atree tree = load_model(a.model);
  emit(a.out, export_dot(tree, a.max_depth), out);
  if (!g.quiet && !a.out.empty()) out << "wrote " << a.out << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Attention-tree classifier: synthesize data, train, evaluate, sweep, export"};
  app.name("atree");
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--seed", g.seed, "Seed for every random choice");
  app.add_option("--jobs", g.jobs, "Worker threads for sweeps")->check(CLI::PositiveNumber);
  app.add_option("--config", g.config_path, "JSON run configuration");
  app.add_flag("--quiet", g.quiet, "Suppress progress output");

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Write a synthetic dataset as CSV");
  s->add_option("kind", synth.kind, "two-cluster-2d or blobs")->required();
  s->add_option("--count", synth.count, "Points (two-cluster-2d)");
  s->add_option("--classes", synth.classes, "Classes (blobs)");
  s->add_option("--per-class", synth.per_class, "Samples per class (blobs)");
  s->add_option("--dim", synth.dim, "Dimension (blobs)");
  s->add_option("--spread", synth.spread, "Noise standard deviation (blobs)");
  s->add_option("--out", synth.out, "Output CSV")->required();
  s->add_option("--train-fraction", synth.train_fraction, "Also split, stratified");
  s->add_option("--test-out", synth.test_out, "Test CSV when splitting");

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Train an attention tree");
  t->add_option("--train", train.train, "Training CSV")->required();
  t->add_option("--model", train.model, "Output model JSON")->required();
  t->add_option("--log", train.log, "Training log path (default: stdout)");
  t->add_flag("--header", train.header, "CSV has a header row");
  t->add_flag("--no-timestamp", train.no_timestamp, "Omit the timestamp line from the log");
  train.overrides.attach(t);

  EvalArgs eval;
  auto* e = app.add_subcommand("eval", "Evaluate a model on a test CSV");
  e->add_option("--model", eval.model, "Model JSON")->required();
  e->add_option("--test", eval.test, "Test CSV")->required();
  e->add_option("--train", eval.train, "Training CSV for the baseline");
  e->add_option("--baseline", eval.baseline, "ova, ovo or none")
      ->check(CLI::IsMember({"ova", "ovo", "none"}));
  e->add_option("--metrics", eval.metrics, "Metrics CSV path (default: stdout)");
  e->add_option("--trace", eval.trace, "Per-instance trace CSV");
  e->add_flag("--header", eval.header, "CSVs have a header row");

  SweepArgs sweep;
  auto* w = app.add_subcommand("sweep", "Accuracy/complexity over deltas or class counts");
  w->add_option("--train", sweep.train, "Training CSV")->required();
  w->add_option("--test", sweep.test, "Test CSV")->required();
  w->add_option("--deltas", sweep.deltas, "Comma-separated deltas")->delimiter(',');
  w->add_option("--classes", sweep.class_counts, "Comma-separated class counts")
      ->delimiter(',');
  w->add_option("--baseline", sweep.baseline, "ova, ovo or none (default ova)")
      ->check(CLI::IsMember({"ova", "ovo", "none"}));
  w->add_option("--out", sweep.out, "Output CSV (default: stdout)");
  w->add_flag("--header", sweep.header, "CSVs have a header row");
  sweep.overrides.attach(w);

  ExportArgs exp;
  auto* x = app.add_subcommand("export-tree", "Write a model as a Graphviz DOT graph");
  x->add_option("--model", exp.model, "Model JSON")->required();
  x->add_option("--out", exp.out, "Output DOT (default: stdout)");
  x->add_option("--max-depth", exp.max_depth, "Render only this many levels");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& pe) {
    if (pe.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << pe.what() << "\n";
    return kExitValidation;
  }

  try {
    if (s->parsed()) cmd_synth(synth, g, out);
    if (t->parsed()) cmd_train(train, g, out);
    if (e->parsed()) cmd_eval(eval, g, out);
    if (w->parsed()) {
      if (w->count("--deltas") > 0 && sweep.deltas.empty()) {
        throw ValidationError("empty delta list");
      }
      if (sweep.deltas.empty() && sweep.class_counts.empty()) {
        sweep.deltas = {0.5, 0.6, 0.7, 0.8, 0.9};
      }
      cmd_sweep(sweep, g, out);
    }
    if (x->parsed()) cmd_export(exp, g, out);
  } catch (const ValidationError& ve) {
    err << "error: " << ve.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace atree::cli
