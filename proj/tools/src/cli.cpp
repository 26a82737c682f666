#include "ifl_cli/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "ifl/error.hpp"
#include "ifl/eval.hpp"
#include "ifl/log.hpp"
#include "ifl/run_config.hpp"

namespace ifl::cli {
namespace {

struct Common {
  std::string data;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 0;
  std::optional<int> strategy;
  bool normalize = false;
};

void add_common(CLI::App* cmd, Common& c, bool data_flags = true) {
  if (data_flags) {
    cmd->add_option("--data", c.data, "Training CSV (label in the last column unless the config says otherwise)");
    cmd->add_option("--config", c.config, "Run config (.toml)");
  }
  cmd->add_option("--seed", c.seed, "Seed for every random choice (default 42, or the config's seed)");
  cmd->add_option("--jobs", c.jobs, "Worker threads; 0 = one per logical core")->capture_default_str();
  cmd->add_option("--strategy", c.strategy, "Error generation strategy")->check(CLI::IsMember({1, 2}));
  cmd->add_flag("--normalize", c.normalize, "Z-score features with training statistics");
}

// Config from --config (or defaults), with command-line overrides applied.
RunConfig resolve(const Common& c) {
  RunConfig cfg = c.config.empty() ? RunConfig{} : RunConfig::load(c.config);
  if (!c.data.empty()) cfg.data = c.data;
  if (cfg.data.empty()) throw InvalidParameter("no dataset: pass --data or a config with a data entry");
  if (c.seed) cfg.set_seed(*c.seed);
  if (c.strategy) cfg.ifl.strategy = *c.strategy;
  if (c.normalize) cfg.normalize = true;
  cfg.ifl.jobs = c.jobs;
  if (cfg.name.empty()) cfg.name = cfg.data.stem().string();
  return cfg;
}

Dataset load(const std::filesystem::path& path, const RunConfig& cfg) {
  Dataset d = load_csv(path, cfg.csv);
  if (d.name.empty()) d.name = cfg.name;
  return d;
}

// Re-indexes `rows` labels by name into the training label dictionary.
std::vector<int> labels_in(const Dataset& rows, const Dataset& train) {
  std::map<std::string, int> index;
  for (std::size_t c = 0; c < train.label_names.size(); ++c) index[train.label_names[c]] = static_cast<int>(c);
  std::vector<int> out;
  out.reserve(rows.size());
  for (int l : rows.labels) {
    const auto& name = rows.label_names[static_cast<std::size_t>(l)];
    auto it = index.find(name);
    if (it == index.end()) throw ValidationError("test label '" + name + "' does not occur in the training data");
    out.push_back(it->second);
  }
  return out;
}

std::vector<std::string> label_strings(const Dataset& d) {
  std::vector<std::string> out;
  out.reserve(d.size());
  for (int l : d.labels) out.push_back(d.label_names[static_cast<std::size_t>(l)]);
  return out;
}

std::string format(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidParameter("cannot write '" + path.string() + "'");
  out << text;
}

int augment(const Common& c, const std::string& out_path, const std::string& test_path,
            const std::string& test_out, std::ostream& out) {
  if (!test_path.empty() && test_out.empty()) throw InvalidParameter("--test needs --test-out");
  const RunConfig cfg = resolve(c);
  Dataset train = load(cfg.data, cfg);
  std::optional<Dataset> test;
  if (!test_path.empty()) test = load(test_path, cfg);
  if (cfg.normalize) {
    const auto scaler = Standardizer::fit(train.features);
    train.features = scaler.transform(train.features);
    if (test) test->features = scaler.transform(test->features);
  }

  const Augmented aug = learn_train_features(train, cfg.ifl);
  write_matrix_csv(out_path, aug.features, aug.column_names, label_strings(train));
  out << "wrote " << out_path << ": " << aug.features.rows() << " rows x " << aug.features.cols() << " features\n";
  if (test) {
    const Augmented taug = learn_test_features(train, test->features, cfg.ifl);
    write_matrix_csv(test_out, taug.features, taug.column_names, label_strings(*test));
    out << "wrote " << test_out << ": " << taug.features.rows() << " rows x " << taug.features.cols()
        << " features\n";
  }
  return 0;
}

std::optional<IflConfig> method_setup(const std::string& method, const RunConfig& cfg, ClassifierConfig& clf) {
  clf = cfg.classifier;
  if (method == "ifl") return cfg.ifl;
  if (method == "naive_bayes") clf.kind = ClassifierKind::naive_bayes;
  else if (method == "knn") clf.kind = ClassifierKind::knn;
  else if (method == "tree") clf.kind = ClassifierKind::tree;
  else if (method == "ensemble") clf.kind = ClassifierKind::boosted;
  else if (method != "raw") throw InvalidParameter("unknown method '" + method + "'");
  return std::nullopt;
}

int evaluate(const Common& c, const std::string& method, const std::string& test_path, std::size_t folds,
             const std::string& out_path, std::ostream& out) {
  const RunConfig cfg = resolve(c);
  const Dataset data = load(cfg.data, cfg);
  ClassifierConfig clf;
  const std::optional<IflConfig> ifl = method_setup(method, cfg, clf);

  EvalResult result;
  if (!test_path.empty()) {
    const Dataset test = load(test_path, cfg);
    const auto start = std::chrono::steady_clock::now();
    const Predictions p = fit_predict(data, test.features, ifl, clf, cfg.normalize);
    FoldResult fold;
    fold.truth = labels_in(test, data);
    fold.predictions = p.labels;
    for (std::size_t i = 0; i < test.size(); ++i) fold.test_indices.push_back(i);
    const Score s = score(fold.predictions, fold.truth, data.num_classes());
    fold.accuracy = s.accuracy;
    fold.macro_f1 = s.macro_f1;
    result.dataset = cfg.name;
    result.method = method;
    result.num_classes = data.num_classes();
    result.requested_folds = 1;
    result.mean_accuracy = s.accuracy;
    result.mean_f1 = s.macro_f1;
    result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    fold.seconds = result.wall_seconds;
    result.folds.push_back(std::move(fold));
  } else {
    EvalOptions eo{folds ? folds : cfg.outer_folds, cfg.seed, cfg.normalize, c.jobs, method};
    result = cross_validate(data, ifl, clf, eo);
    result.dataset = cfg.name;
  }
  out << result.dataset << " " << result.method << " accuracy " << format(result.mean_accuracy) << " macro_f1 "
      << format(result.mean_f1) << "\n";
  for (const auto& f : result.folds)
    if (f.skipped) out << "fold " << f.fold + 1 << " skipped: " << f.note << "\n";
  if (!out_path.empty()) write_text(out_path, eval_result_json(result) + "\n");
  return 0;
}

int reproduce_cmd(const Common& c, const std::string& configs, const std::string& out_path,
                  const std::vector<std::string>& only, const std::vector<std::string>& methods, std::ostream& out) {
  if (c.strategy || c.normalize)
    throw InvalidParameter("reproduce takes --strategy and --normalize from each config file");
  ReproduceOptions opts;
  opts.seed = c.seed;
  opts.jobs = c.jobs;
  opts.only = only;
  opts.methods = methods;
  for (const auto& m : methods)
    if (std::find(report_methods().begin(), report_methods().end(), m) == report_methods().end())
      throw InvalidParameter("unknown method '" + m + "'");
  const Report report = reproduce(configs, out_path, opts);
  out << "wrote " << out_path << ": " << report.rows.size() << " dataset row(s), " << format(report.total_seconds)
      << " s\n";
  for (const auto& w : report.warnings) out << "warning: " << w << "\n";
  return 0;
}

int bench(const Common& c, std::size_t rows, std::size_t repeats, std::ostream& out) {
  const RunConfig cfg = resolve(c);
  const Dataset data = load(cfg.data, cfg);
  const ScalingResult r = scaling_bench(data, cfg.ifl, rows, repeats, cfg.seed);
  out << "rows " << r.rows << " seconds " << format(r.seconds_n) << "\n";
  out << "rows " << 2 * r.rows << " seconds " << format(r.seconds_2n) << "\n";
  out << "ratio " << format(r.ratio()) << "\n";
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  log::init_from_env();
  CLI::App app{"Inverse feature learning: learned error features for tabular classification", "ifl"};
  app.require_subcommand(1);

  Common common;
  std::string out_path, test_path, test_out, configs_dir, method = "ifl";
  std::size_t folds = 0, rows = 0, repeats = 3;
  std::vector<std::string> only, methods;

  auto* aug = app.add_subcommand("augment", "Write training (and optional test) CSVs with learned features");
  add_common(aug, common);
  aug->add_option("--out", out_path, "Augmented training CSV")->required();
  aug->add_option("--test", test_path, "Test CSV to augment with models from the full training set");
  aug->add_option("--test-out", test_out, "Augmented test CSV");

  auto* ev = app.add_subcommand("evaluate", "Cross-validate one dataset and print accuracy and macro-F1");
  add_common(ev, common);
  ev->add_option("--method", method, "ifl, naive_bayes, knn, tree, ensemble or raw (config classifier on raw features)")
      ->capture_default_str();
  ev->add_option("--test", test_path, "Hold-out test CSV instead of cross-validation");
  ev->add_option("--folds", folds, "Outer folds (default: the config's outer_folds)");
  ev->add_option("--out", out_path, "Results JSON with per-fold predictions");

  auto* rep = app.add_subcommand("reproduce", "Run every config in a directory and write a Markdown report");
  add_common(rep, common, false);
  rep->add_option("--configs", configs_dir, "Directory of .toml configs")->required();
  rep->add_option("--out", out_path, "Markdown report path (JSON detail is written next to it)")->required();
  rep->add_option("--only", only, "Dataset names to run")->delimiter(',');
  rep->add_option("--methods", methods, "Subset of naive_bayes,knn,tree,ensemble,ifl")->delimiter(',');

  auto* be = app.add_subcommand("bench", "Time train-phase feature learning on n and 2n rows");
  add_common(be, common);
  be->add_option("--rows", rows, "n (default: half the dataset)");
  be->add_option("--repeats", repeats, "Runs averaged per size")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (*aug) return augment(common, out_path, test_path, test_out, out);
    if (*ev) return evaluate(common, method, test_path, folds, out_path, out);
    if (*rep) return reproduce_cmd(common, configs_dir, out_path, only, methods, out);
    if (*be) return bench(common, rows, repeats, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace ifl::cli
