#include "ifl/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ifl/error.hpp"
#include "ifl/log.hpp"
#include "ifl/parallel.hpp"

namespace ifl {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

json ifl_json(const IflConfig& c) {
  return {{"r", c.r},
          {"k", c.k},
          {"feature_set", c.features.to_string()},
          {"metric_l1", c.metric_l1.to_string()},
          {"metric_l2", c.metric_l2.to_string()},
          {"metric_l3", c.layer3_metric().to_string()},
          {"strategy", c.strategy},
          {"seed", c.seed},
          {"multipliers", c.multipliers},
          {"mean_scope", c.mean_scope == MeanScope::closest_cluster ? "cluster" : "group"},
          {"kmeans_max_iter", c.kmeans_max_iter}};
}

json classifier_json(const ClassifierConfig& c) {
  json j = {{"kind", to_string(c.kind)}};
  switch (c.kind) {
    case ClassifierKind::boosted:
      j["learners"] = c.boost.n_learners;
      j["max_depth"] = c.boost.max_depth;
      j["min_leaf"] = c.boost.min_leaf;
      j["learning_rate"] = c.boost.learning_rate;
      break;
    case ClassifierKind::tree:
      j["max_depth"] = c.tree.max_depth;
      j["min_leaf"] = c.tree.min_leaf;
      j["min_parent"] = c.tree.min_parent;
      break;
    case ClassifierKind::knn:
      j["neighbors"] = c.knn.neighbors;
      j["metric"] = c.knn.metric.to_string();
      j["standardize"] = c.knn.standardize;
      break;
    case ClassifierKind::naive_bayes:
      j["variance_floor"] = c.naive_bayes.variance_floor;
      break;
  }
  return j;
}

std::string method_label(const std::optional<IflConfig>& ifl, const ClassifierConfig& classifier) {
  return ifl ? "ifl+" + to_string(classifier.kind) : to_string(classifier.kind);
}

json fold_json(const FoldResult& f) {
  return {{"fold", f.fold},         {"skipped", f.skipped},      {"note", f.note},
          {"accuracy", f.accuracy}, {"macro_f1", f.macro_f1},    {"seconds", f.seconds},
          {"test_indices", f.test_indices}, {"truth", f.truth}, {"predictions", f.predictions}};
}

json result_json(const EvalResult& r) {
  json folds = json::array();
  for (const auto& f : r.folds) folds.push_back(fold_json(f));
  return {{"schema", "ifl.eval/1"},
          {"dataset", r.dataset},
          {"method", r.method},
          {"num_classes", r.num_classes},
          {"requested_folds", r.requested_folds},
          {"mean_accuracy", r.mean_accuracy},
          {"mean_f1", r.mean_f1},
          {"wall_seconds", r.wall_seconds},
          {"config", json::parse(r.config_json.empty() ? "{}" : r.config_json)},
          {"folds", folds}};
}

EvalResult result_from(const json& j) {
  if (j.value("schema", "") != "ifl.eval/1") throw MalformedInput("eval json: unsupported schema");
  EvalResult r;
  r.dataset = j.at("dataset").get<std::string>();
  r.method = j.at("method").get<std::string>();
  r.num_classes = j.at("num_classes").get<std::size_t>();
  r.requested_folds = j.at("requested_folds").get<std::size_t>();
  r.mean_accuracy = j.at("mean_accuracy").get<double>();
  r.mean_f1 = j.at("mean_f1").get<double>();
  r.wall_seconds = j.at("wall_seconds").get<double>();
  r.config_json = j.at("config").dump();
  for (const auto& f : j.at("folds")) {
    FoldResult fr;
    fr.fold = f.at("fold").get<std::size_t>();
    fr.skipped = f.at("skipped").get<bool>();
    fr.note = f.at("note").get<std::string>();
    fr.accuracy = f.at("accuracy").get<double>();
    fr.macro_f1 = f.at("macro_f1").get<double>();
    fr.seconds = f.at("seconds").get<double>();
    fr.test_indices = f.at("test_indices").get<std::vector<std::size_t>>();
    fr.truth = f.at("truth").get<std::vector<int>>();
    fr.predictions = f.at("predictions").get<std::vector<int>>();
    r.folds.push_back(std::move(fr));
  }
  return r;
}

std::string fixed(double v, int digits = 4) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(digits) << v;
  return ss.str();
}

std::string signed_fixed(double v) { return (v >= 0 ? "+" : "") + fixed(v); }

}  // namespace

Predictions fit_predict(const Dataset& train, const Matrix& test, const std::optional<IflConfig>& ifl,
                        const ClassifierConfig& classifier, bool normalize) {
  Dataset prepared = train;
  Matrix test_rows = test;
  if (normalize) {
    const auto scaler = Standardizer::fit(train.features);
    prepared.features = scaler.transform(train.features);
    if (test_rows.rows() > 0) test_rows = scaler.transform(test_rows);
  }
  if (!ifl) {
    Model model = fit(classifier, prepared.features, prepared.labels, prepared.num_classes());
    return predict(model, test_rows);
  }
  Augmented train_aug = learn_train_features(prepared, *ifl);
  Augmented test_aug = learn_test_features(prepared, test_rows, *ifl);
  Model model = fit(classifier, train_aug.features, prepared.labels, prepared.num_classes());
  return predict(model, test_aug.features);
}

EvalResult cross_validate(const Dataset& dataset, const std::optional<IflConfig>& ifl,
                          const ClassifierConfig& classifier, const EvalOptions& options) {
  if (options.folds < 2) throw InvalidParameter("cross_validate: folds must be >= 2");
  const auto start = Clock::now();
  const FoldPlan plan = stratified_folds(dataset, options.folds, options.seed);
  const std::size_t m = dataset.num_classes();

  EvalResult result;
  result.dataset = dataset.name;
  result.method = options.method.empty() ? method_label(ifl, classifier) : options.method;
  result.num_classes = m;
  result.requested_folds = options.folds;
  json snapshot = {{"classifier", classifier_json(classifier)},
                   {"folds", options.folds},
                   {"seed", options.seed},
                   {"normalize", options.normalize}};
  if (ifl) snapshot["ifl"] = ifl_json(*ifl);
  result.config_json = snapshot.dump();
  result.folds.resize(plan.size());

  std::optional<IflConfig> fold_ifl = ifl;
  if (fold_ifl) fold_ifl->jobs = 1;

  parallel_for(plan.size(), options.jobs, [&](std::size_t j) {
    const auto fold_start = Clock::now();
    FoldResult& fr = result.folds[j];
    fr.fold = j;
    fr.test_indices = plan.folds[j];
    const auto train_idx = plan.complement(j);
    Dataset train = dataset.subset(train_idx);
    std::vector<char> present(m, 0);
    for (int l : train.labels) present[static_cast<std::size_t>(l)] = 1;
    for (std::size_t c = 0; c < m; ++c) {
      if (!present[c]) {
        fr.skipped = true;
        fr.note = "training part lacks class '" + dataset.label_names[c] + "'";
        log::warn("cross_validate: fold " + std::to_string(j + 1) + " skipped: " + fr.note);
        return;
      }
    }
    const Matrix test = dataset.features.select_rows(fr.test_indices);
    for (std::size_t i : fr.test_indices) fr.truth.push_back(dataset.labels[i]);
    Predictions p = fit_predict(train, test, fold_ifl, classifier, options.normalize);
    fr.predictions = std::move(p.labels);
    const Score s = score(fr.predictions, fr.truth, m);
    fr.accuracy = s.accuracy;
    fr.macro_f1 = s.macro_f1;
    fr.seconds = seconds_since(fold_start);
  });

  std::size_t used = 0;
  for (const auto& f : result.folds) {
    if (f.skipped) continue;
    result.mean_accuracy += f.accuracy;
    result.mean_f1 += f.macro_f1;
    ++used;
  }
  if (used > 0) {
    result.mean_accuracy /= static_cast<double>(used);
    result.mean_f1 /= static_cast<double>(used);
  }
  result.wall_seconds = seconds_since(start);
  return result;
}

std::string eval_result_json(const EvalResult& result) { return result_json(result).dump(2); }

EvalResult parse_eval_result_json(const std::string& text) {
  try {
    return result_from(json::parse(text));
  } catch (const json::exception& e) {
    throw MalformedInput(std::string("eval json: ") + e.what());
  }
}

bool verify_eval_result(const EvalResult& result, double tolerance) {
  if (result.folds.size() != result.requested_folds) return false;
  double acc = 0.0, f1 = 0.0;
  std::size_t used = 0;
  for (const auto& f : result.folds) {
    if (f.skipped) continue;
    if (f.truth.size() != f.predictions.size() || f.truth.size() != f.test_indices.size()) return false;
    const Score s = score(f.predictions, f.truth, result.num_classes);
    if (std::abs(s.accuracy - f.accuracy) > tolerance || std::abs(s.macro_f1 - f.macro_f1) > tolerance) return false;
    acc += s.accuracy;
    f1 += s.macro_f1;
    ++used;
  }
  if (used == 0) return true;
  return std::abs(acc / static_cast<double>(used) - result.mean_accuracy) <= tolerance &&
         std::abs(f1 / static_cast<double>(used) - result.mean_f1) <= tolerance;
}

ReportRow evaluate_config(const RunConfig& config, const ReproduceOptions& options) {
  ReportRow row;
  row.dataset = config.name;
  row.reference = config.reference;
  const auto start = Clock::now();
  if (!std::filesystem::exists(config.data)) {
    row.note = "skipped: dataset file '" + config.data.string() + "' not found";
    log::warn(config.name + ": " + row.note);
    return row;
  }
  Dataset data = load_csv(config.data, config.csv);
  data.name = config.name;
  const std::uint64_t seed = options.seed.value_or(config.seed);
  IflConfig ifl = config.ifl;
  ifl.seed = seed;
  EvalOptions eo{config.outer_folds, seed, config.normalize, options.jobs, {}};

  const auto wanted = [&](const std::string& method) {
    return options.methods.empty() ||
           std::find(options.methods.begin(), options.methods.end(), method) != options.methods.end();
  };
  for (const auto& method : report_methods()) {
    if (!wanted(method)) continue;
    ClassifierConfig clf = config.classifier;
    std::optional<IflConfig> with_ifl;
    if (method == "naive_bayes") clf.kind = ClassifierKind::naive_bayes;
    else if (method == "knn") clf.kind = ClassifierKind::knn;
    else if (method == "tree") clf.kind = ClassifierKind::tree;
    else if (method == "ensemble") clf.kind = ClassifierKind::boosted;
    else with_ifl = ifl;
    eo.method = method;
    log::info(config.name + ": running " + method);
    row.results.emplace(method, cross_validate(data, with_ifl, clf, eo));
  }
  row.wall_seconds = seconds_since(start);
  return row;
}

Report reproduce(const std::filesystem::path& config_dir, const std::filesystem::path& output_path,
                 const ReproduceOptions& options) {
  const auto start = Clock::now();
  Report report;
  if (!std::filesystem::is_directory(config_dir))
    throw InvalidParameter("reproduce: '" + config_dir.string() + "' is not a directory");
  std::vector<std::filesystem::path> configs;
  for (const auto& entry : std::filesystem::directory_iterator(config_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".toml") configs.push_back(entry.path());
  std::sort(configs.begin(), configs.end());
  if (configs.empty()) {
    report.warnings.push_back("no *.toml configs found in '" + config_dir.string() + "'");
    log::warn(report.warnings.back());
  }
  for (const auto& path : configs) {
    RunConfig cfg = RunConfig::load(path);
    if (!options.only.empty() && std::find(options.only.begin(), options.only.end(), cfg.name) == options.only.end())
      continue;
    ReportRow row = evaluate_config(cfg, options);
    row.config = path;
    if (!row.note.empty()) report.warnings.push_back(cfg.name + ": " + row.note);
    report.rows.push_back(std::move(row));
  }
  report.total_seconds = seconds_since(start);

  if (!output_path.empty()) {
    std::ofstream md(output_path);
    if (!md) throw InvalidParameter("cannot write '" + output_path.string() + "'");
    md << report_markdown(report);
    auto json_path = output_path;
    json_path.replace_extension(".json");
    std::ofstream js(json_path);
    js << report_json(report);
  }
  return report;
}

std::string report_markdown(const Report& report) {
  static const std::map<std::string, std::string> titles = {{"naive_bayes", "Naive Bayes"},
                                                            {"knn", "KNN"},
                                                            {"tree", "Decision Tree"},
                                                            {"ensemble", "Ensemble"},
                                                            {"ifl", "Inverse Feature Learning"}};
  std::ostringstream out;
  out << "# Accuracy and macro-F1 per dataset\n\n";
  out << "| # | Dataset |";
  for (const auto& m : report_methods()) out << ' ' << titles.at(m) << " F1 | " << titles.at(m) << " Acc |";
  out << "\n|---|---|";
  for (std::size_t i = 0; i < report_methods().size(); ++i) out << "---|---|";
  out << '\n';
  std::size_t idx = 0;
  for (const auto& row : report.rows) {
    out << "| " << ++idx << " | " << row.dataset << " |";
    for (const auto& m : report_methods()) {
      auto it = row.results.find(m);
      if (it == row.results.end()) out << " - | - |";
      else out << ' ' << fixed(it->second.mean_f1) << " | " << fixed(it->second.mean_accuracy) << " |";
    }
    out << '\n';
  }

  out << "\n## Comparison with reference values\n\n";
  out << "| Dataset | Method | Acc | Ref Acc | Delta Acc | F1 | Ref F1 | Delta F1 |\n";
  out << "|---|---|---|---|---|---|---|---|\n";
  for (const auto& row : report.rows) {
    for (const auto& m : report_methods()) {
      auto it = row.results.find(m);
      if (it == row.results.end()) continue;
      const auto& r = it->second;
      auto ra = row.reference.find(m + "_accuracy");
      auto rf = row.reference.find(m + "_f1");
      out << "| " << row.dataset << " | " << titles.at(m) << " | " << fixed(r.mean_accuracy) << " | "
          << (ra != row.reference.end() ? fixed(ra->second) : "-") << " | "
          << (ra != row.reference.end() ? signed_fixed(r.mean_accuracy - ra->second) : "-") << " | "
          << fixed(r.mean_f1) << " | " << (rf != row.reference.end() ? fixed(rf->second) : "-") << " | "
          << (rf != row.reference.end() ? signed_fixed(r.mean_f1 - rf->second) : "-") << " |\n";
    }
  }

  out << "\n## Run notes\n\n";
  for (const auto& row : report.rows)
    out << "- " << row.dataset << ": " << (row.note.empty() ? "ok" : row.note) << ", " << fixed(row.wall_seconds, 1)
        << " s\n";
  for (const auto& w : report.warnings) out << "- warning: " << w << '\n';
  out << "\nTotal wall time: " << fixed(report.total_seconds, 1) << " s\n";
  return out.str();
}

std::string report_json(const Report& report) {
  json rows = json::array();
  for (const auto& row : report.rows) {
    json results = json::object();
    for (const auto& [method, r] : row.results) results[method] = result_json(r);
    rows.push_back({{"dataset", row.dataset},
                    {"config", row.config.string()},
                    {"note", row.note},
                    {"wall_seconds", row.wall_seconds},
                    {"reference", row.reference},
                    {"results", results}});
  }
  return json{{"schema", "ifl.report/1"}, {"total_seconds", report.total_seconds}, {"warnings", report.warnings},
              {"rows", rows}}
      .dump(2);
}

}  // namespace ifl
