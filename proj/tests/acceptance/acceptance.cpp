// Acceptance run: one PASS/FAIL line per criterion, indented detail lines
// beneath. Exit status is 0 only when every criterion passes.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ifl/eval.hpp"
#include "ifl/kmeans.hpp"
#include "ifl/log.hpp"
#include "ifl/run_config.hpp"
#include "ifl_cli/cli.hpp"
#include "naive_oracle.hpp"
#include "random_cases.hpp"

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

constexpr double kOracleSeconds = 30.0;
constexpr double kInvariantSeconds = 60.0;
constexpr std::size_t kMinInvariantCases = 1000;
constexpr double kBaselineTolerance = 0.05;
constexpr double kIflTolerance = 0.05;
constexpr double kRawMargin = 0.01;
constexpr std::size_t kMinDatasets = 6;
constexpr double kSmallDatasetSeconds = 120.0;
constexpr double kLargeDatasetSeconds = 1200.0;
constexpr double kScalingRatio = 2.6;
constexpr double kDeepBaselineSegment = 0.9579;

const std::vector<std::string> kAllDatasets = {"Cryotherapy", "Heart",    "Segment", "Glass", "Magic",
                                               "Diabetes",    "Ionosphere", "Spam",  "Credit"};
const std::vector<std::string> kBaselineDatasets = {"Cryotherapy", "Heart", "Ionosphere", "Diabetes"};
const std::vector<std::string> kBaselineMethods = {"naive_bayes", "knn", "tree", "ensemble"};

double since(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

struct Verdict {
  int id;
  std::string title;
  bool pass;
  std::string summary;
};

std::vector<Verdict> verdicts;

void report(int id, const std::string& title, bool pass, const std::string& summary) {
  std::cout << (pass ? "PASS" : "FAIL") << "  criterion " << id << " " << title << ": " << summary << std::endl;
  verdicts.push_back({id, title, pass, summary});
}

void detail(const std::string& line) { std::cout << "      " << line << "\n"; }

bool identical(const ifl::Matrix& a, const ifl::Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (a(i, j) != b(i, j)) return false;
  return true;
}

// ---------------------------------------------------------------------------

void oracle_equivalence(std::size_t trials) {
  const auto start = Clock::now();
  std::mt19937_64 rng(20240611);
  std::size_t matched = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    const ifl::IflConfig cfg = ifl::testing::random_config(rng);
    const ifl::Dataset d = ifl::testing::random_dataset(rng, cfg.r);
    const auto plan = ifl::stratified_folds(d, cfg.r, cfg.seed);
    const ifl::Dataset probe = ifl::testing::make_blobs(5, d.width(), 2, 1.5, rng());
    const bool train_ok =
        identical(ifl::learn_train_features(d, plan, cfg).features, ifl::oracle::train_features(d, plan, cfg));
    const bool test_ok = identical(ifl::learn_test_features(d, probe.features, cfg).features,
                                   ifl::oracle::test_features(d, probe.features, cfg));
    if (train_ok && test_ok) ++matched;
    else
      detail("mismatch on dataset " + std::to_string(t) + " (n=" + std::to_string(d.size()) + ", strategy " +
             std::to_string(cfg.strategy) + ", features " + cfg.features.to_string() + ")");
  }
  const double secs = since(start);
  report(1, "oracle equivalence", matched == trials && trials >= 20 && secs < kOracleSeconds,
         std::to_string(matched) + "/" + std::to_string(trials) +
             " random datasets bit-identical in both phases, " + fmt("%.2f s", secs) + " (limit 30 s)");
}

// ---------------------------------------------------------------------------

struct Tally {
  std::size_t cases = 0;
  std::size_t failures = 0;
  void check(bool ok) {
    ++cases;
    failures += ok ? 0 : 1;
  }
};

Tally confidence_normalization(std::mt19937_64& rng, std::size_t trials) {
  Tally t;
  for (std::size_t i = 0; i < trials; ++i) {
    ifl::IflConfig cfg = ifl::testing::random_config(rng);
    cfg.k = 1 + rng() % 6;
    const std::size_t s = 1 + rng() % 25;
    const ifl::Dataset d = ifl::testing::make_blobs(std::max<std::size_t>(s + 1, 4), 2, 2, 1.0, rng());
    std::vector<std::size_t> idx(s);
    for (std::size_t j = 0; j < s; ++j) idx[j] = j;
    const ifl::Matrix rows = d.features.select_rows(idx);
    const auto model = ifl::build_class_model(rows, 0, cfg, rng());
    double before = 0.0;
    for (const auto& c : model.clusters) before += c.confidence;
    const auto last = d.features.row(d.size() - 1);
    const std::vector<double> x(last.begin(), last.end());
    const auto out = cfg.strategy == 1 ? ifl::trial_strategy1(model, rows, x, cfg)
                                       : ifl::trial_strategy2(rows, x, 0, cfg, rng());
    double after = 0.0;
    for (const auto& c : out.updated_clusters) after += c.confidence;
    t.check(std::abs(before - 1.0) <= 1e-9 && std::abs(after - 1.0) <= 1e-9);
  }
  return t;
}

Tally dimension_formula(std::mt19937_64& rng, std::size_t trials) {
  Tally t;
  for (std::size_t i = 0; i < trials; ++i) {
    const ifl::IflConfig cfg = ifl::testing::random_config(rng);
    const ifl::Dataset d = ifl::testing::random_dataset(rng, cfg.r);
    const auto aug = ifl::learn_train_features(d, cfg);
    // Per-class block: 1.0, 1.1, 2.1 contribute 1 each; the other five contribute k each.
    std::size_t per_class = 0;
    for (std::size_t f = 0; f < ifl::kFeatureCount; ++f) {
      const auto feature = static_cast<ifl::Feature>(f);
      if (cfg.features.contains(feature)) per_class += ifl::is_per_cluster(feature) ? cfg.k : 1;
    }
    t.check(aug.features.cols() == d.width() + d.num_classes() * per_class &&
            aug.column_names.size() == aug.features.cols());
  }
  return t;
}

Tally single_cluster_delta(std::mt19937_64& rng, std::size_t trials) {
  Tally t;
  std::normal_distribution<double> spread(0.0, 3.0);
  for (std::size_t i = 0; i < trials; ++i) {
    ifl::IflConfig cfg = ifl::testing::random_config(rng);
    cfg.k = 1 + rng() % 5;
    const ifl::Dataset d = ifl::testing::make_blobs(2 + rng() % 30, 1 + rng() % 3, 2, 1.0, rng());
    const auto model = ifl::build_class_model(d.features, 0, cfg, rng());
    std::vector<double> x(d.width());
    for (auto& v : x) v = spread(rng);
    const auto out = ifl::trial_strategy1(model, d.features, x, cfg);
    std::size_t changed = 0;
    for (const auto& before : model.clusters) {
      const bool kept = std::any_of(out.updated_clusters.begin(), out.updated_clusters.end(), [&](const auto& c) {
        return c.members == before.members && c.centroid == before.centroid && c.mean == before.mean;
      });
      changed += kept ? 0 : 1;
    }
    auto grown = model.clusters[out.source_index].members;
    grown.push_back(d.size());
    t.check(changed == 1 && out.updated_clusters[out.closest_index].members == grown);
  }
  return t;
}

Tally kmeans_monotone(std::mt19937_64& rng, std::size_t trials) {
  Tally t;
  for (std::size_t i = 0; i < trials; ++i) {
    const ifl::Dataset d = ifl::testing::make_blobs(5 + rng() % 80, 1 + rng() % 5, 2 + rng() % 3, 1.0, rng());
    const auto result = ifl::kmeans(d.features, 1 + rng() % 6, ifl::Metric::euclidean(), rng());
    bool ok = !result.objective_trace.empty();
    for (std::size_t s = 1; s < result.objective_trace.size(); ++s)
      ok = ok && result.objective_trace[s] <= result.objective_trace[s - 1] * (1.0 + 1e-12) + 1e-12;
    t.check(ok);
  }
  return t;
}

Tally seed_determinism(std::mt19937_64& rng, std::size_t trials) {
  Tally t;
  for (std::size_t i = 0; i < trials; ++i) {
    ifl::IflConfig cfg = ifl::testing::random_config(rng);
    const ifl::Dataset d = ifl::testing::random_dataset(rng, cfg.r);
    const auto a = ifl::learn_train_features(d, cfg).features;
    const auto b = ifl::learn_train_features(d, cfg).features;
    cfg.jobs = 3;
    const auto c = ifl::learn_train_features(d, cfg).features;
    t.check(identical(a, b) && identical(a, c));
  }
  return t;
}

Tally label_blindness(std::mt19937_64& rng, std::size_t trials) {
  Tally t;
  for (std::size_t i = 0; i < trials; ++i) {
    const ifl::IflConfig cfg = ifl::testing::random_config(rng);
    const ifl::Dataset d = ifl::testing::random_dataset(rng, cfg.r);
    const auto plan = ifl::stratified_folds(d, cfg.r, cfg.seed);
    const auto base = ifl::learn_train_features(d, plan, cfg).features;
    const std::size_t j = rng() % plan.size();
    ifl::Dataset relabelled = d;
    for (std::size_t r : plan.folds[j]) relabelled.labels[r] = static_cast<int>(rng() % d.num_classes());
    const auto again = ifl::learn_train_features(relabelled, plan, cfg).features;
    bool ok = true;
    for (std::size_t r : plan.folds[j])
      for (std::size_t c = 0; c < base.cols(); ++c) ok = ok && base(r, c) == again(r, c);
    t.check(ok);
  }
  return t;
}

void invariant_suite(std::size_t scale) {
  const auto start = Clock::now();
  std::mt19937_64 rng(77);
  const std::vector<std::pair<std::string, Tally>> parts = {
      {"confidence normalization", confidence_normalization(rng, 300 * scale)},
      {"dimension formula", dimension_formula(rng, 200 * scale)},
      {"strategy-1 single-cluster delta", single_cluster_delta(rng, 300 * scale)},
      {"k-means objective monotone", kmeans_monotone(rng, 200 * scale)},
      {"seed determinism", seed_determinism(rng, 100 * scale)},
      {"train-phase label blindness", label_blindness(rng, 100 * scale)},
  };
  std::size_t cases = 0, failures = 0;
  for (const auto& [name, tally] : parts) {
    detail(name + ": " + std::to_string(tally.cases - tally.failures) + "/" + std::to_string(tally.cases));
    cases += tally.cases;
    failures += tally.failures;
  }
  const double secs = since(start);
  report(2, "invariant suite", failures == 0 && cases >= kMinInvariantCases && secs < kInvariantSeconds,
         std::to_string(cases) + " randomized cases, " + std::to_string(failures) + " violations, " +
             fmt("%.2f s", secs) + " (limit 60 s)");
}

// ---------------------------------------------------------------------------

struct DatasetRun {
  bool available = false;
  std::string note;
  ifl::RunConfig config;
  ifl::ReportRow row;
};

std::map<std::string, DatasetRun> run_datasets(const fs::path& config_dir, std::size_t jobs) {
  std::map<std::string, DatasetRun> runs;
  for (const auto& entry : fs::directory_iterator(config_dir)) {
    if (entry.path().extension() != ".toml") continue;
    DatasetRun run;
    run.config = ifl::RunConfig::load(entry.path());
    const std::string& name = run.config.name;
    if (!fs::exists(run.config.data)) {
      run.note = "data file " + run.config.data.lexically_normal().string() + " not present";
      runs[name] = std::move(run);
      continue;
    }
    ifl::ReproduceOptions options;
    options.jobs = jobs;
    const bool baseline = std::find(kBaselineDatasets.begin(), kBaselineDatasets.end(), name) != kBaselineDatasets.end();
    options.methods = baseline ? ifl::report_methods() : std::vector<std::string>{"ensemble", "ifl"};
    run.row = ifl::evaluate_config(run.config, options);
    run.available = run.row.note.empty();
    run.note = run.row.note;
    std::cout << "      ran " << name << " (" << fmt("%.1f s", run.row.wall_seconds) << ")" << std::endl;
    runs[name] = std::move(run);
  }
  return runs;
}

void baseline_sanity(const std::map<std::string, DatasetRun>& runs) {
  std::size_t within = 0, cells = 0;
  std::vector<std::string> missing;
  for (const auto& name : kBaselineDatasets) {
    const auto it = runs.find(name);
    if (it == runs.end() || !it->second.available) {
      missing.push_back(name);
      detail(name + ": not evaluated (" + (it == runs.end() ? "no config" : it->second.note) + ")");
      cells += kBaselineMethods.size();
      continue;
    }
    const auto& row = it->second.row;
    std::string line = name + ":";
    for (const auto& method : kBaselineMethods) {
      ++cells;
      const double ours = row.results.at(method).mean_accuracy;
      const double target = row.reference.at(method + "_accuracy");
      const bool ok = std::abs(ours - target) <= kBaselineTolerance;
      within += ok ? 1 : 0;
      line += " " + method + " " + fmt("%.4f", ours) + " vs " + fmt("%.4f", target) + (ok ? "" : " (out)");
    }
    detail(line);
  }
  std::string summary = std::to_string(within) + "/" + std::to_string(cells) + " accuracy cells within ±0.05";
  if (!missing.empty()) {
    summary += "; not evaluated:";
    for (const auto& m : missing) summary += " " + m;
  }
  report(3, "baseline sanity", within == cells, summary);
}

void ifl_reproduction(const std::map<std::string, DatasetRun>& runs) {
  std::size_t within = 0, not_worse = 0;
  bool timely = true;
  std::vector<std::string> missing;
  for (const auto& name : kAllDatasets) {
    const auto it = runs.find(name);
    if (it == runs.end() || !it->second.available) {
      missing.push_back(name);
      detail(name + ": not evaluated (" + (it == runs.end() ? "no config" : it->second.note) + ")");
      continue;
    }
    const auto& row = it->second.row;
    const auto& ifl = row.results.at("ifl");
    const double raw = row.results.at("ensemble").mean_accuracy;
    const double target = row.reference.at("ifl_accuracy");
    const bool close = std::abs(ifl.mean_accuracy - target) <= kIflTolerance;
    const bool holds = ifl.mean_accuracy >= raw - kRawMargin;
    const double limit = (name == "Magic" || name == "Credit") ? kLargeDatasetSeconds : kSmallDatasetSeconds;
    const bool fast = ifl.wall_seconds < limit;
    within += close ? 1 : 0;
    not_worse += holds ? 1 : 0;
    timely = timely && fast;
    detail(name + ": ifl " + fmt("%.4f", ifl.mean_accuracy) + " vs " + fmt("%.4f", target) +
           (close ? "" : " (out)") + "; raw boosted " + fmt("%.4f", raw) + (holds ? "" : " (ifl below raw - 0.01)") +
           "; " + fmt("%.1f s", ifl.wall_seconds) + (fast ? "" : " (over limit)"));
  }
  std::string summary = "within ±0.05 on " + std::to_string(within) + "/9, ifl >= raw - 0.01 on " +
                        std::to_string(not_worse) + "/9 (need 6 each), runtime limits " +
                        (timely ? "met" : "exceeded");
  if (!missing.empty()) {
    summary += "; not evaluated:";
    for (const auto& m : missing) summary += " " + m;
  }
  report(4, "IFL reproduction", within >= kMinDatasets && not_worse >= kMinDatasets && timely, summary);
}

void linear_scaling(const std::map<std::string, DatasetRun>& runs) {
  const auto it = runs.find("Magic");
  if (it == runs.end() || !fs::exists(it->second.config.data)) {
    report(5, "linear scaling", false, "Magic data not present");
    return;
  }
  const auto& cfg = it->second.config;
  const ifl::Dataset data = ifl::load_csv(cfg.data, cfg.csv);
  ifl::IflConfig ifl = cfg.ifl;
  ifl.jobs = 1;
  const auto r = ifl::cli::scaling_bench(data, ifl, 0, 3, cfg.seed);
  report(5, "linear scaling", r.ratio() < kScalingRatio,
         "Magic " + std::to_string(r.rows) + " rows " + fmt("%.2f s", r.seconds_n) + ", " +
             std::to_string(2 * r.rows) + " rows " + fmt("%.2f s", r.seconds_2n) + ", ratio " +
             fmt("%.3f", r.ratio()) + " (limit 2.6, mean of 3 runs, single thread)");
}

void segment_context(const std::map<std::string, DatasetRun>& runs) {
  const auto it = runs.find("Segment");
  if (it == runs.end() || !it->second.available) {
    report(6, "Segment context (informational)", false, "Segment not evaluated");
    return;
  }
  const double ours = it->second.row.results.at("ifl").mean_accuracy;
  const double target = it->second.row.reference.at("ifl_accuracy");
  report(6, "Segment context (informational)", true,
         "ifl " + fmt("%.4f", ours) + ", published ifl " + fmt("%.4f", target) + ", best deep baseline " +
             fmt("%.4f", kDeepBaselineSegment) + "; ours " + (ours > kDeepBaselineSegment ? "exceeds" : "trails") +
             " the deep baseline");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria for the inverse feature learning implementation", "acceptance"};
  std::string configs = (fs::path(IFL_SOURCE_DIR) / "configs").string();
  std::size_t jobs = 0, oracle_trials = 40, invariant_scale = 1;
  bool skip_datasets = false;
  app.add_option("--configs", configs, "Directory of dataset configs")->capture_default_str();
  app.add_option("--jobs", jobs, "Worker threads for dataset runs; 0 = one per logical core")->capture_default_str();
  app.add_option("--oracle-trials", oracle_trials, "Random datasets compared with the oracle")->capture_default_str();
  app.add_option("--invariant-scale", invariant_scale, "Multiplier on invariant case counts")->capture_default_str();
  app.add_flag("--skip-datasets", skip_datasets, "Run only the synthetic criteria");
  CLI11_PARSE(app, argc, argv);
  // Degenerate random cases warn by design; IFL_LOG still overrides.
  ifl::log::set_level(ifl::log::Level::error);
  ifl::log::init_from_env();

  oracle_equivalence(oracle_trials);
  invariant_suite(invariant_scale);
  if (!skip_datasets) {
    const auto runs = run_datasets(configs, jobs);
    baseline_sanity(runs);
    ifl_reproduction(runs);
    linear_scaling(runs);
    segment_context(runs);
  }

  std::size_t passed = 0;
  for (const auto& v : verdicts) passed += v.pass ? 1 : 0;
  std::cout << passed << "/" << verdicts.size() << " criteria passed" << std::endl;
  return passed == verdicts.size() ? 0 : 1;
}
