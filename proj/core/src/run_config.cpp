#include "ifl/run_config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

#include "ifl/error.hpp"

namespace ifl {
namespace {

struct Value {
  std::string raw;
  std::size_t line = 0;
};

std::string_view strip(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Drops a trailing comment that is not inside a quoted string.
std::string_view drop_comment(std::string_view s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

[[noreturn]] void fail(const Value& v, const std::string& key, const std::string& what) {
  throw ValidationError("config line " + std::to_string(v.line) + " (" + key + "): " + what);
}

std::string as_string(const Value& v, const std::string& key) {
  std::string_view s = strip(v.raw);
  if (s.size() < 2 || s.front() != '"' || s.back() != '"') fail(v, key, "expected a quoted string");
  return std::string(s.substr(1, s.size() - 2));
}

double as_double(const Value& v, const std::string& key) {
  std::string_view s = strip(v.raw);
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || ptr != s.data() + s.size()) fail(v, key, "expected a number");
  return out;
}

long long as_int(const Value& v, const std::string& key) {
  std::string_view s = strip(v.raw);
  long long out = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || ptr != s.data() + s.size()) fail(v, key, "expected an integer");
  return out;
}

std::size_t as_count(const Value& v, const std::string& key) {
  const long long n = as_int(v, key);
  if (n < 0) fail(v, key, "expected a non-negative integer");
  return static_cast<std::size_t>(n);
}

bool as_bool(const Value& v, const std::string& key) {
  const std::string_view s = strip(v.raw);
  if (s == "true") return true;
  if (s == "false") return false;
  fail(v, key, "expected true or false");
}

std::vector<double> as_double_array(const Value& v, const std::string& key) {
  std::string_view s = strip(v.raw);
  if (s.size() < 2 || s.front() != '[' || s.back() != ']') fail(v, key, "expected an array");
  s = s.substr(1, s.size() - 2);
  std::vector<double> out;
  while (!strip(s).empty()) {
    const auto comma = s.find(',');
    Value item{std::string(strip(s.substr(0, comma))), v.line};
    out.push_back(as_double(item, key));
    if (comma == std::string_view::npos) break;
    s = s.substr(comma + 1);
  }
  return out;
}

Metric as_metric(const Value& v, const std::string& key) {
  try {
    return Metric::parse(as_string(v, key));
  } catch (const InvalidParameter& e) {
    fail(v, key, e.what());
  }
}

}  // namespace

RunConfig RunConfig::parse(const std::string& text, const std::filesystem::path& base_dir) {
  std::istringstream in(text);
  std::string line;
  std::string section;
  std::size_t line_no = 0;
  RunConfig cfg;
  bool have_data = false;

  using Handler = std::function<void(const Value&, const std::string&)>;
  const std::map<std::string, Handler> handlers = {
      {"name", [&](const Value& v, const std::string& k) { cfg.name = as_string(v, k); }},
      {"data", [&](const Value& v, const std::string& k) {
         std::filesystem::path p = as_string(v, k);
         cfg.data = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
         have_data = true;
       }},
      {"header", [&](const Value& v, const std::string& k) { cfg.csv.has_header = as_bool(v, k); }},
      {"label_column", [&](const Value& v, const std::string& k) { cfg.csv.label_column = static_cast<int>(as_int(v, k)); }},
      {"delimiter", [&](const Value& v, const std::string& k) {
         const std::string d = as_string(v, k);
         if (d.size() != 1) fail(v, k, "delimiter must be one character");
         cfg.csv.delimiter = d[0];
       }},
      {"outer_folds", [&](const Value& v, const std::string& k) { cfg.outer_folds = as_count(v, k); }},
      {"seed", [&](const Value& v, const std::string& k) { cfg.set_seed(static_cast<std::uint64_t>(as_int(v, k))); }},
      {"normalize", [&](const Value& v, const std::string& k) { cfg.normalize = as_bool(v, k); }},

      {"ifl.r", [&](const Value& v, const std::string& k) { cfg.ifl.r = as_count(v, k); }},
      {"ifl.k", [&](const Value& v, const std::string& k) { cfg.ifl.k = as_count(v, k); }},
      {"ifl.feature_set", [&](const Value& v, const std::string& k) {
         try {
           cfg.ifl.features = FeatureSet::parse(as_string(v, k));
         } catch (const InvalidParameter& e) {
           fail(v, k, e.what());
         }
       }},
      {"ifl.metric_l1", [&](const Value& v, const std::string& k) { cfg.ifl.metric_l1 = as_metric(v, k); }},
      {"ifl.metric_l2", [&](const Value& v, const std::string& k) { cfg.ifl.metric_l2 = as_metric(v, k); }},
      {"ifl.metric_l3", [&](const Value& v, const std::string& k) { cfg.ifl.metric_l3 = as_metric(v, k); }},
      {"ifl.strategy", [&](const Value& v, const std::string& k) { cfg.ifl.strategy = static_cast<int>(as_int(v, k)); }},
      {"ifl.multipliers", [&](const Value& v, const std::string& k) { cfg.ifl.multipliers = as_double_array(v, k); }},
      {"ifl.mean_scope", [&](const Value& v, const std::string& k) {
         const std::string s = as_string(v, k);
         if (s == "cluster") cfg.ifl.mean_scope = MeanScope::closest_cluster;
         else if (s == "group") cfg.ifl.mean_scope = MeanScope::group;
         else fail(v, k, "expected \"cluster\" or \"group\"");
       }},
      {"ifl.kmeans_max_iter", [&](const Value& v, const std::string& k) { cfg.ifl.kmeans_max_iter = as_count(v, k); }},

      {"classifier.kind", [&](const Value& v, const std::string& k) {
         try {
           cfg.classifier.kind = parse_classifier_kind(as_string(v, k));
         } catch (const InvalidParameter& e) {
           fail(v, k, e.what());
         }
       }},
      {"classifier.learners", [&](const Value& v, const std::string& k) { cfg.classifier.boost.n_learners = as_count(v, k); }},
      {"classifier.max_depth", [&](const Value& v, const std::string& k) { cfg.classifier.boost.max_depth = as_count(v, k); }},
      {"classifier.min_leaf", [&](const Value& v, const std::string& k) { cfg.classifier.boost.min_leaf = as_count(v, k); }},
      {"classifier.learning_rate", [&](const Value& v, const std::string& k) { cfg.classifier.boost.learning_rate = as_double(v, k); }},
      {"classifier.tree_max_depth", [&](const Value& v, const std::string& k) { cfg.classifier.tree.max_depth = as_count(v, k); }},
      {"classifier.tree_min_leaf", [&](const Value& v, const std::string& k) { cfg.classifier.tree.min_leaf = as_count(v, k); }},
      {"classifier.tree_min_parent", [&](const Value& v, const std::string& k) { cfg.classifier.tree.min_parent = as_count(v, k); }},
      {"classifier.knn_neighbors", [&](const Value& v, const std::string& k) { cfg.classifier.knn.neighbors = as_count(v, k); }},
      {"classifier.knn_metric", [&](const Value& v, const std::string& k) { cfg.classifier.knn.metric = as_metric(v, k); }},
      {"classifier.knn_standardize", [&](const Value& v, const std::string& k) { cfg.classifier.knn.standardize = as_bool(v, k); }},
      {"classifier.nb_variance_floor", [&](const Value& v, const std::string& k) { cfg.classifier.naive_bayes.variance_floor = as_double(v, k); }},
  };
  static const std::vector<std::string> kReferenceMethods = {"naive_bayes", "knn", "tree", "ensemble", "ifl"};

  while (std::getline(in, line)) {
    ++line_no;
    std::string_view s = strip(drop_comment(line));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw MalformedInput("config line " + std::to_string(line_no) + ": bad section header");
      section = std::string(strip(s.substr(1, s.size() - 2)));
      if (section != "ifl" && section != "classifier" && section != "reference")
        throw ValidationError("config line " + std::to_string(line_no) + ": unknown section [" + section + "]");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string_view::npos)
      throw MalformedInput("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = (section.empty() ? "" : section + ".") + std::string(strip(s.substr(0, eq)));
    const Value value{std::string(strip(s.substr(eq + 1))), line_no};

    if (section == "reference") {
      const std::string leaf = key.substr(std::string("reference.").size());
      bool known = false;
      for (const auto& m : kReferenceMethods)
        if (leaf == m + "_accuracy" || leaf == m + "_f1") known = true;
      if (!known) fail(value, key, "unknown key");
      cfg.reference[leaf] = as_double(value, key);
      continue;
    }
    auto it = handlers.find(key);
    if (it == handlers.end()) fail(value, key, "unknown key");
    it->second(value, key);
  }
  if (!have_data) throw ValidationError("config: missing required key 'data'");
  if (cfg.outer_folds < 2) throw ValidationError("config: outer_folds must be >= 2");
  try {
    cfg.ifl.validate();
  } catch (const InvalidParameter& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  if (cfg.name.empty()) cfg.name = cfg.data.stem().string();
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidParameter("cannot open config '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.parent_path());
}

}  // namespace ifl
