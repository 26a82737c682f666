#include "ifl/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "ifl/log.hpp"

namespace ifl {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

Dataset Dataset::create(Matrix features, std::vector<int> labels,
                        std::vector<std::string> label_names, std::string name) {
  if (features.rows() != labels.size())
    throw ValidationError("dataset: feature rows (" + std::to_string(features.rows()) +
                          ") != label count (" + std::to_string(labels.size()) + ")");
  if (features.cols() < 1) throw ValidationError("dataset: needs at least one feature column");
  if (label_names.size() < 2) throw ValidationError("dataset: needs at least two classes");
  if (features.rows() < label_names.size())
    throw ValidationError("dataset: fewer rows than classes");
  for (double v : features.data())
    if (!std::isfinite(v)) throw ValidationError("dataset: non-finite feature value");
  for (int l : labels)
    if (l < 0 || static_cast<std::size_t>(l) >= label_names.size())
      throw ValidationError("dataset: label index " + std::to_string(l) + " out of range");
  Dataset d;
  d.features = std::move(features);
  d.labels = std::move(labels);
  d.label_names = std::move(label_names);
  d.name = std::move(name);
  return d;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset d;
  d.features = features.select_rows(indices);
  d.labels.reserve(indices.size());
  for (std::size_t i : indices) d.labels.push_back(labels[i]);
  d.label_names = label_names;
  d.name = name;
  d.feature_names = feature_names;
  return d;
}

Dataset parse_csv(const std::string& text, const CsvOptions& options, std::string name) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::size_t ncols = 0;
  std::size_t label_col = 0;
  bool header_pending = options.has_header;
  std::vector<std::string> header;

  Matrix features;
  std::vector<int> labels;
  std::vector<std::string> label_names;
  std::map<std::string, int, std::less<>> label_index;
  std::vector<double> row;

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split(line, options.delimiter);
    if (ncols == 0) {
      ncols = cells.size();
      if (ncols < 2) throw MalformedInput("csv line " + std::to_string(line_no) + ": need at least 2 columns");
      const long lc = options.label_column < 0 ? static_cast<long>(ncols) + options.label_column
                                               : options.label_column;
      if (lc < 0 || lc >= static_cast<long>(ncols))
        throw InvalidParameter("csv: label column " + std::to_string(options.label_column) +
                               " out of range for " + std::to_string(ncols) + " columns");
      label_col = static_cast<std::size_t>(lc);
    }
    if (cells.size() != ncols)
      throw MalformedInput("csv line " + std::to_string(line_no) + ": expected " + std::to_string(ncols) +
                           " columns, found " + std::to_string(cells.size()));
    if (header_pending) {
      header_pending = false;
      for (std::size_t c = 0; c < ncols; ++c)
        if (c != label_col) header.emplace_back(cells[c]);
      continue;
    }
    row.clear();
    for (std::size_t c = 0; c < ncols; ++c) {
      if (c == label_col) continue;
      const auto cell = cells[c];
      double v = 0.0;
      const auto* first = cell.data();
      const auto* last = cell.data() + cell.size();
      if (!cell.empty() && *first == '+') ++first;
      auto [ptr, ec] = std::from_chars(first, last, v);
      if (cell.empty() || ec != std::errc() || ptr != last)
        throw MalformedInput("csv line " + std::to_string(line_no) + ", column " + std::to_string(c + 1) +
                             ": cannot parse '" + std::string(cell) + "' as a number");
      if (!std::isfinite(v))
        throw ValidationError("csv line " + std::to_string(line_no) + ", column " + std::to_string(c + 1) +
                              ": non-finite value");
      row.push_back(v);
    }
    features.push_row(row);
    const auto label = cells[label_col];
    auto it = label_index.find(label);
    if (it == label_index.end()) {
      it = label_index.emplace(std::string(label), static_cast<int>(label_names.size())).first;
      label_names.emplace_back(label);
    }
    labels.push_back(it->second);
  }
  if (features.rows() == 0) throw ValidationError("csv: no data rows");
  if (label_names.size() < 2)
    throw ValidationError("csv: only " + std::to_string(label_names.size()) + " distinct label(s); need >= 2");
  Dataset d = Dataset::create(std::move(features), std::move(labels), std::move(label_names), std::move(name));
  d.feature_names = std::move(header);
  return d;
}

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidParameter("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str(), options, path.stem().string());
}

std::string to_csv(const Dataset& dataset, bool header) {
  std::string out;
  if (header) {
    for (std::size_t c = 0; c < dataset.width(); ++c) {
      out += c < dataset.feature_names.size() ? dataset.feature_names[c] : "x" + std::to_string(c + 1);
      out += ',';
    }
    out += "label\n";
  }
  for (std::size_t r = 0; r < dataset.size(); ++r) {
    for (double v : dataset.features.row(r)) {
      out += format_double(v);
      out += ',';
    }
    out += dataset.label_names[static_cast<std::size_t>(dataset.labels[r])];
    out += '\n';
  }
  return out;
}

void write_csv(const std::filesystem::path& path, const Dataset& dataset, bool header) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidParameter("cannot write '" + path.string() + "'");
  out << to_csv(dataset, header);
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m,
                      const std::vector<std::string>& header,
                      const std::vector<std::string>& trailing_column,
                      const std::string& trailing_name) {
  if (!trailing_column.empty() && trailing_column.size() != m.rows())
    throw InvalidParameter("write_matrix_csv: trailing column length mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidParameter("cannot write '" + path.string() + "'");
  const bool trailing = !trailing_column.empty() || (m.rows() == 0 && !header.empty() && !trailing_name.empty());
  if (!header.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
    if (trailing) out << ',' << trailing_name;
    out << '\n';
  }
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_double(row[c]);
    if (!trailing_column.empty()) out << ',' << trailing_column[r];
    out << '\n';
  }
}

std::vector<std::size_t> FoldPlan::complement(std::size_t j) const {
  std::vector<std::size_t> out;
  for (std::size_t f = 0; f < folds.size(); ++f)
    if (f != j) out.insert(out.end(), folds[f].begin(), folds[f].end());
  std::sort(out.begin(), out.end());
  return out;
}

FoldPlan stratified_folds(std::span<const int> labels, std::size_t r, std::uint64_t seed) {
  const std::size_t n = labels.size();
  if (r < 2) throw InvalidParameter("stratified_folds: r must be >= 2");
  if (r > n)
    throw InvalidParameter("stratified_folds: r=" + std::to_string(r) + " exceeds n=" + std::to_string(n));

  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < n; ++i) by_class[labels[i]].push_back(i);

  FoldPlan plan;
  plan.seed = seed;
  plan.folds.resize(r);
  std::mt19937_64 rng(seed);
  std::size_t deal = 0;
  for (auto& [cls, members] : by_class) {
    if (members.size() < 2)
      log::warn("stratified_folds: class " + std::to_string(cls + 1) +
                " has a single member; it is placed in one fold only");
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t idx : members) {
      plan.folds[deal % r].push_back(idx);
      ++deal;
    }
  }
  for (auto& f : plan.folds) std::sort(f.begin(), f.end());
  return plan;
}

FoldPlan stratified_folds(const Dataset& dataset, std::size_t r, std::uint64_t seed) {
  return stratified_folds(dataset.labels, r, seed);
}

std::vector<LabelGroup> group_by_label(std::span<const int> labels, std::span<const std::size_t> indices) {
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i : indices) {
    if (i >= labels.size()) throw InvalidParameter("group_by_label: index out of range");
    by_class[labels[i]].push_back(i);
  }
  std::vector<LabelGroup> groups;
  groups.reserve(by_class.size());
  for (auto& [cls, idx] : by_class) groups.push_back({cls, std::move(idx)});
  return groups;
}

Standardizer::Standardizer(std::vector<double> mean, std::vector<double> scale)
    : mean_(std::move(mean)), scale_(std::move(scale)) {
  if (mean_.size() != scale_.size()) throw InvalidParameter("Standardizer: mean and scale lengths differ");
  for (double s : scale_)
    if (!(s > 0.0) || !std::isfinite(s)) throw InvalidParameter("Standardizer: scales must be positive and finite");
}

Standardizer Standardizer::fit(const Matrix& m) {
  Standardizer s;
  s.mean_.assign(m.cols(), 0.0);
  s.scale_.assign(m.cols(), 1.0);
  if (m.rows() == 0) return s;
  std::vector<std::size_t> all(m.rows());
  std::iota(all.begin(), all.end(), std::size_t{0});
  s.mean_ = row_mean(m, all);
  for (std::size_t c = 0; c < m.cols(); ++c) {
    double ss = 0.0;
    for (std::size_t r = 0; r < m.rows(); ++r) {
      const double d = m(r, c) - s.mean_[c];
      ss += d * d;
    }
    const double sd = std::sqrt(ss / static_cast<double>(m.rows()));
    s.scale_[c] = sd > 0.0 ? sd : 1.0;
  }
  return s;
}

Matrix Standardizer::transform(const Matrix& m) const {
  if (m.cols() != mean_.size()) throw InvalidParameter("Standardizer: width mismatch");
  Matrix out = m;
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) = (out(r, c) - mean_[c]) / scale_[c];
  return out;
}

std::vector<double> Standardizer::transform(std::span<const double> row) const {
  if (row.size() != mean_.size()) throw InvalidParameter("Standardizer: width mismatch");
  std::vector<double> out(row.size());
  for (std::size_t c = 0; c < row.size(); ++c) out[c] = (row[c] - mean_[c]) / scale_[c];
  return out;
}

}  // namespace ifl
