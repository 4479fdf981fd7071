#include "prenet/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "prenet/errors.hpp"

namespace prenet {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  std::string out(s.substr(b, e - b + 1));
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') {
      quoted = !quoted;
      current.push_back(ch);
    } else if (ch == ',' && !quoted) {
      fields.push_back(trim(current));
      current.clear();
    } else {
      current.push_back(ch);
    }
  }
  fields.push_back(trim(current));
  return fields;
}

bool parse_double(const std::string& text, double& out) {
  if (text.empty()) return false;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

std::size_t resolve_column(const std::vector<std::string>& header, const std::string& name,
                           const char* what) {
  if (auto it = std::find(header.begin(), header.end(), name); it != header.end())
    return static_cast<std::size_t>(it - header.begin());
  std::size_t index = 0;
  auto [ptr, ec] = std::from_chars(name.data(), name.data() + name.size(), index);
  if (ec == std::errc() && ptr == name.data() + name.size() && index < header.size()) return index;
  throw SchemaError(std::string(what) + " column '" + name + "' not found in header");
}

std::size_t rounded_share(std::size_t n, double fraction) {
  auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  return std::clamp<std::size_t>(k, 1, n - 1);
}

}  // namespace

std::size_t LabeledDataset::count_anomalies() const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> indices) const {
  LabeledDataset out;
  out.features = features.select_rows(indices);
  out.feature_names = feature_names;
  out.labels.reserve(indices.size());
  for (auto i : indices) out.labels.push_back(labels.at(i));
  if (!anomaly_types.empty()) {
    out.anomaly_types.reserve(indices.size());
    for (auto i : indices) out.anomaly_types.push_back(anomaly_types.at(i));
  }
  return out;
}

void LabeledDataset::validate() const {
  if (features.rows() != labels.size())
    throw SchemaError("feature rows and label count differ");
  if (!anomaly_types.empty() && anomaly_types.size() != labels.size())
    throw SchemaError("anomaly type count differs from label count");
  if (!feature_names.empty() && feature_names.size() != features.cols())
    throw SchemaError("feature name count differs from feature count");
  for (int l : labels)
    if (l != 0 && l != 1) throw SchemaError("label " + std::to_string(l) + " is not 0/1");
  if (!features.all_finite()) throw SchemaError("non-finite feature value");
}

LabeledDataset load_csv(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");

  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) header = split_fields(line);
  }
  if (header.empty()) throw ParseError("'" + path.string() + "' has no header row");

  std::optional<std::size_t> label_col;
  try {
    label_col = resolve_column(header, options.label_column, "label");
  } catch (const SchemaError&) {
    if (options.require_label) throw;
  }
  std::optional<std::size_t> type_col;
  if (options.type_column) type_col = resolve_column(header, *options.type_column, "type");

  std::vector<std::size_t> feature_cols;
  LabeledDataset ds;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c == label_col || (type_col && c == *type_col)) continue;
    feature_cols.push_back(c);
    ds.feature_names.push_back(header[c]);
  }

  std::vector<double> values;
  std::vector<std::string> raw_labels;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_fields(line);
    if (fields.size() != header.size())
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(header.size()) + " fields, found " +
                       std::to_string(fields.size()));
    for (auto c : feature_cols) {
      double v = 0.0;
      if (!parse_double(fields[c], v) || !std::isfinite(v))
        throw ParseError("line " + std::to_string(line_no) + ", column " + std::to_string(c + 1) +
                         " ('" + header[c] + "'): '" + fields[c] + "' is not a finite number");
      values.push_back(v);
    }
    if (label_col) raw_labels.push_back(fields[*label_col]);
    if (type_col) ds.anomaly_types.push_back(fields[*type_col]);
  }

  const std::size_t n_rows = values.size() / std::max<std::size_t>(1, feature_cols.size());
  if (!label_col) {
    ds.features = Matrix(feature_cols.empty() ? 0 : n_rows, feature_cols.size(), std::move(values));
    return ds;
  }
  std::vector<std::string> distinct = raw_labels;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() > 2)
    throw SchemaError("label column '" + header[*label_col] + "' has " +
                      std::to_string(distinct.size()) + " distinct values, expected at most 2");

  ds.labels.reserve(raw_labels.size());
  for (std::size_t i = 0; i < raw_labels.size(); ++i) {
    const auto& raw = raw_labels[i];
    if (options.anomaly_value) {
      ds.labels.push_back(raw == *options.anomaly_value ? 1 : 0);
      continue;
    }
    double v = 0.0;
    if (!parse_double(raw, v) || (v != 0.0 && v != 1.0))
      throw SchemaError("label '" + raw + "' on data row " + std::to_string(i + 1) +
                        " is not 0/1 (use an explicit anomaly value mapping)");
    ds.labels.push_back(v == 1.0 ? 1 : 0);
  }
  ds.features = Matrix(raw_labels.size(), feature_cols.size(), std::move(values));
  return ds;
}

void save_csv(const std::filesystem::path& path, const LabeledDataset& ds) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  for (std::size_t c = 0; c < ds.dim(); ++c)
    out << (ds.feature_names.empty() ? "f" + std::to_string(c + 1) : ds.feature_names[c]) << ',';
  out << "label\n";
  char buf[32];
  for (std::size_t r = 0; r < ds.size(); ++r) {
    for (double v : ds.features.row(r)) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << buf << ',';
    }
    out << ds.labels[r] << '\n';
  }
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

TrainTestSplit stratified_split(const LabeledDataset& ds, double train_fraction, Rng& rng) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ArgumentError("train fraction must lie in (0, 1)");
  ds.validate();

  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < ds.size(); ++i) by_class[ds.labels[i]].push_back(i);

  TrainTestSplit split;
  for (int cls = 0; cls < 2; ++cls) {
    auto& idx = by_class[cls];
    if (idx.size() < 2)
      throw DomainError(std::string("degenerate split: class '") + (cls ? "anomaly" : "normal") +
                        "' has " + std::to_string(idx.size()) + " instance(s), need at least 2");
    shuffle(idx, rng);
    const std::size_t k = rounded_share(idx.size(), train_fraction);
    split.train_indices.insert(split.train_indices.end(), idx.begin(), idx.begin() + k);
    split.test_indices.insert(split.test_indices.end(), idx.begin() + k, idx.end());
  }
  std::sort(split.train_indices.begin(), split.train_indices.end());
  std::sort(split.test_indices.begin(), split.test_indices.end());
  split.train = ds.subset(split.train_indices);
  split.test = ds.subset(split.test_indices);
  return split;
}

std::size_t WeakSupervisionSplit::injected_count() const {
  std::size_t n = 0;
  for (auto i : pools.unlabeled) n += store_labels.at(i) == 1;
  return n;
}

std::size_t injected_anomaly_count(std::size_t n_normal, double eps) {
  if (!(eps >= 0.0 && eps < 1.0)) throw DomainError("contamination rate must lie in [0, 1)");
  return static_cast<std::size_t>(std::llround(eps * static_cast<double>(n_normal) / (1.0 - eps)));
}

WeakSupervisionSplit build_weak_supervision(const LabeledDataset& train, const LabeledDataset& test,
                                            const WeakSupervisionOptions& options, Rng& rng,
                                            std::uint64_t seed) {
  train.validate();
  if (!(options.contamination_rate >= 0.0 && options.contamination_rate < 0.5))
    throw DomainError("contamination rate must lie in [0, 0.5)");
  if (options.n_labeled < 2) throw ArgumentError("need at least 2 labeled anomalies");
  if (options.known_types && train.anomaly_types.empty())
    throw SchemaError("known-type filter requires an anomaly type column");

  std::vector<std::size_t> normals;
  std::vector<std::size_t> anomalies;
  for (std::size_t i = 0; i < train.size(); ++i) {
    if (train.labels[i] == 0) {
      normals.push_back(i);
    } else if (!options.known_types || options.known_types->count(train.anomaly_types[i])) {
      anomalies.push_back(i);
    }
  }
  if (normals.size() < 2) throw CapacityError("need at least 2 normal training instances");

  const std::size_t injected = injected_anomaly_count(normals.size(), options.contamination_rate);
  const std::size_t required = options.n_labeled + injected;
  if (anomalies.size() < required)
    throw CapacityError("required " + std::to_string(required) + " training anomalies (" +
                        std::to_string(options.n_labeled) + " labeled + " +
                        std::to_string(injected) + " injected), available " +
                        std::to_string(anomalies.size()));

  shuffle(anomalies, rng);
  std::vector<std::size_t> source_rows(anomalies.begin(),
                                       anomalies.begin() + static_cast<std::ptrdiff_t>(options.n_labeled));
  source_rows.insert(source_rows.end(), normals.begin(), normals.end());
  source_rows.insert(source_rows.end(),
                     anomalies.begin() + static_cast<std::ptrdiff_t>(options.n_labeled),
                     anomalies.begin() + static_cast<std::ptrdiff_t>(required));

  WeakSupervisionSplit split;
  split.pools.store = train.features.select_rows(source_rows);
  split.pools.anomalies.resize(options.n_labeled);
  std::iota(split.pools.anomalies.begin(), split.pools.anomalies.end(), std::size_t{0});
  split.pools.unlabeled.resize(source_rows.size() - options.n_labeled);
  std::iota(split.pools.unlabeled.begin(), split.pools.unlabeled.end(), options.n_labeled);
  split.store_rows = source_rows;
  split.store_labels.reserve(source_rows.size());
  for (auto r : source_rows) split.store_labels.push_back(train.labels[r]);
  split.test_features = test.features;
  split.test_labels = test.labels;
  split.contamination_rate = options.contamination_rate;
  split.seed = seed;
  return split;
}

Standardizer Standardizer::fit(const Matrix& x) {
  Standardizer s;
  const std::size_t n = x.rows(), d = x.cols();
  s.mean.assign(d, 0.0);
  s.stddev.assign(d, 0.0);
  if (n == 0) return s;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) s.mean[j] += x(i, j);
  for (auto& m : s.mean) m /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const double c = x(i, j) - s.mean[j];
      s.stddev[j] += c * c;
    }
  for (auto& v : s.stddev) {
    v = std::sqrt(v / static_cast<double>(n));
    if (v < kMinStd) v = 0.0;
  }
  return s;
}

void Standardizer::apply_inplace(Matrix& x) const {
  if (identity()) return;
  if (x.cols() != mean.size())
    throw ShapeError("standardizer fitted on " + std::to_string(mean.size()) +
                     " features applied to " + std::to_string(x.cols()));
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto r = x.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) {
      r[j] -= mean[j];
      if (stddev[j] > 0.0) r[j] /= stddev[j];
    }
  }
}

Matrix Standardizer::apply(const Matrix& x) const {
  Matrix out = x;
  apply_inplace(out);
  return out;
}

Standardizer standardize(Matrix& train, std::initializer_list<Matrix*> others) {
  auto s = Standardizer::fit(train);
  s.apply_inplace(train);
  for (auto* m : others) s.apply_inplace(*m);
  return s;
}

}  // namespace prenet
