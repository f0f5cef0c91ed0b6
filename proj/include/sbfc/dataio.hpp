#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <istream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "sbfc/error.hpp"
#include "sbfc/random.hpp"

namespace sbfc {

using Category = std::uint16_t;

// ---------------------------------------------------------------------------
// Raw delimited tables
// ---------------------------------------------------------------------------

struct RawTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  // Absent for unlabeled tables (e.g. a test file without the class column).
  std::optional<std::size_t> class_column;

  std::size_t n() const { return rows.size(); }
  std::size_t width() const { return header.size(); }
  std::size_t d() const { return width() - (class_column ? 1 : 0); }

  std::vector<std::size_t> feature_columns() const {
    std::vector<std::size_t> cols;
    cols.reserve(width());
    for (std::size_t c = 0; c < width(); ++c) {
      if (!class_column || c != *class_column) cols.push_back(c);
    }
    return cols;
  }

  RawTable select_rows(std::span<const std::size_t> indices) const {
    RawTable out{header, {}, class_column};
    out.rows.reserve(indices.size());
    for (auto i : indices) out.rows.push_back(rows.at(i));
    return out;
  }
};

// Class column reference: by index, by header name, or (monostate) the last column.
using ColumnRef = std::variant<std::monostate, std::size_t, std::string>;

struct LoadOptions {
  char delimiter = ',';
  bool has_header = true;
  ColumnRef class_column{};
  // When false, a table without the class column is accepted (class_column
  // resolves to nothing if a named column is missing).
  bool require_class = true;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

// Splits one record; double quotes group a field and "" escapes a quote.
inline std::vector<std::string> split_record(std::string_view line, char delim) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == delim) {
      fields.emplace_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.emplace_back(trim(cur));
  return fields;
}

inline std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value)) return std::nullopt;
  return value;
}

}  // namespace detail

inline RawTable parse_table(std::istream& in, const LoadOptions& opts,
                            const std::string& source = "<stream>") {
  RawTable table;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    auto fields = detail::split_record(line, opts.delimiter);
    if (!have_header) {
      have_header = true;
      if (opts.has_header) {
        table.header = std::move(fields);
        continue;
      }
      table.header.resize(fields.size());
      for (std::size_t c = 0; c < fields.size(); ++c) table.header[c] = "V" + std::to_string(c + 1);
    }
    if (fields.size() != table.header.size()) {
      throw ParseError(source + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(table.header.size()) + " fields, found " +
                       std::to_string(fields.size()));
    }
    table.rows.push_back(std::move(fields));
  }
  if (table.header.empty()) throw ParseError(source + ": no data");

  const std::size_t width = table.header.size();
  if (std::holds_alternative<std::monostate>(opts.class_column)) {
    table.class_column = width - 1;
  } else if (const auto* idx = std::get_if<std::size_t>(&opts.class_column)) {
    if (*idx >= width) {
      if (opts.require_class) {
        throw ConfigError("class column index " + std::to_string(*idx) + " out of range (" +
                          std::to_string(width) + " columns)");
      }
    } else {
      table.class_column = *idx;
    }
  } else {
    const auto& name = std::get<std::string>(opts.class_column);
    const auto it = std::find(table.header.begin(), table.header.end(), name);
    if (it == table.header.end()) {
      if (opts.require_class) throw ConfigError("class column '" + name + "' not found in header");
    } else {
      table.class_column = static_cast<std::size_t>(it - table.header.begin());
    }
  }
  if (table.class_column && width < 2) throw ConfigError("table needs at least one feature column");
  return table;
}

inline RawTable load_table(const std::string& path, const LoadOptions& opts) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return parse_table(in, opts, path);
}

inline RawTable load_table(const std::string& path, char delimiter, bool has_header,
                           ColumnRef class_column) {
  return load_table(path, LoadOptions{delimiter, has_header, std::move(class_column)});
}

inline const std::set<std::string>& default_missing_tokens() {
  static const std::set<std::string> tokens{"?", "", "NA"};
  return tokens;
}

inline RawTable drop_missing(const RawTable& table,
                             const std::set<std::string>& missing_tokens = default_missing_tokens()) {
  RawTable out{table.header, {}, table.class_column};
  for (const auto& row : table.rows) {
    const bool missing = std::any_of(row.begin(), row.end(),
                                     [&](const std::string& c) { return missing_tokens.count(c) > 0; });
    if (!missing) out.rows.push_back(row);
  }
  if (out.rows.empty()) throw ValidationError("no rows left after removing missing values");
  return out;
}

// FNV-1a over the canonicalized table (unit/record separators between cells).
inline std::string table_checksum(const RawTable& table) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto feed = [&h](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  };
  const auto feed_row = [&](const std::vector<std::string>& row) {
    for (const auto& cell : row) {
      feed(cell);
      feed("\x1f");
    }
    feed("\x1e");
  };
  feed_row(table.header);
  for (const auto& row : table.rows) feed_row(row);
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

// ---------------------------------------------------------------------------
// Discretized data
// ---------------------------------------------------------------------------

// Immutable n x d matrix of category indices, stored column-major, plus the
// class vector. An unlabeled dataset has an empty label vector.
class Dataset {
 public:
  Dataset() = default;

  Dataset(std::size_t n, std::vector<Category> values_column_major, std::vector<std::size_t> arities,
          std::vector<Category> labels, std::size_t class_arity,
          std::vector<std::string> feature_names = {}, std::vector<std::vector<double>> cutpoints = {})
      : n_(n),
        values_(std::move(values_column_major)),
        arities_(std::move(arities)),
        labels_(std::move(labels)),
        class_arity_(class_arity),
        names_(std::move(feature_names)),
        cutpoints_(std::move(cutpoints)) {
    const std::size_t d = arities_.size();
    if (names_.empty()) {
      for (std::size_t j = 0; j < d; ++j) names_.push_back("X" + std::to_string(j + 1));
    }
    if (cutpoints_.empty()) cutpoints_.resize(d);
    if (values_.size() != n_ * d) throw ValidationError("dataset: value matrix size mismatch");
    if (names_.size() != d || cutpoints_.size() != d) throw ValidationError("dataset: column metadata size mismatch");
    if (!labels_.empty() && labels_.size() != n_) throw ValidationError("dataset: label count mismatch");
    if (class_arity_ < 2) throw ValidationError("dataset: need at least two classes");
    for (std::size_t j = 0; j < d; ++j) {
      if (arities_[j] < 1 || arities_[j] > 65535) throw ValidationError("dataset: bad arity");
      for (auto x : column(j)) {
        if (x >= arities_[j]) throw ValidationError("dataset: value exceeds arity in column " + names_[j]);
      }
    }
    for (auto y : labels_) {
      if (y >= class_arity_) throw ValidationError("dataset: label exceeds class arity");
    }
  }

  // Builds from row-major rows, convenient for tests and bundled data.
  static Dataset from_rows(const std::vector<std::vector<Category>>& rows, std::vector<Category> labels,
                           std::vector<std::size_t> arities = {}, std::size_t class_arity = 0) {
    const std::size_t n = rows.size();
    const std::size_t d = n ? rows.front().size() : arities.size();
    if (arities.empty()) {
      arities.assign(d, 1);
      for (const auto& r : rows)
        for (std::size_t j = 0; j < d; ++j) arities[j] = std::max<std::size_t>(arities[j], r.at(j) + 1u);
    }
    if (class_arity == 0) {
      class_arity = 2;
      for (auto y : labels) class_arity = std::max<std::size_t>(class_arity, y + 1u);
    }
    std::vector<Category> values(n * d);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) values[j * n + i] = rows[i].at(j);
    return Dataset(n, std::move(values), std::move(arities), std::move(labels), class_arity);
  }

  std::size_t n() const { return n_; }
  std::size_t d() const { return arities_.size(); }
  bool has_labels() const { return !labels_.empty() || n_ == 0; }

  std::span<const Category> column(std::size_t j) const { return {values_.data() + j * n_, n_}; }
  Category value(std::size_t i, std::size_t j) const { return values_[j * n_ + i]; }
  std::vector<Category> row(std::size_t i) const {
    std::vector<Category> r(d());
    for (std::size_t j = 0; j < d(); ++j) r[j] = value(i, j);
    return r;
  }

  std::size_t arity(std::size_t j) const { return arities_[j]; }
  const std::vector<std::size_t>& arities() const { return arities_; }
  std::span<const Category> labels() const { return labels_; }
  Category label(std::size_t i) const { return labels_[i]; }
  std::size_t class_arity() const { return class_arity_; }
  const std::vector<std::string>& feature_names() const { return names_; }
  const std::vector<double>& cutpoints(std::size_t j) const { return cutpoints_[j]; }

  std::vector<std::size_t> class_counts() const {
    std::vector<std::size_t> counts(class_arity_, 0);
    for (auto y : labels_) ++counts[y];
    return counts;
  }

  Dataset subset(std::span<const std::size_t> rows) const {
    const std::size_t m = rows.size();
    std::vector<Category> values(m * d());
    std::vector<Category> labels;
    if (!labels_.empty()) labels.reserve(m);
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t j = 0; j < d(); ++j) values[j * m + r] = value(rows[r], j);
      if (!labels_.empty()) labels.push_back(labels_[rows[r]]);
    }
    return Dataset(m, std::move(values), arities_, std::move(labels), class_arity_, names_, cutpoints_);
  }

  // Appends columns (used for noise augmentation experiments).
  Dataset with_extra_columns(const std::vector<std::vector<Category>>& columns,
                             const std::vector<std::size_t>& arities,
                             const std::vector<std::string>& names) const {
    auto values = values_;
    auto ar = arities_;
    auto nm = names_;
    auto cuts = cutpoints_;
    for (std::size_t c = 0; c < columns.size(); ++c) {
      values.insert(values.end(), columns[c].begin(), columns[c].end());
      ar.push_back(arities[c]);
      nm.push_back(names[c]);
      cuts.emplace_back();
    }
    return Dataset(n_, std::move(values), std::move(ar), labels_, class_arity_, std::move(nm), std::move(cuts));
  }

 private:
  std::size_t n_ = 0;
  std::vector<Category> values_;
  std::vector<std::size_t> arities_;
  std::vector<Category> labels_;
  std::size_t class_arity_ = 2;
  std::vector<std::string> names_;
  std::vector<std::vector<double>> cutpoints_;
};

// ---------------------------------------------------------------------------
// Discretization
// ---------------------------------------------------------------------------

namespace detail {

inline double entropy_bits(std::span<const std::size_t> counts, std::size_t total) {
  if (total == 0) return 0.0;
  double h = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return h;
}

inline std::size_t distinct_classes(std::span<const std::size_t> counts) {
  return static_cast<std::size_t>(std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; }));
}

// Recursive Fayyad-Irani splitting over sorted[lo, hi).
inline void mdlp_split(const std::vector<double>& vals, const std::vector<Category>& cls, std::size_t arity,
                       std::size_t lo, std::size_t hi, std::vector<double>& cuts) {
  const std::size_t total = hi - lo;
  if (total < 2) return;
  std::vector<std::size_t> all(arity, 0);
  for (std::size_t i = lo; i < hi; ++i) ++all[cls[i]];
  const double ent = entropy_bits(all, total);

  std::vector<std::size_t> left(arity, 0), right(arity, 0);
  std::vector<std::size_t> best_left, best_right;
  double best_weighted = std::numeric_limits<double>::infinity();
  std::size_t best_pos = 0;
  for (std::size_t i = lo + 1; i < hi; ++i) {
    ++left[cls[i - 1]];
    if (!(vals[i - 1] < vals[i])) continue;
    for (std::size_t k = 0; k < arity; ++k) right[k] = all[k] - left[k];
    const std::size_t nl = i - lo, nr = hi - i;
    const double weighted = (static_cast<double>(nl) * entropy_bits(left, nl) +
                             static_cast<double>(nr) * entropy_bits(right, nr)) /
                            static_cast<double>(total);
    if (weighted < best_weighted) {
      best_weighted = weighted;
      best_pos = i;
      best_left = left;
      best_right = right;
    }
  }
  if (best_pos == 0) return;

  const std::size_t nl = best_pos - lo, nr = hi - best_pos;
  const double ent_l = entropy_bits(best_left, nl);
  const double ent_r = entropy_bits(best_right, nr);
  const double gain = ent - best_weighted;
  const auto k = static_cast<double>(distinct_classes(all));
  const auto k1 = static_cast<double>(distinct_classes(best_left));
  const auto k2 = static_cast<double>(distinct_classes(best_right));
  const double delta = std::log2(std::pow(3.0, k) - 2.0) - (k * ent - k1 * ent_l - k2 * ent_r);
  const double threshold = (std::log2(static_cast<double>(total) - 1.0) + delta) / static_cast<double>(total);
  if (!(gain > threshold)) return;

  cuts.push_back(0.5 * (vals[best_pos - 1] + vals[best_pos]));
  mdlp_split(vals, cls, arity, lo, best_pos, cuts);
  mdlp_split(vals, cls, arity, best_pos, hi, cuts);
}

}  // namespace detail

// Entropy-minimizing recursive binary splits with the MDL stopping rule.
inline std::vector<double> discretize_mdlp(std::span<const double> values, std::span<const Category> classes) {
  if (values.size() != classes.size()) throw ValidationError("discretize_mdlp: length mismatch");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
  std::vector<double> vals(values.size());
  std::vector<Category> cls(values.size());
  std::size_t arity = 1;
  for (std::size_t i = 0; i < order.size(); ++i) {
    vals[i] = values[order[i]];
    cls[i] = classes[order[i]];
    arity = std::max<std::size_t>(arity, cls[i] + 1u);
  }
  std::vector<double> cuts;
  detail::mdlp_split(vals, cls, arity, 0, vals.size(), cuts);
  std::sort(cuts.begin(), cuts.end());
  return cuts;
}

// Single cut at the median of the distinct values.
inline std::vector<double> discretize_binary(std::span<const double> values) {
  std::vector<double> distinct(values.begin(), values.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  const std::size_t m = distinct.size();
  if (m < 2) return {};
  if (m % 2 == 0) return {0.5 * (distinct[m / 2 - 1] + distinct[m / 2])};
  return {distinct[m / 2]};
}

// Bin index = number of cutpoints strictly below the value.
inline Category bin_of(double value, std::span<const double> cuts) {
  return static_cast<Category>(std::lower_bound(cuts.begin(), cuts.end(), value) - cuts.begin());
}

enum class DiscretizeMode { automatic, mdlp, binary };

struct DiscretizeOptions {
  DiscretizeMode mode = DiscretizeMode::automatic;
  // automatic: MDLP when d <= this, binary binning otherwise.
  std::size_t mdlp_max_features = 100;
  // Numeric columns with at most this many distinct values are kept as categories.
  std::size_t max_categorical_levels = 2;
};

struct ColumnEncoding {
  enum class Kind { numeric, categorical };
  std::string name;
  Kind kind = Kind::categorical;
  std::vector<double> cutpoints;
  std::vector<std::string> categories;  // sorted distinct training values

  std::size_t arity() const { return kind == Kind::numeric ? cutpoints.size() + 1 : categories.size(); }
};

// Everything fitted on a training table that is needed to encode any table
// with the same layout.
struct Encoding {
  std::vector<ColumnEncoding> columns;
  std::string class_name;
  std::vector<std::string> class_levels;

  std::size_t d() const { return columns.size(); }
};

namespace detail {

inline std::vector<std::string> sorted_distinct(std::vector<std::string> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace detail

inline Encoding fit_encoding(const RawTable& train, const DiscretizeOptions& opts = {}) {
  if (!train.class_column) throw ConfigError("training table has no class column");
  if (train.rows.empty()) throw ValidationError("training table is empty");
  const std::size_t cc = *train.class_column;
  Encoding enc;
  enc.class_name = train.header[cc];
  {
    std::vector<std::string> labels;
    labels.reserve(train.n());
    for (const auto& r : train.rows) labels.push_back(r[cc]);
    enc.class_levels = detail::sorted_distinct(std::move(labels));
  }
  std::vector<Category> classes(train.n());
  for (std::size_t i = 0; i < train.n(); ++i) {
    const auto& lv = enc.class_levels;
    classes[i] = static_cast<Category>(std::lower_bound(lv.begin(), lv.end(), train.rows[i][cc]) - lv.begin());
  }

  const auto features = train.feature_columns();
  const bool use_mdlp = opts.mode == DiscretizeMode::mdlp ||
                        (opts.mode == DiscretizeMode::automatic && features.size() <= opts.mdlp_max_features);
  for (auto c : features) {
    ColumnEncoding col;
    col.name = train.header[c];
    std::vector<double> numeric;
    numeric.reserve(train.n());
    bool is_numeric = true;
    for (const auto& r : train.rows) {
      const auto v = detail::parse_number(r[c]);
      if (!v) {
        is_numeric = false;
        break;
      }
      numeric.push_back(*v);
    }
    std::vector<std::string> cells;
    cells.reserve(train.n());
    for (const auto& r : train.rows) cells.push_back(r[c]);
    auto distinct = detail::sorted_distinct(cells);
    if (is_numeric && distinct.size() > opts.max_categorical_levels) {
      col.kind = ColumnEncoding::Kind::numeric;
      col.cutpoints = use_mdlp ? discretize_mdlp(numeric, classes) : discretize_binary(numeric);
    } else {
      col.kind = ColumnEncoding::Kind::categorical;
      if (is_numeric) {
        // Order numerically so "10" sorts after "9".
        std::stable_sort(distinct.begin(), distinct.end(), [](const std::string& a, const std::string& b) {
          return *detail::parse_number(a) < *detail::parse_number(b);
        });
      }
      col.categories = std::move(distinct);
    }
    enc.columns.push_back(std::move(col));
  }
  return enc;
}

// Maps a table onto category indices using a fitted encoding. Test values past
// the outer thresholds land in the outermost bins; categories (and class
// labels) unseen during fitting get one reserved extra index.
inline Dataset apply_cutpoints(const RawTable& table, const Encoding& enc) {
  const auto features = table.feature_columns();
  if (features.size() != enc.d()) {
    throw ValidationError("table has " + std::to_string(features.size()) + " feature columns, encoding expects " +
                          std::to_string(enc.d()));
  }
  const std::size_t n = table.n();
  const std::size_t d = enc.d();
  std::vector<Category> values(n * d);
  std::vector<std::size_t> arities(d);
  std::vector<std::string> names(d);
  std::vector<std::vector<double>> cuts(d);
  for (std::size_t j = 0; j < d; ++j) {
    const auto& col = enc.columns[j];
    const std::size_t c = features[j];
    names[j] = col.name;
    cuts[j] = col.cutpoints;
    arities[j] = col.arity();
    bool unseen = false;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& cell = table.rows[i][c];
      Category x = 0;
      if (col.kind == ColumnEncoding::Kind::numeric) {
        const auto v = detail::parse_number(cell);
        if (!v) throw ParseError("non-numeric value '" + cell + "' in numeric column " + col.name);
        x = bin_of(*v, col.cutpoints);
      } else {
        const auto it = std::find(col.categories.begin(), col.categories.end(), cell);
        if (it == col.categories.end()) {
          x = static_cast<Category>(col.categories.size());
          unseen = true;
        } else {
          x = static_cast<Category>(it - col.categories.begin());
        }
      }
      values[j * n + i] = x;
    }
    if (unseen) ++arities[j];
  }
  std::vector<Category> labels;
  std::size_t class_arity = enc.class_levels.size();
  if (table.class_column) {
    labels.resize(n);
    bool unseen = false;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& cell = table.rows[i][*table.class_column];
      const auto it = std::find(enc.class_levels.begin(), enc.class_levels.end(), cell);
      if (it == enc.class_levels.end()) {
        labels[i] = static_cast<Category>(enc.class_levels.size());
        unseen = true;
      } else {
        labels[i] = static_cast<Category>(it - enc.class_levels.begin());
      }
    }
    if (unseen) ++class_arity;
  }
  return Dataset(n, std::move(values), std::move(arities), std::move(labels), std::max<std::size_t>(class_arity, 2),
                 std::move(names), std::move(cuts));
}

inline nlohmann::json encoding_report(const Encoding& enc) {
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& c : enc.columns) {
    nlohmann::json jc{{"name", c.name}, {"arity", c.arity()}};
    if (c.kind == ColumnEncoding::Kind::numeric) {
      jc["kind"] = "numeric";
      jc["cutpoints"] = c.cutpoints;
    } else {
      jc["kind"] = "categorical";
      jc["categories"] = c.categories;
    }
    cols.push_back(std::move(jc));
  }
  return {{"columns", std::move(cols)}, {"class", {{"name", enc.class_name}, {"levels", enc.class_levels}}}};
}

// ---------------------------------------------------------------------------
// Cross-validation folds
// ---------------------------------------------------------------------------

struct FoldPlan {
  std::size_t k = 0;
  std::vector<std::size_t> assignment;
  std::uint64_t seed = 0;

  std::vector<std::size_t> test_rows(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignment.size(); ++i)
      if (assignment[i] == fold) out.push_back(i);
    return out;
  }
  std::vector<std::size_t> train_rows(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignment.size(); ++i)
      if (assignment[i] != fold) out.push_back(i);
    return out;
  }
  std::vector<std::size_t> fold_sizes() const {
    std::vector<std::size_t> sizes(k, 0);
    for (auto f : assignment) ++sizes[f];
    return sizes;
  }
};

// Random permutation cut into k near-equal folds; the first n % k folds get
// the extra row.
inline FoldPlan make_folds(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("fold count must be at least 2");
  if (n < k) throw ConfigError("cannot make " + std::to_string(k) + " folds from " + std::to_string(n) + " rows");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(perm));
  FoldPlan plan{k, std::vector<std::size_t>(n), seed};
  const std::size_t base = n / k, extra = n % k;
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = base + (f < extra ? 1 : 0);
    for (std::size_t s = 0; s < size; ++s) plan.assignment[perm[pos++]] = f;
  }
  return plan;
}

}  // namespace sbfc
