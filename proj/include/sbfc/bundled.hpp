#pragma once

#include <string>
#include <vector>

#include "sbfc/dataio.hpp"
#include "sbfc/random.hpp"

// Small built-in datasets used by the oracle check, tests and benchmarks.
namespace sbfc::bundled {

// corral: class = (A0 and A1) or (B0 and B1); Irrelevant is independent of
// everything; Correlated matches the class on 3 of every 4 copies of each of
// the 32 combinations of the first five features (128 rows).
inline RawTable corral_table() {
  RawTable t;
  t.header = {"A0", "A1", "B0", "B1", "Irrelevant", "Correlated", "class"};
  t.class_column = 6;
  for (int copy = 0; copy < 4; ++copy) {
    for (int combo = 0; combo < 32; ++combo) {
      const int a0 = combo >> 4 & 1, a1 = combo >> 3 & 1, b0 = combo >> 2 & 1, b1 = combo >> 1 & 1, irr = combo & 1;
      const int cls = (a0 & a1) | (b0 & b1);
      const int corr = copy < 3 ? cls : 1 - cls;
      t.rows.push_back({std::to_string(a0), std::to_string(a1), std::to_string(b0), std::to_string(b1),
                        std::to_string(irr), std::to_string(corr), std::to_string(cls)});
    }
  }
  return t;
}

inline Dataset corral() { return apply_cutpoints(corral_table(), fit_encoding(corral_table())); }

// Tiny synthetic sets (n = 20) for exact-enumeration checks. X1 tracks the
// class, X2 tracks X1, X3 is weakly tied to X2.
inline RawTable tiny_table(std::size_t d) {
  static const int y[20] = {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1};
  static const int x1[20] = {0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0};
  static const int x2[20] = {0, 0, 0, 0, 0, 1, 1, 1, 1, 0, 1, 1, 1, 1, 0, 0, 1, 0, 1, 0};
  static const int x3[20] = {0, 1, 0, 0, 1, 1, 0, 1, 1, 0, 1, 0, 1, 1, 0, 1, 1, 0, 0, 0};
  const int* cols[3] = {x1, x2, x3};
  if (d < 1 || d > 3) throw ConfigError("tiny dataset exists for d in {1, 2, 3}");
  RawTable t;
  for (std::size_t j = 0; j < d; ++j) t.header.push_back("X" + std::to_string(j + 1));
  t.header.push_back("class");
  t.class_column = d;
  for (int i = 0; i < 20; ++i) {
    std::vector<std::string> row;
    for (std::size_t j = 0; j < d; ++j) row.push_back(std::to_string(cols[j][i]));
    row.push_back(std::to_string(y[i]));
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline Dataset tiny(std::size_t d) { return apply_cutpoints(tiny_table(d), fit_encoding(tiny_table(d))); }

// Appends columns made by copying a uniformly chosen original feature and
// permuting its rows, until the dataset has target_d features.
inline Dataset augment_with_shuffled_noise(const Dataset& base, std::size_t target_d, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<Category>> columns;
  std::vector<std::size_t> arities;
  std::vector<std::string> names;
  for (std::size_t k = base.d(); k < target_d; ++k) {
    const auto src = static_cast<std::size_t>(rng.below(base.d()));
    const auto col = base.column(src);
    std::vector<Category> values(col.begin(), col.end());
    rng.shuffle(std::span<Category>(values));
    columns.push_back(std::move(values));
    arities.push_back(base.arity(src));
    names.push_back("noise" + std::to_string(k + 1 - base.d()) + "_" + base.feature_names()[src]);
  }
  return base.with_extra_columns(columns, arities, names);
}

// Uniform random categorical data; the class is a noisy copy of feature 0.
inline Dataset random_dataset(std::size_t n, std::size_t d, std::size_t arity, std::size_t class_arity,
                              std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Category> values(n * d);
  for (auto& v : values) v = static_cast<Category>(rng.below(arity));
  std::vector<Category> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = rng.uniform() < 0.7 ? static_cast<Category>(values[i] % class_arity)
                                    : static_cast<Category>(rng.below(class_arity));
  }
  return Dataset(n, std::move(values), std::vector<std::size_t>(d, arity), std::move(labels), class_arity);
}

}  // namespace sbfc::bundled
