#pragma once

#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "sbfc/bundled.hpp"
#include "sbfc/dataio.hpp"
#include "sbfc/inference.hpp"
#include "sbfc/sampler.hpp"

// Subcommand implementations behind the sbfc CLI. Each throws one of the
// error types in error.hpp on failure; the CLI maps them to exit codes.
namespace sbfc::cli {

enum class HighDim { automatic, on, off };

struct RunConfig {
  std::string data;
  std::string test;
  std::string trace;  // input trace for predict / graph
  std::string class_col;  // name or 0-based index; empty = last column
  char delim = ',';
  bool has_header = true;
  DiscretizeMode discretize = DiscretizeMode::automatic;
  std::optional<std::size_t> iters;  // unset = max(10000, 10 d)
  std::size_t thin = 50;
  double burnin = 0.2;
  std::size_t switch_k = 10;
  double alpha = 5.0;
  std::uint64_t seed = 1;
  std::size_t chains = 1;
  std::size_t cv_k = 5;
  std::string trace_out = "sbfc_trace.jsonl";
  std::string dot_out;
  std::string json_out;
  std::string metrics_out;
  std::string pred_out;
  std::string dump_scores;
  HighDim high_dim = HighDim::automatic;
  bool require_accuracy = false;
  std::set<std::string> missing_tokens = default_missing_tokens();
  double oracle_tolerance = 0.05;
};

inline constexpr std::size_t kOracleDefaultIterations = 1000000;
inline constexpr std::size_t kHighDimThreshold = 100;

namespace detail {

inline ColumnRef class_ref(const std::string& s) {
  if (s.empty()) return std::monostate{};
  if (std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; })) return std::stoul(s);
  return s;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path + "'");
}

inline DiscretizeOptions discretize_options(const RunConfig& cfg) {
  DiscretizeOptions opts;
  opts.mode = cfg.discretize;
  return opts;
}

struct PreparedData {
  RawTable table;
  Encoding encoding;
  Dataset dataset;
};

inline PreparedData prepare_training(const RunConfig& cfg) {
  if (cfg.data.empty()) throw ConfigError("--data is required");
  auto table = drop_missing(load_table(cfg.data, LoadOptions{cfg.delim, cfg.has_header, class_ref(cfg.class_col)}),
                            cfg.missing_tokens);
  auto enc = fit_encoding(table, discretize_options(cfg));
  auto ds = apply_cutpoints(table, enc);
  return {std::move(table), std::move(enc), std::move(ds)};
}

inline SamplerConfig sampler_config(const RunConfig& cfg, std::size_t d) {
  SamplerConfig sc;
  sc.iterations = cfg.iters.value_or(SamplerConfig::default_iterations(d));
  sc.thin = cfg.thin;
  sc.burnin_fraction = cfg.burnin;
  sc.switch_k = cfg.switch_k;
  sc.seed = cfg.seed;
  sc.validate();
  return sc;
}

inline std::string format_prob(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", p);
  return buf;
}

}  // namespace detail

inline const char* discretize_name(DiscretizeMode m) {
  switch (m) {
    case DiscretizeMode::mdlp: return "mdlp";
    case DiscretizeMode::binary: return "binary";
    default: return "auto";
  }
}

// Samples graphs for the training file; writes the trace, rankings, column
// report and a run manifest. Returns the trace.
inline SampleTrace cmd_train(const RunConfig& cfg, std::ostream& out) {
  if (cfg.trace_out.empty()) throw ConfigError("--trace-out must not be empty");
  const auto prepared = detail::prepare_training(cfg);
  const Dataset& ds = prepared.dataset;
  const auto hp = Hyperparams::for_data(ds, cfg.alpha);
  const auto sc = detail::sampler_config(cfg, ds.d());
  const auto trace = run_chains(ds, hp, sc, cfg.chains);

  {
    std::ofstream f(cfg.trace_out, std::ios::binary);
    if (!f) throw IoError("cannot write '" + cfg.trace_out + "'");
    write_trace_jsonl(f, trace);
  }
  const auto ranking = rank_features(trace);
  const std::string rankings_path = cfg.json_out.empty() ? cfg.trace_out + ".rankings.json" : cfg.json_out;
  detail::write_text(rankings_path, nlohmann::json{{"rankings", rankings_json(ranking, ds.feature_names())}}.dump(2) + "\n");
  detail::write_text(cfg.trace_out + ".columns.json", encoding_report(prepared.encoding).dump(2) + "\n");

  nlohmann::json manifest{{"command", "train"},
                          {"data", cfg.data},
                          {"dataset_checksum", table_checksum(prepared.table)},
                          {"n", ds.n()},
                          {"d", ds.d()},
                          {"class_arity", ds.class_arity()},
                          {"class_col", cfg.class_col},
                          {"delim", std::string(1, cfg.delim)},
                          {"discretize", discretize_name(cfg.discretize)},
                          {"alpha", hp.alpha},
                          {"sampler", sc},
                          {"chains", cfg.chains},
                          {"rng", std::string(Rng::algorithm)},
                          {"samples", trace.size()},
                          {"trace", cfg.trace_out},
                          {"rankings", rankings_path}};
  detail::write_text(cfg.trace_out + ".manifest.json", manifest.dump(2) + "\n");

  if (!cfg.dump_scores.empty()) {
    FamilyScoreCache cache(ds.d());
    const Scorer scorer(ds, hp, cache);
    detail::write_text(cfg.dump_scores, score_breakdown_json(trace.samples.back(), scorer).dump(2) + "\n");
  }

  out << "iterations: " << sc.iterations << "\nsamples: " << trace.size() << "\n";
  out << "top features:\n";
  for (std::size_t r = 0; r < std::min<std::size_t>(10, ranking.size()); ++r) {
    out << "  " << ds.feature_names()[ranking[r].feature] << " " << ranking[r].relevance << "\n";
  }
  return trace;
}

struct PredictReport {
  std::vector<Prediction> predictions;
  std::optional<double> accuracy;
};

inline PredictReport cmd_predict(const RunConfig& cfg, std::ostream& out) {
  if (cfg.test.empty()) throw ConfigError("--test is required");
  if (cfg.trace.empty()) throw ConfigError("--trace is required");
  const auto prepared = detail::prepare_training(cfg);
  const Dataset& train = prepared.dataset;

  std::ifstream tf(cfg.trace);
  if (!tf) throw IoError("cannot open '" + cfg.trace + "'");
  const auto trace = read_trace_jsonl(tf);
  if (trace.empty()) throw InferenceError("trace has no samples");
  if (trace.dimension() != train.d()) {
    throw ValidationError("trace has " + std::to_string(trace.dimension()) + " features, training data has " +
                          std::to_string(train.d()));
  }

  LoadOptions topts{cfg.delim, cfg.has_header, std::monostate{}, false};
  auto test_table = load_table(cfg.test, topts);
  const std::size_t train_width = prepared.table.width();
  if (test_table.width() == train_width) {
    test_table.class_column = *prepared.table.class_column;
  } else if (test_table.width() + 1 == train_width) {
    test_table.class_column.reset();
  } else {
    throw ValidationError("test file has " + std::to_string(test_table.width()) + " columns, expected " +
                          std::to_string(train_width) + " (or one fewer without labels)");
  }
  if (cfg.require_accuracy && !test_table.class_column) {
    throw ConfigError("accuracy requested but the test file has no class column");
  }
  test_table = drop_missing(test_table, cfg.missing_tokens);
  const Dataset test = apply_cutpoints(test_table, prepared.encoding);

  Hyperparams hp = Hyperparams::for_data(train, trace.alpha);
  PredictReport report;
  report.predictions = predict_dataset(trace, train, hp, test);

  std::ostringstream csv;
  csv << "row";
  for (const auto& level : prepared.encoding.class_levels) csv << ",p_" << level;
  csv << ",predicted";
  const bool labeled = test_table.class_column.has_value();
  if (labeled) csv << ",actual";
  csv << "\n";
  const auto level_name = [&](std::size_t y) {
    return y < prepared.encoding.class_levels.size() ? prepared.encoding.class_levels[y] : std::string("<unseen>");
  };
  for (std::size_t i = 0; i < report.predictions.size(); ++i) {
    const auto& p = report.predictions[i];
    csv << i;
    for (double q : p.class_probs) csv << "," << detail::format_prob(q);
    csv << "," << level_name(p.label);
    if (labeled) csv << "," << test_table.rows[i][*test_table.class_column];
    csv << "\n";
  }
  if (cfg.pred_out.empty())
    out << csv.str();
  else
    detail::write_text(cfg.pred_out, csv.str());

  if (labeled) {
    report.accuracy = accuracy(report.predictions, test.labels());
    out << "accuracy: " << *report.accuracy << "\n";
  }
  if (!cfg.metrics_out.empty()) {
    nlohmann::json m{{"n_test", test.n()}};
    m["accuracy"] = report.accuracy ? nlohmann::json(*report.accuracy) : nlohmann::json(nullptr);
    detail::write_text(cfg.metrics_out, m.dump(2) + "\n");
  }
  return report;
}

struct CvFold {
  std::size_t n_test = 0;
  double accuracy = 0.0;
};

struct CvReport {
  std::vector<CvFold> folds;
  double mean_accuracy = 0.0;
};

// k-fold CV on a raw table: discretization is fit on each training fold and
// each fold's chain uses a seed derived from (seed, fold).
inline CvReport cross_validate(const RawTable& table, const RunConfig& cfg) {
  const auto plan = make_folds(table.n(), cfg.cv_k, cfg.seed);
  CvReport report;
  for (std::size_t f = 0; f < plan.k; ++f) {
    const auto train_rows = plan.train_rows(f);
    const auto test_rows = plan.test_rows(f);
    const auto train_table = table.select_rows(train_rows);
    const auto enc = fit_encoding(train_table, detail::discretize_options(cfg));
    const auto train = apply_cutpoints(train_table, enc);
    const auto test = apply_cutpoints(table.select_rows(test_rows), enc);
    const auto hp = Hyperparams::for_data(train, cfg.alpha);
    auto sc = detail::sampler_config(cfg, train.d());
    sc.seed = Rng::derive_seed(cfg.seed, f);
    const auto trace = run_chains(train, hp, sc, cfg.chains);
    const auto preds = predict_dataset(trace, train, hp, test);
    report.folds.push_back({test.n(), accuracy(preds, test.labels())});
  }
  double total = 0.0;
  for (const auto& f : report.folds) total += f.accuracy;
  report.mean_accuracy = total / static_cast<double>(report.folds.size());
  return report;
}

inline CvReport cmd_cv(const RunConfig& cfg, std::ostream& out) {
  if (cfg.data.empty()) throw ConfigError("--data is required");
  const auto table =
      drop_missing(load_table(cfg.data, LoadOptions{cfg.delim, cfg.has_header, detail::class_ref(cfg.class_col)}),
                   cfg.missing_tokens);
  const auto report = cross_validate(table, cfg);
  nlohmann::json folds = nlohmann::json::array();
  for (std::size_t f = 0; f < report.folds.size(); ++f) {
    out << "fold " << (f + 1) << ": n_test=" << report.folds[f].n_test << " accuracy=" << report.folds[f].accuracy
        << "\n";
    folds.push_back({{"fold", f + 1}, {"n_test", report.folds[f].n_test}, {"accuracy", report.folds[f].accuracy}});
  }
  out << "mean accuracy: " << report.mean_accuracy << "\n";
  if (!cfg.metrics_out.empty()) {
    nlohmann::json m{{"k", cfg.cv_k}, {"seed", cfg.seed}, {"folds", folds}, {"mean_accuracy", report.mean_accuracy}};
    detail::write_text(cfg.metrics_out, m.dump(2) + "\n");
  }
  return report;
}

inline AverageGraph cmd_graph(const RunConfig& cfg, std::ostream& out) {
  if (cfg.trace.empty()) throw ConfigError("--trace is required");
  std::ifstream tf(cfg.trace);
  if (!tf) throw IoError("cannot open '" + cfg.trace + "'");
  const auto trace = read_trace_jsonl(tf);
  if (trace.empty()) throw InferenceError("trace has no samples");
  const bool high_dim = cfg.high_dim == HighDim::on ||
                        (cfg.high_dim == HighDim::automatic && trace.dimension() > kHighDimThreshold);
  const auto avg = build_average_graph(trace, high_dim);
  const auto dot = export_dot(avg, trace.feature_names);
  if (cfg.dot_out.empty())
    out << dot;
  else
    detail::write_text(cfg.dot_out, dot);
  if (!cfg.json_out.empty()) {
    auto j = average_graph_json(avg, trace.feature_names);
    j["rankings"] = rankings_json(rank_features(trace), trace.feature_names);
    detail::write_text(cfg.json_out, j.dump(2) + "\n");
  }
  return avg;
}

struct OracleReport {
  double tv = 1.0;
  std::size_t samples = 0;
  std::size_t classes = 0;
  bool pass = false;
};

// Long chain against exact enumeration. A chain with no samples reports TV 1.
inline OracleReport oracle_check(const Dataset& ds, const Hyperparams& hp, std::size_t iterations,
                                 std::size_t switch_k, std::uint64_t seed, double tolerance) {
  if (ds.d() > kDefaultEnumerationLimit) {
    throw ConfigError("oracle check refused: d = " + std::to_string(ds.d()) + " exceeds " +
                      std::to_string(kDefaultEnumerationLimit));
  }
  const auto exact = enumerate_exact_posterior(ds, hp);
  OracleReport r;
  r.classes = exact.size();
  if (iterations > 0) {
    SamplerConfig sc;
    sc.iterations = iterations;
    sc.thin = 1;
    sc.burnin_fraction = 0.0;
    sc.switch_k = switch_k;
    sc.seed = seed;
    ClassTally tally;
    run_chain(ds, hp, sc, [&](const ChainState& s) { tally.add(s.graph); });
    r.samples = tally.total();
    r.tv = total_variation(tally.distribution(), exact);
  }
  r.pass = r.samples > 0 && r.tv < tolerance;
  return r;
}

inline OracleReport cmd_oracle_check(const RunConfig& cfg, std::ostream& out) {
  Dataset ds;
  if (cfg.data.empty()) {
    ds = bundled::tiny(2);
  } else {
    auto table = drop_missing(load_table(cfg.data, LoadOptions{cfg.delim, cfg.has_header, detail::class_ref(cfg.class_col)}),
                              cfg.missing_tokens);
    if (table.d() > kDefaultEnumerationLimit) {
      throw ConfigError("oracle check refused: d = " + std::to_string(table.d()) + " exceeds " +
                        std::to_string(kDefaultEnumerationLimit));
    }
    ds = apply_cutpoints(table, fit_encoding(table, detail::discretize_options(cfg)));
  }
  const auto hp = Hyperparams::for_data(ds, cfg.alpha);
  const auto r = oracle_check(ds, hp, cfg.iters.value_or(kOracleDefaultIterations), cfg.switch_k, cfg.seed,
                              cfg.oracle_tolerance);
  out << "d: " << ds.d() << "\nclasses: " << r.classes << "\nsamples: " << r.samples << "\nTV distance: " << r.tv
      << "\n" << (r.pass ? "PASS" : "FAIL") << " (gate " << cfg.oracle_tolerance << ")\n";
  return r;
}

}  // namespace sbfc::cli
