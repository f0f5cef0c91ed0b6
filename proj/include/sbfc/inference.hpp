#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sbfc/sampler.hpp"

namespace sbfc {

struct Prediction {
  std::vector<double> class_probs;
  std::size_t label = 0;
};

// Lowest index wins ties.
inline std::size_t argmax(std::span<const double> values) {
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

inline std::vector<double> normalize_log_probs(std::span<const double> logp) {
  const double mx = *std::max_element(logp.begin(), logp.end());
  double total = 0.0;
  std::vector<double> out(logp.size());
  for (std::size_t i = 0; i < logp.size(); ++i) {
    out[i] = std::exp(logp[i] - mx);
    total += out[i];
  }
  for (auto& p : out) p /= total;
  return out;
}

// Per-graph class posterior from training counts with posterior-mean
// (Dirichlet-smoothed) conditionals. Signal-family count tables are cached,
// so one Predictor should not be shared across threads.
class Predictor {
 public:
  Predictor(const Dataset& train, const Hyperparams& hp) : train_(&train), hp_(hp) {
    const auto counts = train.class_counts();
    const double v = static_cast<double>(train.class_arity());
    const double n = static_cast<double>(train.n());
    log_class_prior_.resize(counts.size());
    for (std::size_t y = 0; y < counts.size(); ++y) {
      log_class_prior_[y] = std::log((static_cast<double>(counts[y]) + hp.alpha / v) / (n + hp.alpha));
    }
  }

  std::size_t class_arity() const { return log_class_prior_.size(); }

  std::vector<double> log_scores(const Graph& g, std::span<const Category> x) {
    if (x.size() != g.size() || g.size() != train_->d()) throw ValidationError("prediction: dimension mismatch");
    std::vector<double> logp = log_class_prior_;
    const std::size_t v = class_arity();
    for (Feature j = 0; j < g.size(); ++j) {
      if (g.group(j) != Group::signal) continue;
      const Feature p = g.parent(j);
      const CountTable& ct = table(j, p);
      const double w = static_cast<double>(ct.parent_config_arity);
      const double a_row = hp_.alpha / w;
      const double a_cell = hp_.alpha / (w * static_cast<double>(ct.value_arity));
      const bool value_seen = x[j] < ct.value_arity;
      const bool parent_seen = p == kNoParent || x[p] < train_->arity(p);
      for (std::size_t y = 0; y < v; ++y) {
        double cell = 0.0, row = 0.0;
        if (parent_seen) {
          const std::size_t l = (p == kNoParent ? 0 : static_cast<std::size_t>(x[p]) * v) + y;
          row = ct.row_totals[l];
          if (value_seen) cell = ct.at(l, x[j]);
        }
        logp[y] += std::log((cell + a_cell) / (row + a_row));
      }
    }
    return logp;
  }

  std::vector<double> class_probs(const Graph& g, std::span<const Category> x) {
    return normalize_log_probs(log_scores(g, x));
  }

 private:
  const CountTable& table(Feature j, Feature p) {
    const std::uint64_t key = (static_cast<std::uint64_t>(j) << 32) | p;
    auto it = tables_.find(key);
    if (it == tables_.end()) {
      ParentSet ps{p == kNoParent ? std::nullopt : std::optional<Feature>(p), true};
      it = tables_.emplace(key, count_family(*train_, j, ps)).first;
    }
    return it->second;
  }

  const Dataset* train_;
  Hyperparams hp_;
  std::vector<double> log_class_prior_;
  std::unordered_map<std::uint64_t, CountTable> tables_;
};

inline std::vector<double> predict_one(const Graph& g, const Dataset& train, const Hyperparams& hp,
                                       std::span<const Category> x) {
  return Predictor(train, hp).class_probs(g, x);
}

// Equal-weight average of per-graph class posteriors over the trace.
inline Prediction predict_bma(const SampleTrace& trace, Predictor& predictor, std::span<const Category> x) {
  if (trace.empty()) throw InferenceError("cannot predict from an empty trace");
  std::vector<double> mean(predictor.class_arity(), 0.0);
  for (const auto& g : trace.samples) {
    const auto probs = predictor.class_probs(g, x);
    for (std::size_t y = 0; y < mean.size(); ++y) mean[y] += probs[y];
  }
  for (auto& p : mean) p /= static_cast<double>(trace.size());
  Prediction out{std::move(mean), 0};
  out.label = argmax(out.class_probs);
  return out;
}

inline Prediction predict_bma(const SampleTrace& trace, const Dataset& train, const Hyperparams& hp,
                              std::span<const Category> x) {
  Predictor predictor(train, hp);
  return predict_bma(trace, predictor, x);
}

inline std::vector<Prediction> predict_dataset(const SampleTrace& trace, const Dataset& train, const Hyperparams& hp,
                                               const Dataset& test) {
  if (test.d() != train.d()) throw ValidationError("test data has a different feature count than training data");
  Predictor predictor(train, hp);
  std::vector<Prediction> out;
  out.reserve(test.n());
  for (std::size_t i = 0; i < test.n(); ++i) out.push_back(predict_bma(trace, predictor, test.row(i)));
  return out;
}

inline double accuracy(std::span<const Prediction> predictions, std::span<const Category> labels) {
  if (predictions.size() != labels.size() || labels.empty()) throw ValidationError("accuracy: size mismatch");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) correct += predictions[i].label == labels[i] ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

// ---------------------------------------------------------------------------
// Relevance summaries
// ---------------------------------------------------------------------------

struct FeatureRelevance {
  Feature feature = 0;
  double relevance = 0.0;
};

inline std::vector<double> node_relevance(const SampleTrace& trace) {
  if (trace.empty()) throw InferenceError("empty trace");
  const std::size_t d = trace.dimension();
  std::vector<std::size_t> signal(d, 0);
  for (const auto& g : trace.samples)
    for (Feature j = 0; j < d; ++j) signal[j] += g.group(j) == Group::signal ? 1 : 0;
  std::vector<double> out(d);
  for (std::size_t j = 0; j < d; ++j) out[j] = static_cast<double>(signal[j]) / static_cast<double>(trace.size());
  return out;
}

// Group-1 frequency per feature, descending; ties by feature index.
inline std::vector<FeatureRelevance> rank_features(const SampleTrace& trace) {
  const auto rel = node_relevance(trace);
  std::vector<FeatureRelevance> out;
  for (Feature j = 0; j < rel.size(); ++j) out.push_back({j, rel[j]});
  std::stable_sort(out.begin(), out.end(),
                   [](const FeatureRelevance& a, const FeatureRelevance& b) { return a.relevance > b.relevance; });
  return out;
}

struct AverageGraphThresholds {
  double edge_min = 0.10;
  double node_omit = 0.80;
};

struct AverageGraph {
  using Edge = std::pair<Feature, Feature>;

  std::vector<double> node_relevance;
  std::vector<bool> visible;
  std::map<Edge, double> edge_relevance;  // retained edges only
  AverageGraphThresholds thresholds;
  std::size_t sample_count = 0;
};

inline constexpr double kThresholdSlack = 1e-12;

// Undirected node/edge frequencies. Edges below edge_min are dropped; with
// high_dim, nodes in Group 0 more than node_omit of the time are dropped
// together with their edges.
inline AverageGraph build_average_graph(const SampleTrace& trace, bool high_dim,
                                        const AverageGraphThresholds& thresholds = {}) {
  AverageGraph avg;
  avg.thresholds = thresholds;
  avg.sample_count = trace.size();
  avg.node_relevance = node_relevance(trace);
  const std::size_t d = avg.node_relevance.size();
  avg.visible.assign(d, true);
  if (high_dim) {
    for (std::size_t j = 0; j < d; ++j) {
      if (1.0 - avg.node_relevance[j] > thresholds.node_omit + kThresholdSlack) avg.visible[j] = false;
    }
  }
  std::map<AverageGraph::Edge, std::size_t> counts;
  for (const auto& g : trace.samples)
    for (const auto& e : undirected_edges(g)) ++counts[e];
  const double s = static_cast<double>(trace.size());
  for (const auto& [e, c] : counts) {
    const double f = static_cast<double>(c) / s;
    if (f + kThresholdSlack < thresholds.edge_min) continue;
    if (!avg.visible[e.first] || !avg.visible[e.second]) continue;
    avg.edge_relevance[e] = f;
  }
  return avg;
}

namespace detail {

inline std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

inline std::string fixed3(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", x);
  return buf;
}

}  // namespace detail

inline constexpr int kRelevanceBuckets = 10;

inline int relevance_bucket(double relevance) {
  const int b = static_cast<int>(std::floor(relevance * kRelevanceBuckets));
  return std::clamp(b, 0, kRelevanceBuckets - 1);
}

// Pen width linear from 1 at edge_min to 8 at frequency 1.
inline double edge_pen_width(double frequency, double edge_min) {
  const double t = std::clamp((frequency - edge_min) / (1.0 - edge_min), 0.0, 1.0);
  return 1.0 + 7.0 * t;
}

inline std::string export_dot(const AverageGraph& avg, const std::vector<std::string>& names) {
  std::ostringstream os;
  os << "graph sbfc {\n";
  os << "  node [shape=ellipse, style=filled, fontname=\"Helvetica\"];\n";
  for (std::size_t j = 0; j < avg.node_relevance.size(); ++j) {
    if (!avg.visible[j]) continue;
    const int b = relevance_bucket(avg.node_relevance[j]);
    const std::string name = j < names.size() ? names[j] : "X" + std::to_string(j + 1);
    os << "  n" << j << " [label=\"" << detail::dot_escape(name) << "\", fillcolor=\"gray"
       << (95 - 10 * b) << "\", fontcolor=\"" << (b >= 5 ? "white" : "black") << "\", tooltip=\""
       << detail::fixed3(avg.node_relevance[j]) << "\"];\n";
  }
  for (const auto& [e, f] : avg.edge_relevance) {
    os << "  n" << e.first << " -- n" << e.second << " [penwidth=" << detail::fixed3(edge_pen_width(f, avg.thresholds.edge_min))
       << ", tooltip=\"" << detail::fixed3(f) << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

inline nlohmann::json average_graph_json(const AverageGraph& avg, const std::vector<std::string>& names) {
  nlohmann::json nodes = nlohmann::json::array();
  for (std::size_t j = 0; j < avg.node_relevance.size(); ++j) {
    if (avg.visible[j]) nodes.push_back({{"name", names.at(j)}, {"relevance", avg.node_relevance[j]}});
  }
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& [e, f] : avg.edge_relevance) {
    edges.push_back({{"a", names.at(e.first)}, {"b", names.at(e.second)}, {"relevance", f}});
  }
  return {{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

inline nlohmann::json rankings_json(const std::vector<FeatureRelevance>& ranking,
                                    const std::vector<std::string>& names) {
  nlohmann::json out = nlohmann::json::array();
  std::size_t rank = 1;
  for (const auto& r : ranking) {
    out.push_back({{"rank", rank++}, {"feature", r.feature}, {"name", names.at(r.feature)}, {"relevance", r.relevance}});
  }
  return out;
}

}  // namespace sbfc
