#include <cstdlib>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "sbfc/commands.hpp"

namespace {

using sbfc::cli::RunConfig;

void set_log_level() {
  const char* env = std::getenv("SBFC_LOG");
  spdlog::set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
}

void add_data_flags(CLI::App* app, RunConfig& cfg) {
  app->add_option("--data", cfg.data, "Training data file (delimited text)");
  app->add_option("--class-col", cfg.class_col, "Class column name or 0-based index (default: last)");
  app->add_option_function<std::string>(
         "--delim",
         [&cfg](const std::string& s) {
           if (s == "\\t" || s == "tab")
             cfg.delim = '\t';
           else if (s.size() == 1)
             cfg.delim = s[0];
           else
             throw CLI::ValidationError("--delim", "must be a single character");
         },
         "Field delimiter (default ',')");
  app->add_flag("!--no-header", cfg.has_header, "Input files have no header row");
  const std::map<std::string, sbfc::DiscretizeMode> modes{{"auto", sbfc::DiscretizeMode::automatic},
                                                          {"mdlp", sbfc::DiscretizeMode::mdlp},
                                                          {"binary", sbfc::DiscretizeMode::binary}};
  app->add_option("--discretize", cfg.discretize, "Discretization: auto, mdlp or binary")
      ->transform(CLI::CheckedTransformer(modes, CLI::ignore_case));
}

void add_sampler_flags(CLI::App* app, RunConfig& cfg) {
  app->add_option("--iters", cfg.iters, "MCMC iterations (default max(10000, 10 d))");
  app->add_option("--thin", cfg.thin, "Thinning factor")->check(CLI::PositiveNumber);
  app->add_option("--burnin", cfg.burnin, "Burn-in fraction in [0, 1)")->check(CLI::Range(0.0, 0.999999));
  app->add_option("--switch-k", cfg.switch_k, "Trees proposed per Switch Trees sweep");
  app->add_option("--alpha", cfg.alpha, "Dirichlet total pseudo-count")->check(CLI::PositiveNumber);
  app->add_option("--seed", cfg.seed, "RNG seed");
  app->add_option("--chains", cfg.chains, "Independent chains")->check(CLI::PositiveNumber);
}

int run(int argc, char** argv) {
  set_log_level();
  RunConfig cfg;
  CLI::App app{"Selective Bayesian Forest Classifier"};
  app.require_subcommand(1);

  auto* train = app.add_subcommand("train", "Sample graphs and write a trace");
  add_data_flags(train, cfg);
  add_sampler_flags(train, cfg);
  train->add_option("--trace-out", cfg.trace_out, "Trace output (JSON lines)");
  train->add_option("--json-out", cfg.json_out, "Feature rankings JSON");
  train->add_option("--dump-scores", cfg.dump_scores, "Per-family score breakdown of the last sample (JSON)");

  auto* predict = app.add_subcommand("predict", "Classify a test file from a trace");
  add_data_flags(predict, cfg);
  predict->add_option("--test", cfg.test, "Test data file");
  predict->add_option("--trace", cfg.trace, "Trace produced by train");
  predict->add_option("--pred-out", cfg.pred_out, "Predictions CSV (default stdout)");
  predict->add_option("--metrics-out", cfg.metrics_out, "Metrics JSON");
  predict->add_flag("--accuracy", cfg.require_accuracy, "Fail unless the test file carries labels");

  auto* cv = app.add_subcommand("cv", "k-fold cross-validation");
  add_data_flags(cv, cfg);
  add_sampler_flags(cv, cfg);
  cv->add_option("--cv", cfg.cv_k, "Fold count")->check(CLI::Range(2, 1000000));
  cv->add_option("--metrics-out", cfg.metrics_out, "Metrics JSON");

  auto* graph = app.add_subcommand("graph", "Average graph as DOT and JSON");
  graph->add_option("--trace", cfg.trace, "Trace produced by train");
  graph->add_option("--dot-out", cfg.dot_out, "DOT output (default stdout)");
  graph->add_option("--json-out", cfg.json_out, "Average graph JSON");
  const std::map<std::string, sbfc::cli::HighDim> hd{{"auto", sbfc::cli::HighDim::automatic},
                                                     {"on", sbfc::cli::HighDim::on},
                                                     {"off", sbfc::cli::HighDim::off}};
  graph->add_option("--high-dim", cfg.high_dim, "Omit mostly-noise nodes: auto, on, off")
      ->transform(CLI::CheckedTransformer(hd, CLI::ignore_case));

  auto* oracle = app.add_subcommand("oracle-check", "Compare a long chain with exact enumeration (d <= 5)");
  add_data_flags(oracle, cfg);
  oracle->add_option("--iters", cfg.iters, "Chain length (default 1000000)");
  oracle->add_option("--switch-k", cfg.switch_k, "Trees proposed per Switch Trees sweep");
  oracle->add_option("--alpha", cfg.alpha, "Dirichlet total pseudo-count")->check(CLI::PositiveNumber);
  oracle->add_option("--seed", cfg.seed, "RNG seed");
  oracle->add_option("--tolerance", cfg.oracle_tolerance, "Total-variation gate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? sbfc::exit_codes::ok : sbfc::exit_codes::config;
  }

  spdlog::info("running {}", app.get_subcommands().front()->get_name());
  if (*train) {
    sbfc::cli::cmd_train(cfg, std::cout);
  } else if (*predict) {
    sbfc::cli::cmd_predict(cfg, std::cout);
  } else if (*cv) {
    sbfc::cli::cmd_cv(cfg, std::cout);
  } else if (*graph) {
    sbfc::cli::cmd_graph(cfg, std::cout);
  } else if (*oracle) {
    if (!sbfc::cli::cmd_oracle_check(cfg, std::cout).pass) return sbfc::exit_codes::check_failed;
  }
  return sbfc::exit_codes::ok;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const sbfc::ConfigError& e) {
    spdlog::error("configuration error: {}", e.what());
    return sbfc::exit_codes::config;
  } catch (const sbfc::ParseError& e) {
    spdlog::error("parse error: {}", e.what());
    return sbfc::exit_codes::parse;
  } catch (const sbfc::IoError& e) {
    spdlog::error("I/O error: {}", e.what());
    return sbfc::exit_codes::io;
  } catch (const sbfc::InferenceError& e) {
    spdlog::error("inference error: {}", e.what());
    return sbfc::exit_codes::inference;
  } catch (const sbfc::ValidationError& e) {
    spdlog::error("validation error: {}", e.what());
    return sbfc::exit_codes::validation;
  } catch (const std::exception& e) {
    spdlog::error("internal error: {}", e.what());
    return sbfc::exit_codes::internal;
  }
}
