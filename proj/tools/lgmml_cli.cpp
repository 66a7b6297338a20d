/*
 * Copyright 2026 The lgmml Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lgmml/data.hpp"
#include "lgmml/metrics.hpp"
#include "lgmml/model.hpp"
#include "lgmml/trainer.hpp"

namespace {

using namespace lgmml;
using nlohmann::json;

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

int env_threads() {
  const char* raw = std::getenv("LGMML_THREADS");
  if (raw == nullptr) return 1;
  const int value = std::atoi(raw);
  return value >= 1 ? value : 1;
}

Dataset load_dataset(const std::string& path, bool normalize) {
  Dataset ds = parse_letor_file(path);
  if (ds.queries.empty()) {
    throw ParseError("dataset '" + path + "' contains no documents");
  }
  if (normalize) ds = normalize_l2_per_dimension(std::move(ds));
  return ds;
}

struct ReportOptions {
  std::vector<int> k_list{5, 10, 20};
  std::string format = "tsv";  // or json-lines
};

struct EvalOptions {
  bool transductive = false;
  std::int64_t transductive_iters = 200;
  std::uint64_t seed = 42;
};

struct QueryEval {
  QueryId qid = 0;
  std::vector<double> ndcg;  // aligned with k_list
  double ap = 0.0;
};

struct EvalSummary {
  std::vector<QueryEval> per_query;  // sorted by qid
  std::vector<double> mean_ndcg;
  double map = 0.0;
};

// Weight row used for scoring a labeled candidate set: the trained row for
// a known qid, the stored default otherwise, or a transductively optimized
// row when asked for.
Vector weights_for(const CandidateSet& cs, const RankingModel& model,
                   const EvalOptions& options) {
  if (!options.transductive) return model.phi_for(cs.qid);
  std::mt19937_64 rng(options.seed ^
                      (0x9e3779b97f4a7c15ULL *
                       static_cast<std::uint64_t>(cs.qid + 1)));
  return optimize_phi(cs, model, model.phi_for(cs.qid), model.hyper().zeta,
                      model.hyper().mu, options.transductive_iters, rng);
}

EvalSummary evaluate(const Dataset& ds, const RankingModel& model,
                     const ReportOptions& report, const EvalOptions& options) {
  EvalSummary summary;
  for (const CandidateSet& cs : ds.queries) {
    const Vector phi = weights_for(cs, model, options);
    const std::vector<int> order = rank_candidates(cs, phi, model);
    RankedLabels labels(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      labels[i] = cs.documents[order[i]].label;
    }
    QueryEval qe;
    qe.qid = cs.qid;
    for (int k : report.k_list) qe.ndcg.push_back(ndcg_at_k(labels, k));
    qe.ap = average_precision(labels);
    summary.per_query.push_back(std::move(qe));
  }
  std::sort(summary.per_query.begin(), summary.per_query.end(),
            [](const QueryEval& a, const QueryEval& b) { return a.qid < b.qid; });

  summary.mean_ndcg.resize(report.k_list.size(), 0.0);
  std::vector<double> aps;
  for (const QueryEval& qe : summary.per_query) {
    for (std::size_t i = 0; i < qe.ndcg.size(); ++i) {
      summary.mean_ndcg[i] += qe.ndcg[i];
    }
    aps.push_back(qe.ap);
  }
  for (double& v : summary.mean_ndcg) {
    v /= static_cast<double>(summary.per_query.size());
  }
  summary.map = mean_over_queries(aps);
  return summary;
}

void print_eval(const EvalSummary& summary, const ReportOptions& report,
                std::ostream& out) {
  if (report.format == "tsv") {
    out << "qid";
    for (int k : report.k_list) out << "\tndcg@" << k;
    out << "\tmap\n";
    auto row = [&](const std::string& label, const std::vector<double>& ndcg,
                   double ap) {
      out << label;
      for (double v : ndcg) out << '\t' << format_double(v);
      out << '\t' << format_double(ap) << '\n';
    };
    for (const QueryEval& qe : summary.per_query) {
      row(std::to_string(qe.qid), qe.ndcg, qe.ap);
    }
    row("mean", summary.mean_ndcg, summary.map);
    return;
  }
  auto emit = [&](const json& j) { out << j.dump() << '\n'; };
  for (const QueryEval& qe : summary.per_query) {
    json j;
    j["qid"] = qe.qid;
    for (std::size_t i = 0; i < report.k_list.size(); ++i) {
      j["ndcg@" + std::to_string(report.k_list[i])] = qe.ndcg[i];
    }
    j["map"] = qe.ap;
    emit(j);
  }
  json j;
  j["qid"] = "mean";
  for (std::size_t i = 0; i < report.k_list.size(); ++i) {
    j["ndcg@" + std::to_string(report.k_list[i])] = summary.mean_ndcg[i];
  }
  j["map"] = summary.map;
  emit(j);
}

std::ostream& open_sink(const std::string& path, std::ofstream& file) {
  if (path.empty()) return std::cout;
  file.open(path);
  if (!file) {
    throw IoError("cannot open '" + path + "' for writing");
  }
  return file;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string train_path;
  std::string model_path;
  TrainConfig config;
  bool normalize = false;
};

int cmd_train(const TrainArgs& args) {
  const auto started = std::chrono::steady_clock::now();
  const Dataset ds = load_dataset(args.train_path, args.normalize);
  TrainStats stats;
  const RankingModel model = train(ds.queries, args.config, &stats);
  save_model_file(model, args.model_path);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();
  double tail_loss = 0.0;
  const std::size_t tail =
      std::max<std::size_t>(1, stats.losses.size() / 10);
  if (!stats.losses.empty()) {
    for (std::size_t i = stats.losses.size() - tail; i < stats.losses.size();
         ++i) {
      tail_loss += stats.losses[i];
    }
    tail_loss /= static_cast<double>(tail);
  }
  // Summary goes to stderr so written artifacts stay byte-reproducible.
  std::cerr << "trained m=" << args.config.num_metrics << " T="
            << args.config.iterations << " wall=" << seconds
            << "s sampled-loss=" << tail_loss << " updates=" << stats.updates
            << " skipped=" << stats.skipped << '\n';
  return 0;
}

struct EvalArgs {
  std::string test_path;
  std::string model_path;
  std::string out_path;
  ReportOptions report;
  EvalOptions options;
  bool normalize = false;
};

int cmd_eval(const EvalArgs& args) {
  const Dataset ds = load_dataset(args.test_path, args.normalize);
  const RankingModel model = load_model_file(args.model_path);
  const EvalSummary summary = evaluate(ds, model, args.report, args.options);
  std::ofstream file;
  print_eval(summary, args.report, open_sink(args.out_path, file));
  return 0;
}

struct RankArgs {
  std::string test_path;
  std::string model_path;
  std::string out_path;
  bool normalize = false;
};

int cmd_rank(const RankArgs& args) {
  const Dataset ds = load_dataset(args.test_path, args.normalize);
  const RankingModel model = load_model_file(args.model_path);
  std::ofstream file;
  std::ostream& out = open_sink(args.out_path, file);
  out << "qid\trank\tdoc\tscore\n";
  std::vector<const CandidateSet*> ordered;
  for (const CandidateSet& cs : ds.queries) ordered.push_back(&cs);
  std::sort(ordered.begin(), ordered.end(),
            [](const CandidateSet* a, const CandidateSet* b) {
              return a->qid < b->qid;
            });
  for (const CandidateSet* cs : ordered) {
    const Vector phi = model.phi_for(cs->qid);
    const std::vector<int> order = rank_candidates(*cs, phi, model);
    for (std::size_t position = 0; position < order.size(); ++position) {
      const double value =
          score(cs->documents[order[position]].features, phi, model);
      out << cs->qid << '\t' << (position + 1) << '\t' << order[position]
          << '\t' << format_double(value) << '\n';
    }
  }
  return 0;
}

struct SweepArgs {
  std::string train_path;
  std::string test_path;
  std::string out_path;
  std::vector<int> m_list;
  TrainConfig config;
  ReportOptions report;
  EvalOptions options;
  bool normalize = false;
};

int cmd_sweep(const SweepArgs& args) {
  std::set<int> unique(args.m_list.begin(), args.m_list.end());
  if (unique.size() != args.m_list.size()) {
    throw ConfigError("duplicate values in --m-list");
  }
  const Dataset train_ds = load_dataset(args.train_path, args.normalize);
  const Dataset test_ds = load_dataset(args.test_path, args.normalize);

  std::ofstream file;
  std::ostream& out = open_sink(args.out_path, file);
  if (args.report.format == "tsv") {
    out << "m\tmap";
    for (int k : args.report.k_list) out << "\tndcg@" << k;
    out << "\tseconds\n";
  }
  for (int m : args.m_list) {
    TrainConfig config = args.config;
    config.num_metrics = m;
    const auto started = std::chrono::steady_clock::now();
    const RankingModel model = train(train_ds.queries, config);
    const double seconds = std::chrono::duration<double>(
                               std::chrono::steady_clock::now() - started)
                               .count();
    const EvalSummary summary =
        evaluate(test_ds, model, args.report, args.options);
    if (args.report.format == "tsv") {
      out << m << '\t' << format_double(summary.map);
      for (double v : summary.mean_ndcg) out << '\t' << format_double(v);
      out << '\t' << format_double(seconds) << '\n';
    } else {
      json j;
      j["m"] = m;
      j["map"] = summary.map;
      for (std::size_t i = 0; i < args.report.k_list.size(); ++i) {
        j["ndcg@" + std::to_string(args.report.k_list[i])] =
            summary.mean_ndcg[i];
      }
      j["seconds"] = seconds;
      out << j.dump() << '\n';
    }
  }
  return 0;
}

struct SynthArgs {
  std::string out_path;
  std::string holdout_path;
  double holdout_fraction = 0.3;
  bool normalize = false;
  SynthConfig config;
};

int cmd_synth(const SynthArgs& args) {
  Dataset ds = synth_gaussian(args.config);
  if (args.normalize) ds = normalize_l2_per_dimension(std::move(ds));
  if (args.holdout_path.empty()) {
    write_letor_file(ds, args.out_path);
  } else {
    const auto [train_ds, holdout_ds] =
        split_by_documents(ds, args.holdout_fraction);
    write_letor_file(train_ds, args.out_path);
    write_letor_file(holdout_ds, args.holdout_path);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learning-to-rank with localized geometric-mean metrics"};
  app.require_subcommand(1);

  TrainArgs train_args;
  EvalArgs eval_args;
  RankArgs rank_args;
  SweepArgs sweep_args;
  SynthArgs synth_args;
  train_args.config.threads = env_threads();
  sweep_args.config.threads = env_threads();

  auto add_train_flags = [](CLI::App* cmd, TrainConfig& config) {
    cmd->add_option("--m", config.num_metrics, "number of local metrics");
    cmd->add_option("--iters", config.iterations, "WARP SGD iterations");
    cmd->add_option("--mu", config.mu, "SGD step size");
    cmd->add_option("--zeta", config.zeta, "hinge margin");
    cmd->add_option("--lambda", config.lambda, "GMML regularizer");
    cmd->add_option("--phi-init", config.phi_init, "initial weight value");
    cmd->add_option("--hi-label", config.hi_label_threshold,
                    "minimum high-relevance label (0 = auto)");
    cmd->add_option("--max-draws", config.max_violator_draws,
                    "violator draw budget (0 = pool size)");
    cmd->add_option("--seed", config.seed, "RNG seed");
    cmd->add_option("--subset-fraction", config.subset_fraction,
                    "fraction of queries pooled per basis fit");
    cmd->add_option("--threads", config.threads,
                    "worker threads (1 = deterministic)");
  };
  auto add_report_flags = [](CLI::App* cmd, ReportOptions& report) {
    cmd->add_option("--k", report.k_list, "NDCG cutoffs")->delimiter(',');
    cmd->add_option("--report", report.format, "report format")
        ->check(CLI::IsMember({"tsv", "json-lines"}));
  };

  CLI::App* train_cmd = app.add_subcommand("train", "train a ranking model");
  train_cmd->add_option("--train", train_args.train_path, "training file")
      ->required();
  train_cmd->add_option("--model", train_args.model_path, "model output path")
      ->required();
  train_cmd->add_flag("--normalize", train_args.normalize,
                      "normalize each feature dimension by its 2-norm");
  add_train_flags(train_cmd, train_args.config);

  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a model");
  eval_cmd->add_option("--test", eval_args.test_path, "labeled test file")
      ->required();
  eval_cmd->add_option("--model", eval_args.model_path, "model file")
      ->required();
  eval_cmd->add_option("--out", eval_args.out_path, "report path (stdout)");
  eval_cmd->add_flag("--normalize", eval_args.normalize,
                     "normalize each feature dimension by its 2-norm");
  eval_cmd->add_flag("--transductive", eval_args.options.transductive,
                     "optimize weights on each labeled test candidate set");
  eval_cmd->add_option("--transductive-iters",
                       eval_args.options.transductive_iters,
                       "WARP iterations per test query");
  eval_cmd->add_option("--seed", eval_args.options.seed,
                       "seed for transductive optimization");
  add_report_flags(eval_cmd, eval_args.report);

  CLI::App* rank_cmd = app.add_subcommand("rank", "rank candidate documents");
  rank_cmd->add_option("--test", rank_args.test_path, "candidate file")
      ->required();
  rank_cmd->add_option("--model", rank_args.model_path, "model file")
      ->required();
  rank_cmd->add_option("--out", rank_args.out_path, "ranking path (stdout)");
  rank_cmd->add_flag("--normalize", rank_args.normalize,
                     "normalize each feature dimension by its 2-norm");

  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "train and evaluate across metric counts");
  sweep_cmd->add_option("--train", sweep_args.train_path, "training file")
      ->required();
  sweep_cmd->add_option("--test", sweep_args.test_path, "validation file")
      ->required();
  sweep_cmd->add_option("--m-list", sweep_args.m_list, "metric counts")
      ->required()
      ->delimiter(',');
  sweep_cmd->add_option("--out", sweep_args.out_path, "report path (stdout)");
  sweep_cmd->add_flag("--normalize", sweep_args.normalize,
                      "normalize each feature dimension by its 2-norm");
  sweep_cmd->add_flag("--transductive", sweep_args.options.transductive,
                      "optimize weights on each labeled validation set");
  sweep_cmd->add_option("--transductive-iters",
                        sweep_args.options.transductive_iters,
                        "WARP iterations per validation query");
  add_train_flags(sweep_cmd, sweep_args.config);
  add_report_flags(sweep_cmd, sweep_args.report);

  CLI::App* synth_cmd =
      app.add_subcommand("synth", "generate a synthetic Gaussian dataset");
  synth_cmd->add_option("--out", synth_args.out_path, "output file")
      ->required();
  synth_cmd->add_option("--classes", synth_args.config.num_classes,
                        "number of classes");
  synth_cmd->add_option("--points", synth_args.config.points_per_class,
                        "points per class");
  synth_cmd->add_option("--dim", synth_args.config.dim, "feature dimension");
  synth_cmd->add_option("--spread", synth_args.config.center_spread,
                        "side of the center hypercube");
  synth_cmd->add_option("--seed", synth_args.config.seed, "RNG seed");
  synth_cmd->add_flag("--no-mixed-query{false}",
                      synth_args.config.include_mixed_query,
                      "omit the mixed all-classes query");
  synth_cmd->add_option("--holdout-out", synth_args.holdout_path,
                        "also write a held-out split here");
  synth_cmd->add_option("--holdout-fraction", synth_args.holdout_fraction,
                        "fraction of documents held out per query");
  synth_cmd->add_flag("--normalize", synth_args.normalize,
                      "normalize before writing (and before splitting)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (train_cmd->parsed()) return cmd_train(train_args);
    if (eval_cmd->parsed()) return cmd_eval(eval_args);
    if (rank_cmd->parsed()) return cmd_rank(rank_args);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep_args);
    if (synth_cmd->parsed()) return cmd_synth(synth_args);
  } catch (const ConfigError& e) {
    std::cerr << "lgmml: config error: " << e.what() << '\n';
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "lgmml: parse error: " << e.what() << '\n';
    return 3;
  } catch (const ModelFormatError& e) {
    std::cerr << "lgmml: model format error: " << e.what() << '\n';
    return 3;
  } catch (const IoError& e) {
    std::cerr << "lgmml: io error: " << e.what() << '\n';
    return 3;
  } catch (const Error& e) {
    std::cerr << "lgmml: numeric error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "lgmml: error: " << e.what() << '\n';
    return 4;
  }
  return 2;
}
