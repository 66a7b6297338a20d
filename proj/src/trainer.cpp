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
#include "lgmml/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <thread>
#include <utility>

#include "lgmml/data.hpp"
#include "lgmml/gmml.hpp"

namespace lgmml {

namespace {

void validate(const TrainConfig& c) {
  if (c.num_metrics < 1) throw ConfigError("m must be >= 1");
  if (c.iterations < 0) throw ConfigError("iterations must be >= 0");
  if (!(c.mu > 0.0)) throw ConfigError("step size mu must be > 0");
  if (!(c.zeta >= 0.0)) throw ConfigError("hinge margin zeta must be >= 0");
  // lambda == 0 is admitted; rank-deficient scatter sums then surface as
  // NotPositiveDefinite from the certification step.
  if (!(c.lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
  if (!(c.phi_init > 0.0)) throw ConfigError("phi_init must be > 0");
  if (c.hi_label_threshold < 0) {
    throw ConfigError("hi-label threshold must be >= 0");
  }
  if (c.max_violator_draws < 0) {
    throw ConfigError("max violator draws must be >= 0");
  }
  if (!(c.subset_fraction > 0.0) || c.subset_fraction > 1.0) {
    throw ConfigError("subset fraction must be in (0, 1]");
  }
  if (c.threads < 1) throw ConfigError("threads must be >= 1");
}

void check_positive_index(const CandidateSet& cs, int positive_index) {
  if (std::find(cs.positives.begin(), cs.positives.end(), positive_index) ==
      cs.positives.end()) {
    throw InvalidIndex("index " + std::to_string(positive_index) +
                       " is not a positive document of query " +
                       std::to_string(cs.qid));
  }
}

// Shared sampling loop; the scorer is pluggable so the trainer can run it
// over cached per-document gradients.
template <typename ScoreFn>
std::optional<TripleSample> sample_violator_impl(const CandidateSet& cs,
                                                 int positive_index,
                                                 double zeta, int max_draws,
                                                 std::mt19937_64& rng,
                                                 ScoreFn&& score_of) {
  if (cs.negatives.empty()) {
    throw NoNegatives("query " + std::to_string(cs.qid) +
                      " has no zero-label documents");
  }
  if (max_draws <= 0) max_draws = static_cast<int>(cs.negatives.size());
  const double positive_score = score_of(positive_index);
  std::uniform_int_distribution<int> pick(
      0, static_cast<int>(cs.negatives.size()) - 1);
  for (int draw = 1; draw <= max_draws; ++draw) {
    const int candidate = cs.negatives[pick(rng)];
    if (zeta + score_of(candidate) > positive_score) {
      return TripleSample{cs.qid, positive_index, candidate, draw};
    }
  }
  return std::nullopt;
}

}  // namespace

double rank_weight(int k) {
  double sum = 0.0;
  for (int i = 1; i <= k; ++i) {
    sum += 1.0 / std::log2(static_cast<double>(i) + 1.0);
  }
  return sum;
}

int violator_count(const CandidateSet& cs, int positive_index,
                   const Vector& phi_q, const RankingModel& model) {
  check_positive_index(cs, positive_index);
  const double positive_score =
      score(cs.documents[positive_index].features, phi_q, model);
  int count = 0;
  for (int neg : cs.negatives) {
    if (score(cs.documents[neg].features, phi_q, model) >= positive_score) {
      ++count;
    }
  }
  return count;
}

int violator_count_margin(const CandidateSet& cs, int positive_index,
                          const Vector& phi_q, const RankingModel& model,
                          double zeta) {
  check_positive_index(cs, positive_index);
  const double positive_score =
      score(cs.documents[positive_index].features, phi_q, model);
  int count = 0;
  for (int neg : cs.negatives) {
    if (zeta + score(cs.documents[neg].features, phi_q, model) >
        positive_score) {
      ++count;
    }
  }
  return count;
}

std::optional<TripleSample> sample_violator(const CandidateSet& cs,
                                            int positive_index,
                                            const Vector& phi_q,
                                            const RankingModel& model,
                                            double zeta, int max_draws,
                                            std::mt19937_64& rng) {
  check_positive_index(cs, positive_index);
  return sample_violator_impl(
      cs, positive_index, zeta, max_draws, rng, [&](int i) {
        return score(cs.documents[i].features, phi_q, model);
      });
}

Vector phi_gradient(const Vector& p, const RankingModel& model) {
  return score_components(p, model);
}

Vector sgd_step(const Vector& phi_q, const TripleSample& sample,
                const CandidateSet& cs, const RankingModel& model, double mu,
                double zeta, int neg_pool_size) {
  check_positive_index(cs, sample.positive_index);
  if (std::find(cs.negatives.begin(), cs.negatives.end(),
                sample.negative_index) == cs.negatives.end()) {
    throw InvalidIndex("sample negative " +
                       std::to_string(sample.negative_index) +
                       " is not a zero-label document");
  }
  if (sample.draws < 1 || neg_pool_size < 1) {
    throw InvalidSample("sample draws and negative pool must be >= 1");
  }
  const Vector grad_pos =
      phi_gradient(cs.documents[sample.positive_index].features, model);
  const Vector grad_neg =
      phi_gradient(cs.documents[sample.negative_index].features, model);
  // Certify the violator condition with the row being updated.
  const double f_pos = -phi_q.dot(grad_pos);
  const double f_neg = -phi_q.dot(grad_neg);
  if (!(zeta + f_neg > f_pos)) {
    throw InvalidSample("sample is not a violator under the given weights");
  }
  const double weight = rank_weight(neg_pool_size / sample.draws);
  // d f / d phi = -grad, so the hinge derivative is grad_pos - grad_neg.
  Vector updated = phi_q - mu * weight * (grad_pos - grad_neg);
  return updated.cwiseMax(0.0);
}

namespace {

struct PooledFit {
  std::vector<const Document*> docs;
  CandidateSet candidates;  // pooled copy, used for anchor selection
};

// Pools the documents of the chosen queries into one candidate set.
CandidateSet pool_queries(const std::vector<CandidateSet>& queries,
                          const std::vector<int>& chosen) {
  std::vector<Document> docs;
  for (int qi : chosen) {
    docs.insert(docs.end(), queries[qi].documents.begin(),
                queries[qi].documents.end());
  }
  return make_candidate_set(0, std::move(docs));
}

LocalMetric fit_one_basis(const std::vector<CandidateSet>& queries,
                          const TrainConfig& config,
                          const std::vector<int>& chosen) {
  CandidateSet pooled = pool_queries(queries, chosen);
  if (pooled.positives.empty()) {
    // Fall back to the whole collection before giving up.
    std::vector<int> all(queries.size());
    std::iota(all.begin(), all.end(), 0);
    pooled = pool_queries(queries, all);
    if (pooled.positives.empty()) {
      throw NoPositives("no positive documents anywhere in the collection");
    }
  }
  int threshold = config.hi_label_threshold;
  if (threshold <= 0) {
    for (const Document& doc : pooled.documents) {
      threshold = std::max(threshold, doc.label);
    }
  }
  const Partition part = partition_relevance(pooled, threshold);

  const Eigen::Index dim = pooled.documents.front().features.size();
  PairSet similar(dim);
  for (std::size_t a = 0; a < part.hi.size(); ++a) {
    for (std::size_t b = a + 1; b < part.hi.size(); ++b) {
      similar.add(pooled.documents[part.hi[a]].features,
                  pooled.documents[part.hi[b]].features);
    }
  }
  PairSet dissimilar(dim);
  for (int hi : part.hi) {
    for (int neg : part.negatives) {
      dissimilar.add(pooled.documents[hi].features,
                     pooled.documents[neg].features);
    }
  }
  SpdMatrix metric = gmml_fit(similar, dissimilar, GmmlConfig{config.lambda});
  AnchorChoice anchor = select_anchor(metric, pooled);
  return LocalMetric{std::move(anchor.anchor), std::move(metric)};
}

}  // namespace

std::vector<LocalMetric> fit_basis_metrics(
    const std::vector<CandidateSet>& queries, const TrainConfig& config,
    std::mt19937_64& rng) {
  validate(config);
  if (queries.empty()) {
    throw EmptyInput("cannot fit basis metrics without queries");
  }
  const int query_count = static_cast<int>(queries.size());
  const int subset_size = std::clamp(
      static_cast<int>(std::ceil(config.subset_fraction * query_count)), 1,
      query_count);

  // Pre-draw every round's query subset from a cycling shuffled partition,
  // so the fits themselves can run in parallel and rounds tend to cover
  // distinct regions before revisiting one.
  std::vector<std::vector<int>> subsets(config.num_metrics);
  std::vector<int> cycle;
  for (auto& subset : subsets) {
    while (static_cast<int>(subset.size()) < subset_size) {
      if (cycle.empty()) {
        cycle.resize(query_count);
        std::iota(cycle.begin(), cycle.end(), 0);
        std::shuffle(cycle.begin(), cycle.end(), rng);
      }
      const int idx = cycle.back();
      cycle.pop_back();
      if (std::find(subset.begin(), subset.end(), idx) == subset.end()) {
        subset.push_back(idx);
      }
    }
    std::sort(subset.begin(), subset.end());
  }

  std::vector<std::optional<LocalMetric>> fitted(config.num_metrics);
  auto run_range = [&](int begin, int end) {
    for (int i = begin; i < end; ++i) {
      fitted[i] = fit_one_basis(queries, config, subsets[i]);
    }
  };
  const int workers =
      std::min(config.threads, config.num_metrics);
  if (workers <= 1) {
    run_range(0, config.num_metrics);
  } else {
    std::vector<std::thread> threads;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const int per = (config.num_metrics + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const int begin = w * per;
      const int end = std::min(config.num_metrics, begin + per);
      if (begin >= end) break;
      threads.emplace_back([&, begin, end] {
        try {
          run_range(begin, end);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      });
    }
    for (auto& t : threads) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  std::vector<LocalMetric> locals;
  locals.reserve(config.num_metrics);
  for (auto& fit : fitted) locals.push_back(std::move(*fit));
  return locals;
}

namespace {

// Per-document gradient-magnitude rows for one candidate set; the score of
// document i under weights phi is -phi.dot(row(i)).
Matrix gradient_table(const CandidateSet& cs, const RankingModel& model) {
  Matrix table(cs.documents.size(), model.num_metrics());
  for (std::size_t i = 0; i < cs.documents.size(); ++i) {
    table.row(i) = score_components(cs.documents[i].features, model).transpose();
  }
  return table;
}

struct WarpShard {
  std::vector<int> query_indices;
  std::int64_t iterations = 0;
  std::uint64_t seed = 0;
};

void run_warp(const std::vector<CandidateSet>& queries,
              const std::vector<Matrix>& tables, const TrainConfig& config,
              const WarpShard& shard, std::vector<Vector>& rows,
              TrainStats* stats) {
  if (shard.query_indices.empty()) return;
  std::mt19937_64 rng(shard.seed);
  std::uniform_int_distribution<int> pick_query(
      0, static_cast<int>(shard.query_indices.size()) - 1);
  for (std::int64_t t = 0; t < shard.iterations; ++t) {
    if (stats != nullptr) stats->losses.push_back(0.0);
    const int qi = shard.query_indices[pick_query(rng)];
    const CandidateSet& cs = queries[qi];
    if (cs.positives.empty() || cs.negatives.empty()) {
      if (stats != nullptr) ++stats->skipped;
      continue;
    }
    std::uniform_int_distribution<int> pick_positive(
        0, static_cast<int>(cs.positives.size()) - 1);
    const int positive = cs.positives[pick_positive(rng)];
    Vector& row = rows[qi];
    const Matrix& table = tables[qi];
    auto cached_score = [&](int i) { return -row.dot(table.row(i)); };
    const auto sample = sample_violator_impl(cs, positive, config.zeta,
                                             config.max_violator_draws, rng,
                                             cached_score);
    if (!sample) {
      if (stats != nullptr) ++stats->skipped;
      continue;
    }
    const int pool = static_cast<int>(cs.negatives.size());
    const double weight = rank_weight(pool / sample->draws);
    if (stats != nullptr) {
      const double hinge = config.zeta - cached_score(positive) +
                           cached_score(sample->negative_index);
      stats->losses.back() = weight * hinge;
      ++stats->updates;
    }
    const Vector grad_diff =
        (table.row(positive) - table.row(sample->negative_index)).transpose();
    row = (row - config.mu * weight * grad_diff).cwiseMax(0.0);
  }
}

}  // namespace

RankingModel train(const std::vector<CandidateSet>& queries,
                   const TrainConfig& config, TrainStats* stats) {
  validate(config);
  if (queries.empty()) {
    throw EmptyInput("cannot train on an empty query collection");
  }
  std::mt19937_64 rng(config.seed);
  std::vector<LocalMetric> locals = fit_basis_metrics(queries, config, rng);

  Hyper hyper;
  hyper.zeta = config.zeta;
  hyper.mu = config.mu;
  hyper.lambda = config.lambda;
  hyper.iterations = config.iterations;
  hyper.num_metrics = config.num_metrics;
  hyper.seed = config.seed;

  const Vector phi_init =
      Vector::Constant(config.num_metrics, config.phi_init);
  RankingModel metrics_only(locals, {}, phi_init, hyper);

  std::vector<Matrix> tables(queries.size());
  std::vector<Vector> rows(queries.size(), phi_init);
  for (std::size_t q = 0; q < queries.size(); ++q) {
    tables[q] = gradient_table(queries[q], metrics_only);
  }

  const int worker_count =
      std::max(1, std::min<int>(config.threads,
                                static_cast<int>(queries.size())));
  if (worker_count == 1) {
    WarpShard shard;
    shard.query_indices.resize(queries.size());
    std::iota(shard.query_indices.begin(), shard.query_indices.end(), 0);
    shard.iterations = config.iterations;
    shard.seed = rng();
    run_warp(queries, tables, config, shard, rows, stats);
  } else {
    // Disjoint query ownership per worker; weight rows never contend.
    std::vector<WarpShard> shards(worker_count);
    for (std::size_t q = 0; q < queries.size(); ++q) {
      shards[q % worker_count].query_indices.push_back(static_cast<int>(q));
    }
    for (int w = 0; w < worker_count; ++w) {
      shards[w].iterations =
          config.iterations / worker_count +
          (w < config.iterations % worker_count ? 1 : 0);
      shards[w].seed = rng();
    }
    std::vector<TrainStats> shard_stats(worker_count);
    std::vector<std::thread> threads;
    for (int w = 0; w < worker_count; ++w) {
      threads.emplace_back([&, w] {
        run_warp(queries, tables, config, shards[w], rows,
                 stats != nullptr ? &shard_stats[w] : nullptr);
      });
    }
    for (auto& t : threads) t.join();
    if (stats != nullptr) {
      for (const TrainStats& s : shard_stats) {
        stats->losses.insert(stats->losses.end(), s.losses.begin(),
                             s.losses.end());
        stats->updates += s.updates;
        stats->skipped += s.skipped;
      }
    }
  }

  std::map<QueryId, Vector> phi;
  Vector mean_row = Vector::Zero(config.num_metrics);
  for (std::size_t q = 0; q < queries.size(); ++q) {
    phi[queries[q].qid] = rows[q];
    mean_row += rows[q];
  }
  mean_row /= static_cast<double>(queries.size());
  return RankingModel(std::move(locals), std::move(phi), std::move(mean_row),
                      hyper);
}

Vector optimize_phi(const CandidateSet& cs, const RankingModel& model,
                    const Vector& phi_start, double zeta, double mu,
                    std::int64_t iterations, std::mt19937_64& rng) {
  if (phi_start.size() != model.num_metrics()) {
    throw DimMismatch("phi_start has length " +
                      std::to_string(phi_start.size()) + ", expected " +
                      std::to_string(model.num_metrics()));
  }
  if (cs.positives.empty() || cs.negatives.empty()) {
    return phi_start;
  }
  const Matrix table = gradient_table(cs, model);
  Vector row = phi_start;
  auto cached_score = [&](int i) { return -row.dot(table.row(i)); };
  std::uniform_int_distribution<int> pick_positive(
      0, static_cast<int>(cs.positives.size()) - 1);
  for (std::int64_t t = 0; t < iterations; ++t) {
    const int positive = cs.positives[pick_positive(rng)];
    const auto sample =
        sample_violator_impl(cs, positive, zeta, 0, rng, cached_score);
    if (!sample) continue;
    const double weight = rank_weight(
        static_cast<int>(cs.negatives.size()) / sample->draws);
    const Vector grad_diff =
        (table.row(positive) - table.row(sample->negative_index)).transpose();
    row = (row - mu * weight * grad_diff).cwiseMax(0.0);
  }
  return row;
}

}  // namespace lgmml
