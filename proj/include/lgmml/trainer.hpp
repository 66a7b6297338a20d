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
#ifndef LGMML_TRAINER_HPP_
#define LGMML_TRAINER_HPP_

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "lgmml/model.hpp"

namespace lgmml {

struct TrainConfig {
  int num_metrics = 10;            // m, number of local metrics
  std::int64_t iterations = 5000;  // T, WARP SGD iterations
  double mu = 0.05;                // step size
  double zeta = 0.1;               // hinge margin
  double lambda = 1.0;             // GMML identity regularizer
  double phi_init = 1.0;           // initial per-query weight value
  // Minimum label counting as "high relevant" when sampling similar pairs;
  // 0 picks the largest nonzero label present in each pooled subset.
  int hi_label_threshold = 0;
  // Cap on violator draws per iteration; 0 means the negative-pool size.
  int max_violator_draws = 0;
  std::uint64_t seed = 42;
  // Fraction of the queries pooled into each basis-metric fit.
  double subset_fraction = 0.2;
  int threads = 1;  // 1 is the deterministic reference mode
};

/// A sampled WARP triple.  The negative is a certified violator at sampling
/// time: zeta + f(negative) > f(positive).  draws is N_q, the number of
/// with-replacement draws it took to find it.
struct TripleSample {
  QueryId qid = 0;
  int positive_index = 0;
  int negative_index = 0;
  int draws = 1;
};

/// Optional training telemetry: one sampled hinge-loss value per iteration
/// (zero when the iteration found no violator or hit a degenerate query).
struct TrainStats {
  std::vector<double> losses;
  std::int64_t updates = 0;
  std::int64_t skipped = 0;
};

/// L(k) = sum_{i=1..k} 1/log2(i+1); the WARP weight of rank k.  L(0) = 0.
double rank_weight(int k);

/// Exact number of negatives scoring at or above the positive.  The
/// brute-force oracle for the sampled rank estimate.
int violator_count(const CandidateSet& cs, int positive_index,
                   const Vector& phi_q, const RankingModel& model);

/// Margin-inclusive variant: counts negatives with zeta + f(n) > f(p),
/// the condition the sampler certifies.
int violator_count_margin(const CandidateSet& cs, int positive_index,
                          const Vector& phi_q, const RankingModel& model,
                          double zeta);

/// Draws uniformly with replacement from the negative pool until a violator
/// appears, up to max_draws attempts (<= 0 means one expected full pass,
/// i.e. the pool size).  Empty negative pool throws NoNegatives.
std::optional<TripleSample> sample_violator(const CandidateSet& cs,
                                            int positive_index,
                                            const Vector& phi_q,
                                            const RankingModel& model,
                                            double zeta, int max_draws,
                                            std::mt19937_64& rng);

/// Magnitudes |d f / d phi^(r)| = exp(-n_r) n_r.  The score decreases in
/// every phi component, so the signed derivative is the negation; the sign
/// is applied inside sgd_step.
Vector phi_gradient(const Vector& p, const RankingModel& model);

/// One projected SGD update of a query's weight row for a certified
/// violator triple:  [phi - mu L(|D-|/N) (grad f(p-) - grad f(p+))]_+ .
Vector sgd_step(const Vector& phi_q, const TripleSample& sample,
                const CandidateSet& cs, const RankingModel& model, double mu,
                double zeta, int neg_pool_size);

/// Fits the m basis metrics: each round pools a sampled subset of queries,
/// builds similar pairs among its high-relevance documents and dissimilar
/// pairs against its zero-label documents, solves GMML in closed form, and
/// selects the NDCG-maximizing anchor over the pooled candidates.  Rounds
/// cycle through a shuffled partition of the queries so consecutive fits
/// see different regions.
std::vector<LocalMetric> fit_basis_metrics(
    const std::vector<CandidateSet>& queries, const TrainConfig& config,
    std::mt19937_64& rng);

/// The full training loop: basis metrics, per-query weight rows initialized
/// to phi_init, then T WARP iterations of (query, positive, violator)
/// sampling and projected SGD.  phi_default of the result is the mean row.
RankingModel train(const std::vector<CandidateSet>& queries,
                   const TrainConfig& config, TrainStats* stats = nullptr);

/// Optimizes one weight row on a labeled candidate set with the model's
/// metrics fixed (the transductive evaluation mode).
Vector optimize_phi(const CandidateSet& cs, const RankingModel& model,
                    const Vector& phi_start, double zeta, double mu,
                    std::int64_t iterations, std::mt19937_64& rng);

}  // namespace lgmml

#endif  // LGMML_TRAINER_HPP_
