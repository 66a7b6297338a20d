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
#ifndef LGMML_MODEL_HPP_
#define LGMML_MODEL_HPP_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "lgmml/spd.hpp"

namespace lgmml {

using QueryId = std::int64_t;

/// One feature vector with a graded relevance label, tied to a query.
struct Document {
  QueryId qid = 0;
  Vector features;
  int label = 0;
};

/// All documents retrieved for one query.  positives are the indices with
/// label >= 1, negatives exactly the zero-label indices.
struct CandidateSet {
  QueryId qid = 0;
  std::vector<Document> documents;
  std::vector<int> positives;
  std::vector<int> negatives;
};

/// Builds a candidate set and its relevance partition from raw documents.
CandidateSet make_candidate_set(QueryId qid, std::vector<Document> documents);

/// An anchor document paired with the metric learned around it.
struct LocalMetric {
  Vector anchor;
  SpdMatrix metric;
};

/// Training hyperparameters persisted with a model.
struct Hyper {
  double zeta = 0.1;
  double mu = 0.05;
  double lambda = 1.0;
  std::int64_t iterations = 0;
  int num_metrics = 1;
  std::uint64_t seed = 0;
};

/// The trained ranking artifact: m local metrics plus per-query combination
/// weights.  Immutable after construction; scoring is a pure read.
class RankingModel {
 public:
  RankingModel(std::vector<LocalMetric> locals,
               std::map<QueryId, Vector> phi, Vector phi_default,
               Hyper hyper);

  Eigen::Index dim() const { return locals_.front().anchor.size(); }
  int num_metrics() const { return static_cast<int>(locals_.size()); }
  const std::vector<LocalMetric>& locals() const { return locals_; }
  const std::map<QueryId, Vector>& phi() const { return phi_; }
  const Vector& phi_default() const { return phi_default_; }
  const Hyper& hyper() const { return hyper_; }

  bool has_phi(QueryId qid) const { return phi_.count(qid) != 0; }
  /// The query's trained weight row, or phi_default for unseen queries.
  const Vector& phi_for(QueryId qid) const;

 private:
  std::vector<LocalMetric> locals_;
  std::map<QueryId, Vector> phi_;
  Vector phi_default_;
  Hyper hyper_;
};

/// || M_r (p - p_r) ||_2, the trace-norm distance of p from the anchor.
/// Zero exactly when p equals the anchor (M_r is SPD).
double metric_norm(const Vector& p, const LocalMetric& lm);

/// exp(-(rho/2) * metric_norm(p, lm)); 1 at the anchor, decaying with
/// distance.  rho >= 0 is the caller's responsibility.
double weight(const Vector& p, const LocalMetric& lm, double rho);

/// sum_r w_r(p) M_r.  PSD for any p; provided for analysis, not scoring.
SymMatrix combined_metric(const Vector& p, const RankingModel& model,
                          const Vector& rho);

/// Per-metric contributions exp(-n_r) * n_r with n_r = metric_norm(p, r).
/// The score is -phi_q . score_components(p) and the WARP gradient reads
/// the same vector, so both share this one code path.
Vector score_components(const Vector& p, const RankingModel& model);

/// Evaluation score: -sum_r phi_q^(r) exp(-n_r) n_r.  Always <= 0; closer
/// to zero means closer to the query's ideal candidate document.  Note
/// x exp(-x) peaks at x = 1, so the score is not monotone in distance
/// beyond n_r = 1; documents are ranked by the score as defined.
double score(const Vector& p, const Vector& phi_q, const RankingModel& model);

/// Document indices sorted by descending score; ties keep ascending
/// original index.
std::vector<int> rank_candidates(const CandidateSet& cs, const Vector& phi_q,
                                 const RankingModel& model);

struct AnchorChoice {
  Vector anchor;
  double ndcg = 0.0;
  int document_index = 0;
};

/// Picks, among the positive documents, the one whose distance ordering of
/// the whole candidate set scores the highest NDCG@k under the given
/// metric.  k <= 0 means the full candidate-set size.  Ties prefer the
/// lowest document index.
AnchorChoice select_anchor(const SpdMatrix& metric,
                           const CandidateSet& candidates, int k = 0);

// Versioned text model format; '#'-prefixed lines are comments.  Numeric
// round trips are exact (shortest round-trip decimal printing).
void save_model(const RankingModel& model, std::ostream& sink);
RankingModel load_model(std::istream& source);
void save_model_file(const RankingModel& model, const std::string& path);
RankingModel load_model_file(const std::string& path);

}  // namespace lgmml

#endif  // LGMML_MODEL_HPP_
