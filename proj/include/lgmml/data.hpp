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
#ifndef LGMML_DATA_HPP_
#define LGMML_DATA_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "lgmml/model.hpp"

namespace lgmml {

/// A parsed ranking dataset: per-query candidate sets over a shared dense
/// feature space (missing sparse features are zero).
struct Dataset {
  Eigen::Index dim = 0;
  std::vector<CandidateSet> queries;
  int grade_max = 0;
};

/// Parses LETOR/SVMLight lines: `<label> qid:<int> <fid>:<float> ... [# c]`.
/// Documents are grouped by qid preserving in-file order; the dimension is
/// the maximum feature id seen.  Throws ParseError with the line number on
/// malformed input.
Dataset parse_letor(std::istream& text);

/// File variant; transparently inflates gzip when the name ends in .gz.
Dataset parse_letor_file(const std::string& path);

/// Writes the dataset densely in the same format, one document per line,
/// with exact (round-trip) float printing.
void write_letor(const Dataset& ds, std::ostream& out);
void write_letor_file(const Dataset& ds, const std::string& path);

/// Divides every feature dimension by its 2-norm across all documents of
/// the dataset; all-zero dimensions stay untouched.  Idempotent.
Dataset normalize_l2_per_dimension(Dataset ds);

struct Partition {
  std::vector<int> positives;  // label >= 1
  std::vector<int> negatives;  // label == 0, exactly
  std::vector<int> hi;         // label >= hi_label_threshold
};

/// Splits a candidate set by relevance; hi_label_threshold >= 1 selects the
/// subset used for similar-pair sampling.
Partition partition_relevance(const CandidateSet& cs, int hi_label_threshold);

/// Multi-center Gaussian generator.  Class centers are uniform in a
/// hypercube of side center_spread; points are unit-variance isotropic
/// Gaussians truncated at the 95% confidence radius.  Classes are indexed
/// 0..num_classes-1 and a point's grade is its class index capped at 4.
/// One query per class (own class positive, a balanced sample of the other
/// classes at label 0) plus, optionally, one mixed query over all points.
struct SynthConfig {
  int num_classes = 10;
  int points_per_class = 100;
  int dim = 20;
  double center_spread = 10.0;
  std::uint64_t seed = 1;
  bool include_mixed_query = true;
};

Dataset synth_gaussian(const SynthConfig& config);

/// Deterministic per-query, per-label-stratified document split; the first
/// dataset keeps ~(1 - holdout_fraction) of each query's documents.  Both
/// halves share qids.  Queries left empty on one side are dropped there.
std::pair<Dataset, Dataset> split_by_documents(const Dataset& ds,
                                               double holdout_fraction);

}  // namespace lgmml

#endif  // LGMML_DATA_HPP_
