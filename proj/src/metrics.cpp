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
#include "lgmml/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>

namespace lgmml {

namespace {

// Grades are >= 0 by construction (the parser rejects negative labels).
double gain_of(int label, GainScheme gain) {
  return gain == GainScheme::kExponential ? std::exp2(label) - 1.0
                                          : static_cast<double>(label);
}

}  // namespace

double dcg_at_k(const RankedLabels& labels, int k, GainScheme gain) {
  if (labels.empty()) {
    throw EmptyRanking("DCG of an empty ranking");
  }
  if (k < 1) {
    throw EmptyInput("DCG cutoff must be >= 1");
  }
  const std::size_t depth =
      std::min(labels.size(), static_cast<std::size_t>(k));
  double dcg = 0.0;
  for (std::size_t i = 0; i < depth; ++i) {
    dcg += gain_of(labels[i], gain) / std::log2(static_cast<double>(i) + 2.0);
  }
  return dcg;
}

double ndcg_at_k(const RankedLabels& labels, int k, GainScheme gain) {
  const double dcg = dcg_at_k(labels, k, gain);
  RankedLabels ideal = labels;
  std::sort(ideal.begin(), ideal.end(), std::greater<int>());
  const double ideal_dcg = dcg_at_k(ideal, k, gain);
  return ideal_dcg > 0.0 ? dcg / ideal_dcg : 0.0;
}

double average_precision(const RankedLabels& labels) {
  if (labels.empty()) {
    throw EmptyRanking("average precision of an empty ranking");
  }
  int relevant_seen = 0;
  double precision_sum = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] > 0) {
      ++relevant_seen;
      precision_sum +=
          static_cast<double>(relevant_seen) / static_cast<double>(i + 1);
    }
  }
  return relevant_seen > 0 ? precision_sum / relevant_seen : 0.0;
}

double mean_over_queries(const std::vector<double>& per_query_values) {
  if (per_query_values.empty()) {
    throw EmptyInput("mean over zero queries");
  }
  double sum = 0.0;
  for (double v : per_query_values) sum += v;
  return sum / static_cast<double>(per_query_values.size());
}

}  // namespace lgmml
