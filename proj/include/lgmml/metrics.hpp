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
#ifndef LGMML_METRICS_HPP_
#define LGMML_METRICS_HPP_

#include <vector>

#include "lgmml/errors.hpp"

namespace lgmml {

/// Relevance grades in ranked order, best-ranked position first.
using RankedLabels = std::vector<int>;

/// Gain applied to a grade inside DCG.  Exponential (2^label - 1) is the
/// convention of the public ranking benchmarks; linear is kept for
/// sensitivity checks.
enum class GainScheme { kExponential, kLinear };

double dcg_at_k(const RankedLabels& labels, int k,
                GainScheme gain = GainScheme::kExponential);

/// DCG normalized by the ideal ordering's DCG; 0 when every label is zero.
double ndcg_at_k(const RankedLabels& labels, int k,
                 GainScheme gain = GainScheme::kExponential);

/// Binary-relevance average precision (relevant := label > 0);
/// 0 when nothing is relevant.
double average_precision(const RankedLabels& labels);

double mean_over_queries(const std::vector<double>& per_query_values);

}  // namespace lgmml

#endif  // LGMML_METRICS_HPP_
