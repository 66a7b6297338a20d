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
#ifndef LGMML_GMML_HPP_
#define LGMML_GMML_HPP_

#include <cstddef>
#include <utility>
#include <vector>

#include "lgmml/spd.hpp"

namespace lgmml {

/// A multiset of (similar or dissimilar) vector pairs of a fixed dimension.
/// Duplicates count with multiplicity in the scatter sums.
class PairSet {
 public:
  explicit PairSet(Eigen::Index dim);

  void add(Vector a, Vector b);

  Eigen::Index dim() const { return dim_; }
  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }
  const std::vector<std::pair<Vector, Vector>>& pairs() const {
    return pairs_;
  }

 private:
  Eigen::Index dim_;
  std::vector<std::pair<Vector, Vector>> pairs_;
};

struct GmmlConfig {
  double lambda = 1.0;  // weight of the identity regularizer
};

/// lambda*I + sum (p_i - p_j)(p_i - p_j)^T over the pairs, as a plain
/// symmetric matrix.  PSD by construction; kept un-certified so callers
/// can inspect rank-deficient sums (lambda == 0).
SymMatrix scatter_sum(const PairSet& pairs, Eigen::Index dim, double lambda);

/// Certified scatter matrix; throws NotPositiveDefinite when lambda == 0
/// and the pair differences do not span the space.
SpdMatrix scatter_matrix(const PairSet& pairs, Eigen::Index dim,
                         double lambda);

/// tr(M S) + tr(M^{-1} D), the objective the geometric mean minimizes.
double gmml_objective(const SpdMatrix& m, const SpdMatrix& s,
                      const SpdMatrix& d);

/// Closed-form metric: geometric mean of the regularized similarity and
/// dissimilarity scatter matrices.
SpdMatrix gmml_fit(const PairSet& similar, const PairSet& dissimilar,
                   const GmmlConfig& config);

}  // namespace lgmml

#endif  // LGMML_GMML_HPP_
