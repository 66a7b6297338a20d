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
#include "lgmml/gmml.hpp"

#include <string>

namespace lgmml {

PairSet::PairSet(Eigen::Index dim) : dim_(dim) {
  if (dim < 1) {
    throw DimMismatch("pair set dimension must be >= 1, got " +
                      std::to_string(dim));
  }
}

void PairSet::add(Vector a, Vector b) {
  if (a.size() != dim_ || b.size() != dim_) {
    throw DimMismatch("pair of sizes " + std::to_string(a.size()) + "/" +
                      std::to_string(b.size()) + " added to pair set of dim " +
                      std::to_string(dim_));
  }
  pairs_.emplace_back(std::move(a), std::move(b));
}

SymMatrix scatter_sum(const PairSet& pairs, Eigen::Index dim, double lambda) {
  if (pairs.dim() != dim) {
    throw DimMismatch("pair set dim " + std::to_string(pairs.dim()) +
                      " does not match requested dim " + std::to_string(dim));
  }
  if (lambda < 0.0) {
    throw ConfigError("lambda must be >= 0");
  }
  Matrix sum = lambda * Matrix::Identity(dim, dim);
  // Fixed iteration order keeps the accumulated sum reproducible.
  for (const auto& [a, b] : pairs.pairs()) {
    const Vector diff = a - b;
    sum.noalias() += diff * diff.transpose();
  }
  return SymMatrix(std::move(sum));
}

SpdMatrix scatter_matrix(const PairSet& pairs, Eigen::Index dim,
                         double lambda) {
  return SpdMatrix::certify(scatter_sum(pairs, dim, lambda));
}

double gmml_objective(const SpdMatrix& m, const SpdMatrix& s,
                      const SpdMatrix& d) {
  if (m.dim() != s.dim() || m.dim() != d.dim()) {
    throw DimMismatch("objective inputs disagree: " + std::to_string(m.dim()) +
                      "/" + std::to_string(s.dim()) + "/" +
                      std::to_string(d.dim()));
  }
  // tr(AB) = sum_ij A_ij B_ij for symmetric A, B.
  const double similar_term = m.mat().cwiseProduct(s.mat()).sum();
  const double dissimilar_term = m.inverse().cwiseProduct(d.mat()).sum();
  return similar_term + dissimilar_term;
}

SpdMatrix gmml_fit(const PairSet& similar, const PairSet& dissimilar,
                   const GmmlConfig& config) {
  if (similar.dim() != dissimilar.dim()) {
    throw DimMismatch("similar/dissimilar pair sets disagree: " +
                      std::to_string(similar.dim()) + " vs " +
                      std::to_string(dissimilar.dim()));
  }
  const Eigen::Index dim = similar.dim();
  const SpdMatrix s = scatter_matrix(similar, dim, config.lambda);
  const SpdMatrix d = scatter_matrix(dissimilar, dim, config.lambda);
  return geometric_mean_riccati(s, d);
}

}  // namespace lgmml
