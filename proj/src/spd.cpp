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
#include "lgmml/spd.hpp"

#include <cmath>
#include <sstream>
#include <utility>

namespace lgmml {

SymMatrix::SymMatrix(Matrix a) {
  if (a.rows() == 0 || a.rows() != a.cols()) {
    throw InvalidMatrix("symmetric matrix must be square with dim >= 1, got " +
                        std::to_string(a.rows()) + "x" +
                        std::to_string(a.cols()));
  }
  mat_ = 0.5 * (a + a.transpose());
}

SymMatrix SymMatrix::identity(Eigen::Index dim) {
  return SymMatrix(Matrix::Identity(dim, dim));
}

Matrix SymEigen::power(double exponent) const {
  const double floor = kPdFloorRatio * values(0);
  Vector powered(values.size());
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (!(values(i) > floor) || values(i) <= 0.0) {
      std::ostringstream msg;
      msg << "eigenvalue " << values(i) << " below positive-definite floor "
          << floor;
      throw NotPositiveDefinite(msg.str());
    }
    powered(i) = std::pow(values(i), exponent);
  }
  return vectors * powered.asDiagonal() * vectors.transpose();
}

SymEigen sym_eigen(const SymMatrix& a) {
  if (!a.mat().allFinite()) {
    throw InvalidMatrix("matrix has non-finite entries");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a.mat());
  if (solver.info() != Eigen::Success) {
    throw InvalidMatrix("eigendecomposition failed to converge");
  }
  // Eigen returns ascending order; flip to descending.
  SymEigen out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

SpdMatrix SpdMatrix::certify(const SymMatrix& a) {
  SymEigen es = sym_eigen(a);
  const double largest = es.values(0);
  const double smallest = es.values(es.values.size() - 1);
  const double floor = kPdFloorRatio * largest;
  if (!(largest > 0.0) || !(smallest > floor)) {
    std::ostringstream msg;
    msg << "matrix is not positive definite: eigenvalue range [" << smallest
        << ", " << largest << "], floor " << floor;
    throw NotPositiveDefinite(msg.str());
  }
  return SpdMatrix(a.mat(), std::move(es), floor);
}

SpdMatrix SpdMatrix::identity(Eigen::Index dim) {
  return certify(SymMatrix::identity(dim));
}

SpdMatrix spd_pow(const SpdMatrix& a, double exponent) {
  return SpdMatrix::certify(SymMatrix(a.eigen().power(exponent)));
}

SpdMatrix geometric_mean_riccati(const SpdMatrix& s, const SpdMatrix& d) {
  if (s.dim() != d.dim()) {
    throw DimMismatch("geometric mean inputs disagree: " +
                      std::to_string(s.dim()) + " vs " +
                      std::to_string(d.dim()));
  }
  const Matrix s_half = s.eigen().power(0.5);
  const Matrix s_inv_half = s.eigen().power(-0.5);
  const SpdMatrix inner =
      SpdMatrix::certify(SymMatrix(s_half * d.mat() * s_half));
  const Matrix inner_half = inner.eigen().power(0.5);
  return SpdMatrix::certify(SymMatrix(s_inv_half * inner_half * s_inv_half));
}

}  // namespace lgmml
