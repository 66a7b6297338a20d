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
#ifndef LGMML_SPD_HPP_
#define LGMML_SPD_HPP_

#include <Eigen/Dense>

#include "lgmml/errors.hpp"

namespace lgmml {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Smallest admissible eigenvalue, as a fraction of the largest one.
/// Anything below this is treated as numerically singular.
inline constexpr double kPdFloorRatio = 1e-12;

/// Dense symmetric matrix.  Construction enforces exact symmetry by
/// replacing the input with (A + A^T)/2, which guards against
/// floating-point drift in accumulated outer-product sums.
class SymMatrix {
 public:
  explicit SymMatrix(Matrix a);

  static SymMatrix identity(Eigen::Index dim);

  Eigen::Index dim() const { return mat_.rows(); }
  const Matrix& mat() const { return mat_; }

 private:
  Matrix mat_;
};

/// Eigendecomposition of a symmetric matrix: values descending,
/// eigenvector columns orthonormal and aligned with the values.
struct SymEigen {
  Vector values;
  Matrix vectors;

  /// V diag(values^exponent) V^T.  Throws NotPositiveDefinite when some
  /// eigenvalue sits at or below kPdFloorRatio times the largest one.
  Matrix power(double exponent) const;
};

/// Full symmetric eigendecomposition.  Throws InvalidMatrix on non-finite
/// input.  Reconstruction V diag(l) V^T matches the input to machine
/// precision (tested at 1e-10 relative Frobenius error).
SymEigen sym_eigen(const SymMatrix& a);

/// Symmetric positive-definite matrix, certified at construction: the
/// smallest eigenvalue must exceed kPdFloorRatio times the largest.
/// The eigendecomposition computed for certification is kept, so powers
/// and inverses need no further factorization.
class SpdMatrix {
 public:
  static SpdMatrix certify(const SymMatrix& a);
  static SpdMatrix identity(Eigen::Index dim);

  Eigen::Index dim() const { return mat_.rows(); }
  const Matrix& mat() const { return mat_; }
  const SymEigen& eigen() const { return eigen_; }
  /// The epsilon the certification used (kPdFloorRatio * largest eigenvalue).
  double min_eigenvalue_floor() const { return floor_; }

  Matrix inverse() const { return eigen_.power(-1.0); }

 private:
  SpdMatrix(Matrix m, SymEigen es, double floor)
      : mat_(std::move(m)), eigen_(std::move(es)), floor_(floor) {}

  Matrix mat_;
  SymEigen eigen_;
  double floor_;
};

/// a^exponent through the cached eigendecomposition.
SpdMatrix spd_pow(const SpdMatrix& a, double exponent);

/// Unique SPD solution M of the Riccati equation M S M = D, i.e. the
/// geometric mean  S^{-1/2} (S^{1/2} D S^{1/2})^{1/2} S^{-1/2}.
SpdMatrix geometric_mean_riccati(const SpdMatrix& s, const SpdMatrix& d);

}  // namespace lgmml

#endif  // LGMML_SPD_HPP_
