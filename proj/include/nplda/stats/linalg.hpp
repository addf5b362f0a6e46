#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include <Eigen/Dense>

#include "nplda/stats/rng.hpp"

namespace nplda {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

}  // namespace nplda

namespace nplda::stats {

/// Dense symmetric matrix. Construction checks symmetry (relative tolerance
/// `tol` against the largest entry) and then stores the exactly symmetrized
/// average. Positive-definiteness is *not* assumed; `cholesky` checks it.
class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;
  explicit SymmetricMatrix(Matrix entries, double tol = 1e-10);

  static SymmetricMatrix identity(std::size_t order);

  std::size_t order() const noexcept { return static_cast<std::size_t>(m_.rows()); }
  double operator()(std::size_t i, std::size_t j) const {
    return m_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  const Matrix& dense() const noexcept { return m_; }

  SymmetricMatrix principal_submatrix(std::span<const std::size_t> indices) const;

 private:
  Matrix m_;
};

/// Lower-triangular L with L L^T = A.
class CholeskyFactor {
 public:
  explicit CholeskyFactor(Matrix lower) : lower_(std::move(lower)) {}

  const Matrix& lower() const noexcept { return lower_; }
  std::size_t order() const noexcept { return static_cast<std::size_t>(lower_.rows()); }

  Vector solve(const Vector& b) const;
  Matrix reconstruct() const;
  /// (max L_ii / min L_ii)^2, a cheap lower estimate of cond_2(A).
  double condition_estimate() const;

 private:
  Matrix lower_;
};

/// Throws SingularityError when a pivot falls to <= 1e-12 * max diagonal.
CholeskyFactor cholesky(const SymmetricMatrix& m);

/// Solves m x = b through its Cholesky factor; throws SingularityError when m
/// is singular or its condition estimate exceeds 1e12.
Vector spd_solve(const SymmetricMatrix& m, const Vector& b);

/// Largest eigenvalue of a symmetric matrix.
///
/// Power iteration from a pseudo-random start with a Rayleigh-quotient
/// residual test; if the two leading eigenvalues nearly tie and plain power
/// iteration stalls, switches to inverse iteration shifted just above the
/// current estimate. Throws NumericalError after 10^4 iterations.
double max_eigenvalue(const SymmetricMatrix& m);

/// n draws from N(mean, L L^T), one per row. Rows are generated in order,
/// each consuming d normals from `rng`.
Matrix sample_mvn(const Vector& mean, const Matrix& chol_lower, std::size_t n,
                  RngStream& rng);

}  // namespace nplda::stats
