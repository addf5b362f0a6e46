#include "nplda/stats/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "nplda/errors.hpp"

namespace nplda::stats {

SymmetricMatrix::SymmetricMatrix(Matrix entries, double tol) {
  if (entries.rows() != entries.cols()) {
    throw DomainError("SymmetricMatrix: matrix is not square");
  }
  if (entries.rows() == 0) {
    throw DomainError("SymmetricMatrix: order must be positive");
  }
  if (!entries.allFinite()) {
    throw DomainError("SymmetricMatrix: non-finite entry");
  }
  const double scale = std::max(1.0, entries.cwiseAbs().maxCoeff());
  const double asym = (entries - entries.transpose()).cwiseAbs().maxCoeff();
  if (asym > tol * scale) {
    throw DomainError("SymmetricMatrix: matrix is not symmetric (max |a_ij - a_ji| = " +
                      std::to_string(asym) + ")");
  }
  m_ = 0.5 * (entries + entries.transpose());
}

SymmetricMatrix SymmetricMatrix::identity(std::size_t order) {
  const auto n = static_cast<Eigen::Index>(order);
  return SymmetricMatrix(Matrix::Identity(n, n));
}

SymmetricMatrix SymmetricMatrix::principal_submatrix(
    std::span<const std::size_t> indices) const {
  const auto k = static_cast<Eigen::Index>(indices.size());
  Matrix sub(k, k);
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = 0; b < k; ++b) {
      sub(a, b) = m_(static_cast<Eigen::Index>(indices[a]),
                     static_cast<Eigen::Index>(indices[b]));
    }
  }
  return SymmetricMatrix(std::move(sub));
}

Vector CholeskyFactor::solve(const Vector& b) const {
  if (b.size() != lower_.rows()) {
    throw DomainError("CholeskyFactor::solve: dimension mismatch");
  }
  Vector y = lower_.triangularView<Eigen::Lower>().solve(b);
  return lower_.transpose().triangularView<Eigen::Upper>().solve(y);
}

Matrix CholeskyFactor::reconstruct() const { return lower_ * lower_.transpose(); }

double CholeskyFactor::condition_estimate() const {
  const Vector diag = lower_.diagonal();
  const double ratio = diag.maxCoeff() / diag.minCoeff();
  return ratio * ratio;
}

namespace {

// Returns nullopt instead of throwing; `min_pivot` receives the first
// offending pivot (negative means indefinite).
std::optional<Matrix> try_cholesky(const Matrix& a, double& min_pivot) {
  const Eigen::Index n = a.rows();
  const double max_diag = a.diagonal().maxCoeff();
  const double floor = 1e-12 * max_diag;
  Matrix l = Matrix::Zero(n, n);
  min_pivot = max_diag;
  if (!(max_diag > 0.0)) {
    min_pivot = max_diag;
    return std::nullopt;
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    double pivot = a(j, j);
    if (j > 0) pivot -= l.row(j).head(j).squaredNorm();
    if (!(pivot > floor)) {
      min_pivot = pivot;
      return std::nullopt;
    }
    min_pivot = std::min(min_pivot, pivot);
    const double ljj = std::sqrt(pivot);
    l(j, j) = ljj;
    const Eigen::Index rest = n - j - 1;
    if (rest > 0) {
      if (j > 0) {
        l.col(j).tail(rest) =
            (a.col(j).tail(rest) - l.block(j + 1, 0, rest, j) * l.row(j).head(j).transpose()) /
            ljj;
      } else {
        l.col(j).tail(rest) = a.col(j).tail(rest) / ljj;
      }
    }
  }
  return l;
}

}  // namespace

CholeskyFactor cholesky(const SymmetricMatrix& m) {
  double pivot = 0.0;
  auto l = try_cholesky(m.dense(), pivot);
  if (!l) {
    throw SingularityError("cholesky: matrix is not positive definite (pivot " +
                           std::to_string(pivot) + " <= 1e-12 * max diagonal)");
  }
  return CholeskyFactor(std::move(*l));
}

Vector spd_solve(const SymmetricMatrix& m, const Vector& b) {
  if (b.size() != static_cast<Eigen::Index>(m.order())) {
    throw DomainError("spd_solve: dimension mismatch");
  }
  const CholeskyFactor factor = cholesky(m);
  const double cond = factor.condition_estimate();
  if (cond > 1e12) {
    throw SingularityError("spd_solve: matrix is ill-conditioned (condition estimate " +
                           std::to_string(cond) + ")");
  }
  return factor.solve(b);
}

double max_eigenvalue(const SymmetricMatrix& m) {
  constexpr int kMaxIter = 10000;
  constexpr int kStallIter = 500;
  constexpr double kResidualTol = 1e-11;

  const Matrix& a = m.dense();
  const Eigen::Index n = a.rows();
  if (n == 1) return a(0, 0);
  const double scale = a.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;

  // Gershgorin shift so that B = A + shift I is positive semidefinite; the
  // dominant eigenvalue of B is then the largest one of A.
  double gersh_low = a(0, 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    gersh_low = std::min(gersh_low, a(i, i) - (a.row(i).cwiseAbs().sum() - std::fabs(a(i, i))));
  }
  const double shift = std::max(0.0, -gersh_low);
  Matrix b = a;
  b.diagonal().array() += shift;

  RngStream rng(0x5DEECE66Dull, static_cast<std::uint64_t>(n));
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.normal();
  v.normalize();

  double rho = 0.0;
  double rnorm = 0.0;
  int iter = 0;
  for (; iter < kStallIter; ++iter) {
    const Vector w = b * v;
    rho = v.dot(w);
    rnorm = (w - rho * v).norm();
    if (rnorm <= kResidualTol * std::max(rho, scale * 1e-300)) return rho - shift;
    const double wn = w.norm();
    if (wn == 0.0) return -shift;  // v in the null space of B: all of B is zero
    v = w / wn;
  }

  // Fallback: inverse iteration on (s I - B) with s just above rho. Its
  // dominant eigenvalue 1/(s - lambda_1) separates from 1/(s - lambda_2) even
  // when lambda_1 and lambda_2 nearly tie.
  double margin = std::max(rnorm, 1e-12 * rho);
  while (iter < kMaxIter) {
    Matrix shifted = -b;
    shifted.diagonal().array() += rho + margin;
    double pivot = 0.0;
    auto l = try_cholesky(shifted, pivot);
    ++iter;
    if (!l) {
      // s fell below lambda_1 (or onto it): widen the margin.
      margin *= 2.0;
      continue;
    }
    Vector y = l->triangularView<Eigen::Lower>().solve(v);
    Vector w = l->transpose().triangularView<Eigen::Upper>().solve(y);
    v = w.normalized();
    const Vector bv = b * v;
    const double rho_new = v.dot(bv);
    rnorm = (bv - rho_new * v).norm();
    rho = std::max(rho, rho_new);
    if (rnorm <= kResidualTol * rho) return rho_new - shift;
    margin = std::max(rnorm, 1e-13 * rho);
  }
  throw NumericalError("max_eigenvalue: power iteration did not converge", rnorm);
}

Matrix sample_mvn(const Vector& mean, const Matrix& chol_lower, std::size_t n,
                  RngStream& rng) {
  const Eigen::Index d = mean.size();
  if (chol_lower.rows() != d || chol_lower.cols() != d) {
    throw DomainError("sample_mvn: Cholesky factor does not match mean dimension");
  }
  const auto rows = static_cast<Eigen::Index>(n);
  Matrix z(rows, d);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) z(i, j) = rng.normal();
  }
  Matrix x = z * chol_lower.triangularView<Eigen::Lower>().transpose();
  x.rowwise() += mean.transpose();
  return x;
}

}  // namespace nplda::stats
