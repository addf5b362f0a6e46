#include <algorithm>
#include <string>

#include "nplda/errors.hpp"
#include "nplda/scoring/scoring.hpp"

namespace nplda::scoring {

std::string to_string(ScoreMethod m) { return m == ScoreMethod::Lda ? "LDA" : "SLDA"; }

ScoringFunction::ScoringFunction(Vector beta, std::vector<std::size_t> support, FitMeta meta)
    : beta_(std::move(beta)), support_(std::move(support)), meta_(meta) {
  if (!beta_.allFinite()) throw NumericalError("ScoringFunction: non-finite coefficient");
  if (!std::is_sorted(support_.begin(), support_.end())) {
    throw DomainError("ScoringFunction: support must be sorted");
  }
  for (auto j : support_) {
    if (j >= dim()) throw DomainError("ScoringFunction: support index out of range");
  }
}

double ScoringFunction::score(const Vector& x) const {
  if (x.size() != beta_.size()) {
    throw DomainError("score: expected " + std::to_string(beta_.size()) +
                      " features, got " + std::to_string(x.size()));
  }
  double s = 0.0;
  for (auto j : support_) s += beta_(static_cast<Eigen::Index>(j)) * x(static_cast<Eigen::Index>(j));
  return s;
}

Vector ScoringFunction::score_rows(const Matrix& x) const {
  if (x.cols() != beta_.size()) {
    throw DomainError("score: expected " + std::to_string(beta_.size()) +
                      " features, got " + std::to_string(x.cols()));
  }
  if (2 * support_.size() >= dim()) return x * beta_;
  Vector out = Vector::Zero(x.rows());
  for (auto j : support_) {
    out.noalias() += beta_(static_cast<Eigen::Index>(j)) * x.col(static_cast<Eigen::Index>(j));
  }
  return out;
}

ScoringFunction ScoringFunction::scaled(double c) const {
  if (!(c > 0.0)) throw DomainError("ScoringFunction::scaled: factor must be positive");
  return ScoringFunction(beta_ * c, support_, meta_);
}

PooledMoments pooled_moments(const Matrix& class0, const Matrix& class1,
                             std::span<const std::size_t> columns) {
  const auto n0 = static_cast<std::size_t>(class0.rows());
  const auto n1 = static_cast<std::size_t>(class1.rows());
  if (class0.cols() != class1.cols()) throw DomainError("pooled_moments: dimension mismatch");
  if (n0 == 0 || n1 == 0) throw DomainError("pooled_moments: both classes need observations");
  if (n0 + n1 <= 2) throw DomainError("pooled_moments: need n0 + n1 > 2");

  auto select = [&](const Matrix& m) -> Matrix {
    if (columns.empty()) return m;
    Matrix out(m.rows(), static_cast<Eigen::Index>(columns.size()));
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (columns[c] >= static_cast<std::size_t>(m.cols())) {
        throw DomainError("pooled_moments: column index out of range");
      }
      out.col(static_cast<Eigen::Index>(c)) = m.col(static_cast<Eigen::Index>(columns[c]));
    }
    return out;
  };
  const Matrix c0 = select(class0);
  const Matrix c1 = select(class1);

  PooledMoments pm;
  pm.mu0_hat = c0.colwise().mean().transpose();
  pm.mu1_hat = c1.colwise().mean().transpose();
  const Matrix z0 = c0.rowwise() - pm.mu0_hat.transpose();
  const Matrix z1 = c1.rowwise() - pm.mu1_hat.transpose();
  Matrix scatter = z0.transpose() * z0;
  scatter.noalias() += z1.transpose() * z1;
  scatter /= static_cast<double>(n0 + n1 - 2);
  pm.sigma_hat = stats::SymmetricMatrix(std::move(scatter));
  pm.n0 = n0;
  pm.n1 = n1;
  pm.columns.assign(columns.begin(), columns.end());
  return pm;
}

}  // namespace nplda::scoring
