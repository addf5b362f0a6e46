#include <numeric>
#include <string>

#include "nplda/errors.hpp"
#include "nplda/scoring/scoring.hpp"

namespace nplda::scoring {

ScoringFunction fit_lda(const PooledMoments& moments) {
  const std::size_t d = moments.sigma_hat.order();
  const std::size_t dof = moments.n0 + moments.n1 - 2;
  if (!moments.columns.empty()) {
    throw DomainError("fit_lda: moments must cover all feature columns");
  }
  if (d >= dof) {
    throw FeasibilityError("LDA requires d < n0+n1-2 (d=" + std::to_string(d) +
                               ", n0+n1-2=" + std::to_string(dof) + ")",
                           d + 3, moments.n0 + moments.n1);
  }
  Vector beta;
  try {
    beta = stats::spd_solve(moments.sigma_hat, moments.mu1_hat - moments.mu0_hat);
  } catch (const SingularityError& e) {
    throw SingularityError(std::string("LDA requires d < n0+n1-2 and a non-singular pooled "
                                       "covariance: ") + e.what());
  }
  std::vector<std::size_t> support(d);
  std::iota(support.begin(), support.end(), std::size_t{0});
  FitMeta meta{ScoreMethod::Lda, std::nullopt, moments.n0, moments.n1, d};
  return ScoringFunction(std::move(beta), std::move(support), meta);
}

}  // namespace nplda::scoring
