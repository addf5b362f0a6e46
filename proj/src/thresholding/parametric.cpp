#include <cmath>
#include <string>

#include "nplda/errors.hpp"
#include "nplda/stats/special.hpp"
#include "nplda/thresholding/thresholding.hpp"

namespace nplda::thresholding {

std::optional<double> eigen_bound_factor(std::size_t d_eff, std::size_t n, double epsilon) {
  if (d_eff == 0) throw DomainError("eigen_bound_factor: d must be positive");
  if (!(epsilon > 0.0)) throw DomainError("eigen_bound_factor: epsilon must be positive");
  if (n < 3 || d_eff >= n - 2) return std::nullopt;
  const double m = static_cast<double>(n - 2);
  const double d = static_cast<double>(d_eff);
  const double lead = 1.0 - std::sqrt(d / m);
  const double denom = lead * lead - std::pow(m, epsilon) / (std::sqrt(m) * std::cbrt(std::sqrt(d)));
  if (!(denom > 0.0)) return std::nullopt;
  return 1.0 / denom;
}

ThresholdResult parametric_threshold(const scoring::ScoringFunction& score,
                                     const scoring::PooledMoments& moments,
                                     std::span<const double> scores, const UmbrellaConfig& cfg,
                                     double epsilon) {
  cfg.validate();
  const std::size_t n0p = scores.size();
  if (n0p < 2) {
    throw FeasibilityError("parametric threshold needs at least 2 left-out class-0 scores", 2,
                           n0p);
  }

  const bool sparse = score.meta().method == scoring::ScoreMethod::Slda;
  const auto& support = score.support();
  Vector a;
  stats::SymmetricMatrix sigma;
  if (sparse) {
    if (support.empty()) {
      throw FeasibilityError("parametric threshold: degenerate score with empty support");
    }
    a.resize(static_cast<Eigen::Index>(support.size()));
    for (std::size_t i = 0; i < support.size(); ++i) {
      a(static_cast<Eigen::Index>(i)) = score.beta()(static_cast<Eigen::Index>(support[i]));
    }
    if (moments.columns.empty()) {
      if (moments.sigma_hat.order() != score.dim()) {
        throw DomainError("parametric threshold: moments do not match score dimension");
      }
      sigma = moments.sigma_hat.principal_submatrix(support);
    } else {
      if (moments.columns != support) {
        throw DomainError("parametric threshold: moment columns must equal the score support");
      }
      sigma = moments.sigma_hat;
    }
  } else {
    if (!moments.columns.empty() || moments.sigma_hat.order() != score.dim()) {
      throw DomainError("parametric threshold: dense score needs full-dimensional moments");
    }
    a = score.beta();
    sigma = moments.sigma_hat;
  }

  const std::size_t d_eff = static_cast<std::size_t>(a.size());
  const std::size_t n = moments.n0 + moments.n1;
  const auto factor = eigen_bound_factor(d_eff, n, epsilon);
  if (!factor) {
    throw FeasibilityError("parametric bound unavailable: d too large relative to n (d_eff=" +
                               std::to_string(d_eff) + ", n=" + std::to_string(n) + ")",
                           0, n);
  }

  double mean = 0.0;
  for (double s : scores) mean += s;
  mean /= static_cast<double>(n0p);
  double ss = 0.0;
  for (double s : scores) ss += (s - mean) * (s - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n0p - 1));

  ParametricInfo info;
  info.epsilon = epsilon;
  info.factor = *factor;
  info.d_eff = d_eff;
  info.mean_bound = mean - stats::student_t_quantile(cfg.delta0, static_cast<std::int64_t>(n0p - 1)) *
                               sd / std::sqrt(static_cast<double>(n0p));
  info.var_bound = *factor * stats::max_eigenvalue(sigma) * a.squaredNorm();
  if (!(info.var_bound > 0.0)) {
    throw FeasibilityError("parametric threshold: variance bound is not positive");
  }

  ThresholdResult result;
  result.cutoff = std::sqrt(info.var_bound) * stats::normal_quantile(1.0 - cfg.alpha) + info.mean_bound;
  result.kind = info;
  return result;
}

}  // namespace nplda::thresholding
