#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>

#include "nplda/scoring/scoring.hpp"

namespace nplda::thresholding {

struct UmbrellaConfig {
  double alpha = 0.05;
  double delta0 = 0.05;

  /// Throws DomainError unless both lie strictly inside (0, 1).
  void validate() const;
};

struct UmbrellaInfo {
  std::size_t k_star = 0;
  std::size_t n0prime = 0;
  double violation_bound = 0.0;
};

struct ParametricInfo {
  double mean_bound = 0.0;
  double var_bound = 0.0;
  double epsilon = 0.0;
  double factor = 0.0;
  std::size_t d_eff = 0;
};

/// Cutoff of the fitted rule beta0 + beta^T x > 0, i.e. cutoff = -beta0.
struct SignRuleInfo {
  double intercept = 0.0;
};

struct ThresholdResult {
  double cutoff = 0.0;
  std::variant<UmbrellaInfo, ParametricInfo, SignRuleInfo> kind;

  /// "umbrella", "parametric" or "sign_rule".
  std::string kind_name() const;
};

/// P[Bin(n0', 1 - alpha) >= k]: probability that the k-th order statistic of
/// n0' class-0 scores leaves type I error above alpha.
double violation_rate(std::size_t k, std::size_t n0prime, double alpha);

/// Smallest n0' with (1 - alpha)^{n0'} <= delta0.
std::size_t min_class0_size(double alpha, double delta0);

/// min{k : violation_rate(k) <= delta0}. Throws FeasibilityError when
/// n0' < min_class0_size(alpha, delta0).
std::size_t k_star(std::size_t n0prime, double alpha, double delta0);

struct KPrime {
  double a = 0.0;             ///< A_{alpha, delta0}(n0')
  std::size_t raw = 0;        ///< ceil((n0' + 1) A), may equal n0' + 1
  std::size_t clamped = 0;    ///< min(raw, n0')
  bool was_clamped = false;
};

/// Analytic upper bound on k_star. Requires n0' >= 4 / (alpha delta0).
KPrime k_prime(std::size_t n0prime, double alpha, double delta0);

/// Cutoff = k_star-th smallest score (1-indexed). Predict 1 iff score > cutoff.
ThresholdResult umbrella_threshold(std::span<const double> scores, const UmbrellaConfig& cfg);

/// 1 / [(1 - sqrt(d/(n-2)))^2 - (n-2)^eps / (sqrt(n-2) d^{1/6})], or nothing
/// when d >= n - 2 or the bracket is not positive.
std::optional<double> eigen_bound_factor(std::size_t d_eff, std::size_t n, double epsilon);

/// Cutoff sqrt(var_bound) Phi^{-1}(1 - alpha) + mean_bound with
///   mean_bound = Wbar - t^{-1}_{n0'-1}(delta0) S / sqrt(n0'),
///   var_bound  = factor * lambda_max(Sigma_hat) * ||beta||^2.
/// For SLDA scores Sigma_hat and beta are restricted to the support, with
/// d_eff = |support|. `moments` may cover either all columns or exactly the
/// support. Throws FeasibilityError when the factor is unavailable.
ThresholdResult parametric_threshold(const scoring::ScoringFunction& score,
                                     const scoring::PooledMoments& moments,
                                     std::span<const double> scores, const UmbrellaConfig& cfg,
                                     double epsilon = 1e-3);

}  // namespace nplda::thresholding
