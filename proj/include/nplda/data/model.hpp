#pragma once

#include <cstddef>
#include <variant>

#include "nplda/data/dataset.hpp"
#include "nplda/stats/linalg.hpp"
#include "nplda/stats/rng.hpp"

namespace nplda::data {

/// Sigma_ij = rho^|i-j|
struct Ar1 {
  double rho;
};
/// Sigma_ii = 1, Sigma_ij = rho for i != j
struct CompoundSymmetry {
  double rho;
};
struct ExplicitCovariance {
  stats::SymmetricMatrix sigma;
};

using CovarianceKind = std::variant<Ar1, CompoundSymmetry, ExplicitCovariance>;

/// Two Gaussian classes N(mu0, Sigma), N(mu1, Sigma) with prior pi0 on class 0.
struct LdaModelSpec {
  Vector mu0;
  Vector mu1;
  CovarianceKind covariance;
  double pi0 = 0.5;

  std::size_t dim() const noexcept { return static_cast<std::size_t>(mu0.size()); }
  /// Throws DomainError when mu0 == mu1, dimensions disagree, pi0 is outside
  /// (0, 1) or the covariance parameters do not give a PD matrix.
  void validate() const;
};

stats::SymmetricMatrix materialize_covariance(const CovarianceKind& kind, std::size_t d);
stats::SymmetricMatrix materialize_covariance(const LdaModelSpec& spec);

/// mu1 = mu0 + Sigma * beta_bayes, so that Sigma^{-1}(mu1 - mu0) = beta_bayes.
Vector mu_from_beta(const Vector& beta_bayes, const stats::SymmetricMatrix& covariance,
                    const Vector& mu0);

/// Draws from N(mu, Sigma) with O(d) work per row for AR(1) and
/// compound-symmetric Sigma (rho >= 0), and a dense Cholesky product
/// otherwise. The AR(1) recursion x_j = rho x_{j-1} + sqrt(1-rho^2) z_j is
/// exactly x = L z with L the Cholesky factor of Sigma.
class GaussianSampler {
 public:
  GaussianSampler(const CovarianceKind& kind, std::size_t d);

  std::size_t dim() const noexcept { return d_; }
  /// Fills `out` (rows x d) with draws centred at `mean`.
  void sample_into(const Vector& mean, Eigen::Ref<Matrix> out, stats::RngStream& rng) const;
  Matrix sample(const Vector& mean, std::size_t n, stats::RngStream& rng) const;

 private:
  enum class Path { Ar1, CompoundSymmetry, Dense };
  Path path_;
  std::size_t d_;
  double rho_ = 0.0;
  Matrix chol_;
};

/// n0 class-0 rows followed by n1 class-1 rows.
LabeledDataset generate(const LdaModelSpec& spec, std::size_t n0, std::size_t n1,
                        stats::RngStream& rng);
LabeledDataset generate(const LdaModelSpec& spec, const GaussianSampler& sampler,
                        std::size_t n0, std::size_t n1, stats::RngStream& rng);

/// Type I / type II errors of a population classifier.
struct OracleErrors {
  double type1;
  double type2;
};

/// Mahalanobis separation sqrt(mu_d^T Sigma^{-1} mu_d).
double mahalanobis_separation(const LdaModelSpec& spec);

/// Level-alpha NP oracle: type1 = alpha, type2 = Phi(Phi^{-1}(1-alpha) - Delta).
OracleErrors oracle_errors(const LdaModelSpec& spec, double alpha);

/// Classical Bayes rule under priors (pi0, 1 - pi0).
OracleErrors classical_oracle_errors(const LdaModelSpec& spec);

/// Population NP oracle rule: predict 1 iff beta^T x > cutoff with
/// beta = Sigma^{-1} mu_d and cutoff = Delta Phi^{-1}(1-alpha) + beta^T mu0.
struct PopulationRule {
  Vector beta;
  double cutoff;
};
PopulationRule np_oracle_rule(const LdaModelSpec& spec, double alpha);

/// Scale C with beta_bayes = C * direction such that the level-alpha NP
/// oracle has the requested type II error. Uses
/// Delta = C * sqrt(direction^T Sigma direction).
double scale_for_oracle_type2(const Vector& direction, const stats::SymmetricMatrix& sigma,
                              double alpha, double target_type2);

}  // namespace nplda::data
