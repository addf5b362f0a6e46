#include "nplda/data/model.hpp"

#include <cmath>
#include <string>

#include "nplda/errors.hpp"
#include "nplda/stats/special.hpp"

namespace nplda::data {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_rho(double rho, std::size_t d, bool compound) {
  if (!(rho > -1.0 && rho < 1.0)) {
    throw DomainError("covariance: |rho| must be < 1, got " + std::to_string(rho));
  }
  if (compound && d > 1 && !(rho > -1.0 / static_cast<double>(d - 1))) {
    throw DomainError("compound symmetry: rho must exceed -1/(d-1) for a PD matrix");
  }
}

}  // namespace

void LdaModelSpec::validate() const {
  if (mu0.size() == 0) throw DomainError("LdaModelSpec: dimension must be positive");
  if (mu0.size() != mu1.size()) throw DomainError("LdaModelSpec: mu0/mu1 dimension mismatch");
  if (mu0 == mu1) throw DomainError("LdaModelSpec: mu0 and mu1 must differ");
  if (!(pi0 > 0.0 && pi0 < 1.0)) throw DomainError("LdaModelSpec: pi0 must lie in (0, 1)");
  const auto d = dim();
  std::visit(Overloaded{
                 [&](const Ar1& c) { check_rho(c.rho, d, false); },
                 [&](const CompoundSymmetry& c) { check_rho(c.rho, d, true); },
                 [&](const ExplicitCovariance& c) {
                   if (c.sigma.order() != d) {
                     throw DomainError("LdaModelSpec: covariance order does not match mu");
                   }
                   (void)stats::cholesky(c.sigma);
                 },
             },
             covariance);
}

stats::SymmetricMatrix materialize_covariance(const CovarianceKind& kind, std::size_t d) {
  if (d == 0) throw DomainError("materialize_covariance: d must be >= 1");
  const auto n = static_cast<Eigen::Index>(d);
  return std::visit(
      Overloaded{
          [&](const Ar1& c) {
            check_rho(c.rho, d, false);
            Matrix m(n, n);
            for (Eigen::Index i = 0; i < n; ++i) {
              for (Eigen::Index j = 0; j < n; ++j) {
                m(i, j) = std::pow(c.rho, static_cast<double>(std::abs(i - j)));
              }
            }
            return stats::SymmetricMatrix(std::move(m));
          },
          [&](const CompoundSymmetry& c) {
            check_rho(c.rho, d, true);
            Matrix m = Matrix::Constant(n, n, c.rho);
            m.diagonal().setOnes();
            return stats::SymmetricMatrix(std::move(m));
          },
          [&](const ExplicitCovariance& c) {
            if (c.sigma.order() != d) {
              throw DomainError("materialize_covariance: explicit matrix has wrong order");
            }
            try {
              (void)stats::cholesky(c.sigma);
            } catch (const SingularityError&) {
              throw DomainError("materialize_covariance: explicit covariance is not PD");
            }
            return c.sigma;
          },
      },
      kind);
}

stats::SymmetricMatrix materialize_covariance(const LdaModelSpec& spec) {
  return materialize_covariance(spec.covariance, spec.dim());
}

Vector mu_from_beta(const Vector& beta_bayes, const stats::SymmetricMatrix& covariance,
                    const Vector& mu0) {
  if (beta_bayes.size() != mu0.size() ||
      static_cast<std::size_t>(mu0.size()) != covariance.order()) {
    throw DomainError("mu_from_beta: dimension mismatch");
  }
  return mu0 + covariance.dense() * beta_bayes;
}

GaussianSampler::GaussianSampler(const CovarianceKind& kind, std::size_t d) : d_(d) {
  if (d == 0) throw DomainError("GaussianSampler: d must be >= 1");
  if (const auto* ar = std::get_if<Ar1>(&kind)) {
    check_rho(ar->rho, d, false);
    path_ = Path::Ar1;
    rho_ = ar->rho;
  } else if (const auto* cs = std::get_if<CompoundSymmetry>(&kind); cs && cs->rho >= 0.0) {
    check_rho(cs->rho, d, true);
    path_ = Path::CompoundSymmetry;
    rho_ = cs->rho;
  } else {
    path_ = Path::Dense;
    chol_ = stats::cholesky(materialize_covariance(kind, d)).lower();
  }
}

void GaussianSampler::sample_into(const Vector& mean, Eigen::Ref<Matrix> out,
                                  stats::RngStream& rng) const {
  const auto d = static_cast<Eigen::Index>(d_);
  if (mean.size() != d || out.cols() != d) {
    throw DomainError("GaussianSampler: dimension mismatch");
  }
  const Eigen::Index rows = out.rows();
  switch (path_) {
    case Path::Ar1: {
      const double innov = std::sqrt(1.0 - rho_ * rho_);
      for (Eigen::Index i = 0; i < rows; ++i) {
        double prev = rng.normal();
        out(i, 0) = prev + mean(0);
        for (Eigen::Index j = 1; j < d; ++j) {
          prev = rho_ * prev + innov * rng.normal();
          out(i, j) = prev + mean(j);
        }
      }
      break;
    }
    case Path::CompoundSymmetry: {
      const double common = std::sqrt(rho_);
      const double own = std::sqrt(1.0 - rho_);
      for (Eigen::Index i = 0; i < rows; ++i) {
        const double w = common * rng.normal();
        for (Eigen::Index j = 0; j < d; ++j) out(i, j) = mean(j) + w + own * rng.normal();
      }
      break;
    }
    case Path::Dense: {
      Matrix z(rows, d);
      for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) z(i, j) = rng.normal();
      }
      out = z * chol_.triangularView<Eigen::Lower>().transpose();
      out.rowwise() += mean.transpose();
      break;
    }
  }
}

Matrix GaussianSampler::sample(const Vector& mean, std::size_t n, stats::RngStream& rng) const {
  Matrix out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d_));
  sample_into(mean, out, rng);
  return out;
}

LabeledDataset generate(const LdaModelSpec& spec, const GaussianSampler& sampler,
                        std::size_t n0, std::size_t n1, stats::RngStream& rng) {
  const auto d = static_cast<Eigen::Index>(spec.dim());
  Matrix x(static_cast<Eigen::Index>(n0 + n1), d);
  sampler.sample_into(spec.mu0, x.topRows(static_cast<Eigen::Index>(n0)), rng);
  sampler.sample_into(spec.mu1, x.bottomRows(static_cast<Eigen::Index>(n1)), rng);
  std::vector<std::uint8_t> y(n0 + n1, 0);
  std::fill(y.begin() + static_cast<std::ptrdiff_t>(n0), y.end(), std::uint8_t{1});
  return LabeledDataset(std::move(x), std::move(y));
}

LabeledDataset generate(const LdaModelSpec& spec, std::size_t n0, std::size_t n1,
                        stats::RngStream& rng) {
  spec.validate();
  const GaussianSampler sampler(spec.covariance, spec.dim());
  return generate(spec, sampler, n0, n1, rng);
}

double mahalanobis_separation(const LdaModelSpec& spec) {
  const auto sigma = materialize_covariance(spec);
  const Vector mu_d = spec.mu1 - spec.mu0;
  const Vector beta = stats::spd_solve(sigma, mu_d);
  return std::sqrt(mu_d.dot(beta));
}

OracleErrors oracle_errors(const LdaModelSpec& spec, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("oracle_errors: alpha must lie in (0, 1)");
  const double delta = mahalanobis_separation(spec);
  return {alpha, stats::normal_cdf(stats::normal_quantile(1.0 - alpha) - delta)};
}

OracleErrors classical_oracle_errors(const LdaModelSpec& spec) {
  const double delta = mahalanobis_separation(spec);
  const double log_odds = std::log((1.0 - spec.pi0) / spec.pi0);
  return {stats::normal_cdf(-delta / 2.0 + log_odds / delta),
          stats::normal_cdf(-delta / 2.0 - log_odds / delta)};
}

PopulationRule np_oracle_rule(const LdaModelSpec& spec, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("np_oracle_rule: alpha must lie in (0, 1)");
  const auto sigma = materialize_covariance(spec);
  const Vector mu_d = spec.mu1 - spec.mu0;
  Vector beta = stats::spd_solve(sigma, mu_d);
  const double delta = std::sqrt(mu_d.dot(beta));
  const double cutoff = delta * stats::normal_quantile(1.0 - alpha) + beta.dot(spec.mu0);
  return {std::move(beta), cutoff};
}

double scale_for_oracle_type2(const Vector& direction, const stats::SymmetricMatrix& sigma,
                              double alpha, double target_type2) {
  const double quad = direction.dot(sigma.dense() * direction);
  if (!(quad > 0.0)) throw DomainError("scale_for_oracle_type2: direction must be non-zero");
  const double delta =
      stats::normal_quantile(1.0 - alpha) - stats::normal_quantile(target_type2);
  return delta / std::sqrt(quad);
}

}  // namespace nplda::data
