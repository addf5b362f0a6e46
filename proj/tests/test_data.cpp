#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "nplda/data/dataset.hpp"
#include "nplda/data/model.hpp"
#include "nplda/errors.hpp"
#include "nplda/stats/special.hpp"

using namespace nplda;
using namespace nplda::data;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

LdaModelSpec ex1_spec() {
  LdaModelSpec spec;
  const auto sigma = materialize_covariance(Ar1{0.5}, 3);
  spec.mu0 = Vector::Zero(3);
  spec.mu1 = mu_from_beta(Vector::Constant(3, 1.2), sigma, spec.mu0);
  spec.covariance = Ar1{0.5};
  return spec;
}

LabeledDataset with_class0(std::size_t n0) {
  Matrix x = Matrix::Zero(static_cast<Eigen::Index>(n0 + 2), 1);
  std::vector<std::uint8_t> y(n0 + 2, 0);
  y[n0] = y[n0 + 1] = 1;
  return LabeledDataset(x, y);
}

}  // namespace

TEST_CASE("LabeledDataset validates its inputs", "[data]") {
  Matrix x(3, 2);
  x << 1, 2, 3, 4, 5, 6;
  CHECK_THROWS_AS(LabeledDataset(x, {0, 1}), DomainError);
  CHECK_THROWS_AS(LabeledDataset(x, {0, 1, 2}), DomainError);
  x(1, 1) = std::nan("");
  CHECK_THROWS_AS(LabeledDataset(x, {0, 1, 1}), DomainError);
  x(1, 1) = 4;
  const LabeledDataset ds(x, {1, 0, 1});
  CHECK(ds.count(0) == 1);
  CHECK(ds.count(1) == 2);
  CHECK(ds.class_indices(1) == std::vector<std::size_t>{0, 2});
  CHECK(ds.class_rows(0)(0, 1) == 4.0);
  const auto both = LabeledDataset::concat(ds, ds);
  CHECK(both.size() == 6);
  CHECK(both.features()(5, 0) == 5.0);
}

TEST_CASE("materialize_covariance examples", "[data]") {
  const auto ar = materialize_covariance(Ar1{0.5}, 3);
  Matrix expected(3, 3);
  expected << 1, .5, .25, .5, 1, .5, .25, .5, 1;
  CHECK(ar.dense() == expected);
  CHECK(materialize_covariance(CompoundSymmetry{0.0}, 4).dense() == Matrix::Identity(4, 4));
  Matrix cs(2, 2);
  cs << 1, .5, .5, 1;
  CHECK(materialize_covariance(CompoundSymmetry{0.5}, 2).dense() == cs);

  Matrix bad(2, 2);
  bad << 1, 2, 2, 1;
  CHECK_THROWS_AS(materialize_covariance(ExplicitCovariance{stats::SymmetricMatrix(bad)}, 2),
                  DomainError);
}

TEST_CASE("mu_from_beta examples", "[data]") {
  Vector mu0 = Vector::Zero(2);
  Vector beta(2);
  beta << 1, 2;
  CHECK(mu_from_beta(beta, stats::SymmetricMatrix::identity(2), mu0) == beta);
  CHECK(mu_from_beta(Vector::Zero(2), stats::SymmetricMatrix::identity(2), mu0) == mu0);

  const auto sigma = materialize_covariance(Ar1{0.5}, 3);
  const Vector b = Vector::Constant(3, 1.2);
  const Vector oracle = sigma.dense() * b;
  CHECK((mu_from_beta(b, sigma, Vector::Zero(3)) - oracle).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("mu_from_beta round-trips through spd_solve", "[data][property]") {
  stats::RngStream rng(4);
  for (int i = 0; i < 200; ++i) {
    const std::size_t d = 1 + rng.uniform_index(30);
    const double rho = 0.9 * rng.uniform();
    const auto sigma = i % 2 ? materialize_covariance(Ar1{rho}, d)
                             : materialize_covariance(CompoundSymmetry{rho}, d);
    Vector beta(static_cast<Eigen::Index>(d)), mu0(static_cast<Eigen::Index>(d));
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
      beta(j) = rng.normal();
      mu0(j) = rng.normal();
    }
    const Vector mu1 = mu_from_beta(beta, sigma, mu0);
    CHECK((stats::spd_solve(sigma, mu1 - mu0) - beta).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("LdaModelSpec validation", "[data]") {
  auto spec = ex1_spec();
  CHECK_NOTHROW(spec.validate());
  auto same = spec;
  same.mu1 = same.mu0;
  CHECK_THROWS_AS(same.validate(), DomainError);
  auto prior = spec;
  prior.pi0 = 1.0;
  CHECK_THROWS_AS(prior.validate(), DomainError);
  auto dims = spec;
  dims.mu1 = Vector::Ones(4);
  CHECK_THROWS_AS(dims.validate(), DomainError);
}

TEST_CASE("generate shapes and reproducibility", "[data]") {
  const auto spec = ex1_spec();
  stats::RngStream rng(1);
  const auto empty = generate(spec, 0, 0, rng);
  CHECK(empty.size() == 0);

  stats::RngStream a(5), b(5);
  const auto da = generate(spec, 10, 7, a);
  const auto db = generate(spec, 10, 7, b);
  CHECK(da.features() == db.features());
  CHECK(da.labels() == db.labels());
  CHECK(da.count(0) == 10);
  CHECK(da.labels()[9] == 0);
  CHECK(da.labels()[10] == 1);
}

TEST_CASE("generated class means and pooled covariance converge", "[data][property]") {
  const auto spec = ex1_spec();
  const std::size_t n = 100000;
  stats::RngStream rng(6);
  const auto ds = generate(spec, n, n, rng);
  const Matrix x0 = ds.class_rows(0), x1 = ds.class_rows(1);
  const double tol = 4.0 / std::sqrt(static_cast<double>(n));  // unit marginal variances
  CHECK((Vector(x0.colwise().mean().transpose()) - spec.mu0).cwiseAbs().maxCoeff() < tol);
  CHECK((Vector(x1.colwise().mean().transpose()) - spec.mu1).cwiseAbs().maxCoeff() < tol);

  const Matrix c0 = x0.rowwise() - x0.colwise().mean();
  const Matrix c1 = x1.rowwise() - x1.colwise().mean();
  const Matrix pooled = (c0.transpose() * c0 + c1.transpose() * c1) / (2.0 * n - 2.0);
  CHECK((pooled - materialize_covariance(spec).dense()).cwiseAbs().maxCoeff() < 3e-2);
}

TEST_CASE("GaussianSampler paths agree in distribution", "[data][property]") {
  // The AR(1) and compound-symmetry fast paths against the dense path.
  for (int kind = 0; kind < 2; ++kind) {
    const CovarianceKind fast = kind ? CovarianceKind{CompoundSymmetry{0.7}} : CovarianceKind{Ar1{0.7}};
    const auto sigma = materialize_covariance(fast, 6);
    const GaussianSampler s_fast(fast, 6);
    const GaussianSampler s_dense(ExplicitCovariance{sigma}, 6);
    stats::RngStream r1(2), r2(3);
    for (const auto* s : {&s_fast, &s_dense}) {
      auto& r = s == &s_fast ? r1 : r2;
      const Matrix x = s->sample(Vector::Zero(6), 100000, r);
      const Matrix c = x.rowwise() - x.colwise().mean();
      const Matrix cov = c.transpose() * c / 99999.0;
      CHECK((cov - sigma.dense()).cwiseAbs().maxCoeff() < 5e-2);
    }
  }
}

TEST_CASE("split_class0 examples", "[data]") {
  stats::RngStream rng(1);
  auto s = split_class0(with_class0(10), 0.5, rng);
  CHECK(s.train_indices.size() == 5);
  CHECK(s.threshold_indices.size() == 5);
  s = split_class0(with_class0(31), 0.5, rng);
  CHECK(s.train_indices.size() == 16);
  CHECK(s.threshold_indices.size() == 15);
  s = split_class0(with_class0(100), 0.3, rng);
  CHECK(s.train_indices.size() == 30);
  CHECK(s.threshold_indices.size() == 70);

  CHECK_THROWS_AS(split_class0(with_class0(10), 0.0, rng), DomainError);
  CHECK_THROWS_AS(split_class0(with_class0(10), 1.0, rng), DomainError);
  CHECK_THROWS_AS(split_class0(with_class0(2), 0.1, rng), DomainError);
  CHECK(split_train_size(31, 0.5) == 16);
  CHECK(split_train_size(5, 0.1) == 1);
}

TEST_CASE("split_class0 partitions the class-0 rows", "[data][property]") {
  stats::RngStream rng(77);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n0 = 2 + rng.uniform_index(300);
    const double tau = 0.01 + 0.98 * rng.uniform();
    const auto ds = with_class0(n0);
    const std::size_t train = split_train_size(n0, tau);
    if (train == 0 || train == n0) {
      CHECK_THROWS_AS(split_class0(ds, tau, rng), DomainError);
      continue;
    }
    const auto s = split_class0(ds, tau, rng);
    CHECK(s.train_indices.size() == static_cast<std::size_t>(std::floor(tau * n0 + 0.5)));
    std::vector<std::size_t> all = s.train_indices;
    all.insert(all.end(), s.threshold_indices.begin(), s.threshold_indices.end());
    std::sort(all.begin(), all.end());
    CHECK(all == ds.class_indices(0));
  }
}

TEST_CASE("oracle errors", "[data]") {
  const double z = stats::normal_quantile(0.9);
  LdaModelSpec spec;
  spec.mu0 = Vector::Zero(1);
  spec.mu1 = Vector::Constant(1, 2.0 * z);
  spec.covariance = Ar1{0.0};
  CHECK_THAT(mahalanobis_separation(spec), WithinRel(2.0 * z, 1e-14));
  const auto e = oracle_errors(spec, 0.1);
  CHECK_THAT(e.type1, WithinAbs(0.1, 1e-15));
  CHECK_THAT(e.type2, WithinAbs(0.1, 1e-12));
  CHECK(oracle_errors(spec, 1.0 - 1e-12).type2 < 1e-9);
  CHECK_THAT(classical_oracle_errors(spec).type2, WithinAbs(stats::normal_cdf(-z), 1e-12));

  // Oracle type II fixed at 0.112 through the scaling constant.
  for (std::size_t d : {3, 9, 30}) {
    const auto sigma = materialize_covariance(Ar1{0.5}, d);
    const Vector ones = Vector::Ones(static_cast<Eigen::Index>(d));
    const double c = scale_for_oracle_type2(ones, sigma, 0.1, 0.112);
    LdaModelSpec ex2;
    ex2.mu0 = Vector::Zero(static_cast<Eigen::Index>(d));
    ex2.mu1 = mu_from_beta(c * ones, sigma, ex2.mu0);
    ex2.covariance = Ar1{0.5};
    CHECK_THAT(mahalanobis_separation(ex2), WithinRel(2.4975119852519188594, 1e-12));
    CHECK_THAT(oracle_errors(ex2, 0.1).type2, WithinAbs(0.112, 1e-12));
  }
}

TEST_CASE("np_oracle_rule has the closed-form cutoff", "[data]") {
  const auto spec = ex1_spec();
  const auto rule = np_oracle_rule(spec, 0.1);
  CHECK((rule.beta - Vector::Constant(3, 1.2)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THAT(rule.cutoff,
             WithinRel(mahalanobis_separation(spec) * stats::normal_quantile(0.9), 1e-12));
}
