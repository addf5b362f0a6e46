#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "nplda/errors.hpp"
#include "nplda/stats/linalg.hpp"
#include "nplda/stats/rng.hpp"
#include "nplda/stats/special.hpp"

using namespace nplda;
using namespace nplda::stats;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Exact binomial tail by log-space summation in extended precision.
double binomial_tail_oracle(long k, long n, double q) {
  const long double lq = std::log(static_cast<long double>(q));
  const long double l1q = std::log1p(-static_cast<long double>(q));
  const long double lnf = std::lgamma(static_cast<long double>(n) + 1);
  std::vector<long double> terms;
  long double top = -INFINITY;
  for (long j = k; j <= n; ++j) {
    const long double t = lnf - std::lgamma(static_cast<long double>(j) + 1) -
                          std::lgamma(static_cast<long double>(n - j) + 1) + j * lq + (n - j) * l1q;
    terms.push_back(t);
    top = std::max(top, t);
  }
  long double sum = 0;
  for (auto t : terms) sum += std::exp(t - top);
  return static_cast<double>(std::exp(top) * sum);
}

Matrix random_spd(std::size_t d, RngStream& rng) {
  Matrix b(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = rng.normal();
  Matrix a = b * b.transpose();
  a.diagonal().array() += static_cast<double>(d) * 0.1 + 0.1;
  return a;
}

Matrix ar1(std::size_t d, double rho) {
  Matrix s(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    for (Eigen::Index j = 0; j < s.cols(); ++j) s(i, j) = std::pow(rho, std::abs(i - j));
  }
  return s;
}

}  // namespace

TEST_CASE("normal_cdf reference values", "[stats][special]") {
  CHECK(normal_cdf(0.0) == 0.5);
  CHECK(normal_cdf(-40.0) == 0.0);
  CHECK(normal_cdf(40.0) == 1.0);
  // Gauss-Kronrod quadrature of the density, frozen: 0.900008499902325.
  const double quad = 0.5 + boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
                                [](double t) { return std::exp(-0.5 * t * t) / std::sqrt(2 * M_PI); },
                                0.0, 1.2816);
  CHECK_THAT(quad, WithinAbs(0.900008499902325, 1e-13));
  CHECK_THAT(normal_cdf(1.2816), WithinAbs(quad, 1e-6));
}

TEST_CASE("normal_quantile reference values", "[stats][special]") {
  CHECK(normal_quantile(0.5) == 0.0);
  CHECK_THAT(normal_quantile(0.9), WithinAbs(1.2815515655446004669651, 1e-10));
  CHECK_THAT(normal_quantile(0.1), WithinAbs(-normal_quantile(0.9), 1e-15));
  CHECK_THROWS_AS(normal_quantile(0.0), DomainError);
  CHECK_THROWS_AS(normal_quantile(1.0), DomainError);
  CHECK_THROWS_AS(normal_quantile(-0.2), DomainError);
  CHECK_THROWS_AS(normal_quantile(std::nan("")), DomainError);
}

TEST_CASE("normal quantile and cdf round-trip on a grid", "[stats][special][property]") {
  const boost::math::normal_distribution<double> ref;
  for (int i = 1; i <= 999; ++i) {
    const double p = i / 1000.0;
    const double z = normal_quantile(p);
    CHECK_THAT(normal_cdf(z), WithinAbs(p, 1e-9));
    CHECK_THAT(z, WithinAbs(boost::math::quantile(ref, p), 1e-9));
  }
}

TEST_CASE("incomplete_beta agrees with an independent implementation", "[stats][special]") {
  RngStream rng(7);
  for (int i = 0; i < 500; ++i) {
    const double a = 0.5 + 200.0 * rng.uniform();
    const double b = 0.5 + 200.0 * rng.uniform();
    const double x = rng.uniform();
    CHECK_THAT(incomplete_beta(a, b, x), WithinAbs(boost::math::ibeta(a, b, x), 1e-12));
  }
  CHECK(incomplete_beta(2.0, 3.0, 0.0) == 0.0);
  CHECK(incomplete_beta(2.0, 3.0, 1.0) == 1.0);
  CHECK_THROWS_AS(incomplete_beta(-1.0, 3.0, 0.5), DomainError);
  CHECK_THROWS_AS(incomplete_beta(1.0, 3.0, 1.5), DomainError);
}

TEST_CASE("student_t_quantile reference values", "[stats][special]") {
  CHECK(student_t_quantile(0.5, 3) == 0.0);
  CHECK(student_t_quantile(0.5, 1000) == 0.0);
  // Bisection on the incomplete-beta CDF, frozen.
  CHECK_THAT(student_t_quantile(0.1, 10), WithinAbs(-1.3721836411103356272, 1e-9));
  CHECK_THAT(student_t_quantile(0.1, 1000000), WithinAbs(normal_quantile(0.1), 1e-3));
  CHECK_THROWS_AS(student_t_quantile(0.0, 5), DomainError);
  CHECK_THROWS_AS(student_t_quantile(1.0, 5), DomainError);
}

TEST_CASE("student t quantile and cdf round-trip", "[stats][special][property]") {
  for (std::int64_t df : {1, 2, 5, 10, 30, 99, 1000}) {
    const boost::math::students_t_distribution<double> ref(static_cast<double>(df));
    for (int i = 1; i <= 999; i += 7) {
      const double p = i / 1000.0;
      const double t = student_t_quantile(p, df);
      CHECK_THAT(student_t_cdf(t, static_cast<double>(df)), WithinAbs(p, 1e-9));
      CHECK_THAT(student_t_cdf(t, static_cast<double>(df)),
                 WithinAbs(boost::math::cdf(ref, t), 1e-12));
    }
  }
}

TEST_CASE("binomial_upper_tail closed forms", "[stats][special]") {
  for (std::int64_t n : {1, 5, 59, 300}) {
    for (double q : {0.05, 0.5, 0.95}) {
      CHECK_THAT(binomial_upper_tail(n, n, q), WithinRel(std::pow(q, static_cast<double>(n)), 1e-12));
      CHECK_THAT(binomial_upper_tail(1, n, q),
                 WithinRel(-std::expm1(static_cast<double>(n) * std::log1p(-q)), 1e-12));
    }
  }
  CHECK_THAT(binomial_upper_tail(55, 59, 0.95), WithinRel(0.82813292644189296249, 1e-12));
  CHECK_THROWS_AS(binomial_upper_tail(0, 10, 0.5), DomainError);
  CHECK_THROWS_AS(binomial_upper_tail(11, 10, 0.5), DomainError);
}

TEST_CASE("binomial_upper_tail matches log-space summation", "[stats][special][property]") {
  for (std::int64_t n : {1, 2, 7, 22, 59, 100, 257, 1000, 2000}) {
    for (double q : {0.8, 0.9, 0.95, 0.99, 0.3}) {
      const std::int64_t step = std::max<std::int64_t>(1, n / 97);
      for (std::int64_t k = 1; k <= n; k += step) {
        const double oracle = binomial_tail_oracle(k, n, q);
        if (oracle < 1e-280) continue;
        CHECK_THAT(binomial_upper_tail(k, n, q), WithinRel(oracle, 1e-12));
      }
    }
  }
}

TEST_CASE("binomial_upper_tail is monotone", "[stats][special][property]") {
  for (std::int64_t n : {10, 100, 1000}) {
    for (double q : {0.1, 0.5, 0.9}) {
      for (std::int64_t k = 2; k <= n; ++k) {
        CHECK(binomial_upper_tail(k, n, q) <= binomial_upper_tail(k - 1, n, q));
      }
    }
    for (std::int64_t k = 1; k <= n; k += std::max<std::int64_t>(1, n / 20)) {
      double prev = 0.0;
      for (int i = 1; i < 100; ++i) {
        const double v = binomial_upper_tail(k, n, i / 100.0);
        CHECK(v >= prev);
        prev = v;
      }
    }
  }
}

TEST_CASE("SymmetricMatrix checks symmetry", "[stats][linalg]") {
  Matrix m(2, 2);
  m << 1, 2, 2.5, 1;
  CHECK_THROWS_AS(SymmetricMatrix(m), DomainError);
  m(1, 0) = 2.0;
  const SymmetricMatrix s(m);
  CHECK(s(0, 1) == 2.0);
  const std::size_t idx[] = {1};
  CHECK(s.principal_submatrix(idx)(0, 0) == 1.0);
}

TEST_CASE("cholesky examples", "[stats][linalg]") {
  CHECK(cholesky(SymmetricMatrix::identity(4)).lower().isApprox(Matrix::Identity(4, 4)));
  Matrix a(2, 2);
  a << 4, 2, 2, 3;
  const auto l = cholesky(SymmetricMatrix(a)).lower();
  CHECK_THAT(l(0, 0), WithinAbs(2.0, 1e-15));
  CHECK(l(0, 1) == 0.0);
  CHECK_THAT(l(1, 0), WithinAbs(1.0, 1e-15));
  CHECK_THAT(l(1, 1), WithinAbs(std::sqrt(2.0), 1e-15));

  const auto f = cholesky(SymmetricMatrix(ar1(5, 0.5)));
  CHECK((f.reconstruct() - ar1(5, 0.5)).cwiseAbs().maxCoeff() < 1e-14);

  Matrix singular(2, 2);
  singular << 1, 1, 1, 1;
  CHECK_THROWS_AS(cholesky(SymmetricMatrix(singular)), SingularityError);
  Matrix indefinite(2, 2);
  indefinite << 1, 2, 2, 1;
  CHECK_THROWS_AS(cholesky(SymmetricMatrix(indefinite)), SingularityError);
}

TEST_CASE("spd_solve examples", "[stats][linalg]") {
  Vector b(3);
  b << 1, -2, 3;
  CHECK(spd_solve(SymmetricMatrix::identity(3), b).isApprox(b));
  Matrix d = Matrix::Zero(2, 2);
  d.diagonal() << 2, 4;
  Vector rhs(2);
  rhs << 2, 4;
  const Vector x = spd_solve(SymmetricMatrix(d), rhs);
  CHECK_THAT(x(0), WithinAbs(1.0, 1e-15));
  CHECK_THAT(x(1), WithinAbs(1.0, 1e-15));

  Matrix ill = Matrix::Identity(2, 2);
  ill(1, 1) = 1e-13;
  CHECK_THROWS_AS(spd_solve(SymmetricMatrix(ill), rhs), SingularityError);
}

TEST_CASE("cholesky and spd_solve residuals on random SPD matrices", "[stats][linalg][property]") {
  RngStream rng(11);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t d = 1 + rng.uniform_index(50);
    const Matrix a = random_spd(d, rng);
    const SymmetricMatrix s(a);
    const auto f = cholesky(s);
    const double scale = a.cwiseAbs().maxCoeff();
    CHECK((f.reconstruct() - a).cwiseAbs().maxCoeff() <= 1e-12 * scale);
    const Eigen::LLT<Matrix> llt(a);
    CHECK((f.lower() - Matrix(llt.matrixL())).cwiseAbs().maxCoeff() <= 1e-10 * std::sqrt(scale));

    Vector b(static_cast<Eigen::Index>(d));
    for (Eigen::Index j = 0; j < b.size(); ++j) b(j) = rng.normal();
    const Vector x = spd_solve(s, b);
    CHECK((a * x - b).norm() <= 1e-10 * (a.norm() * x.norm() + b.norm()));
  }
}

TEST_CASE("max_eigenvalue examples", "[stats][linalg]") {
  Matrix d = Matrix::Zero(3, 3);
  d.diagonal() << 1, 5, 3;
  CHECK_THAT(max_eigenvalue(SymmetricMatrix(d)), WithinRel(5.0, 1e-10));
  CHECK_THAT(max_eigenvalue(SymmetricMatrix::identity(6)), WithinRel(1.0, 1e-10));
  Matrix cs = Matrix::Constant(10, 10, 0.5);
  cs.diagonal().setOnes();
  CHECK_THAT(max_eigenvalue(SymmetricMatrix(cs)), WithinRel(5.5, 1e-10));
}

TEST_CASE("max_eigenvalue matches a full eigensolver", "[stats][linalg][property]") {
  RngStream rng(12);
  for (int i = 0; i < 300; ++i) {
    const std::size_t d = 1 + rng.uniform_index(40);
    const Matrix a = random_spd(d, rng);
    const Eigen::SelfAdjointEigenSolver<Matrix> es(a);
    CHECK_THAT(max_eigenvalue(SymmetricMatrix(a)), WithinRel(es.eigenvalues().maxCoeff(), 1e-8));
  }
  // Near-tied leading pair.
  Matrix t = Matrix::Zero(3, 3);
  t.diagonal() << 2.0, 2.0 - 1e-9, 0.5;
  CHECK_THAT(max_eigenvalue(SymmetricMatrix(t)), WithinRel(2.0, 1e-8));
}

TEST_CASE("sample_mvn examples", "[stats][rng]") {
  RngStream rng(3);
  const Vector zero = Vector::Zero(4);
  const Matrix none = sample_mvn(zero, Matrix::Identity(4, 4), 0, rng);
  CHECK(none.rows() == 0);
  CHECK(none.cols() == 4);

  const std::size_t n = 100000;
  const Matrix x = sample_mvn(zero, Matrix::Identity(4, 4), n, rng);
  const Vector mean = x.colwise().mean();
  CHECK(mean.cwiseAbs().maxCoeff() < 4.0 / std::sqrt(static_cast<double>(n)));

  RngStream r1(99), r2(99);
  CHECK(sample_mvn(zero, Matrix::Identity(4, 4), 50, r1) ==
        sample_mvn(zero, Matrix::Identity(4, 4), 50, r2));
}

TEST_CASE("sample_mvn reproduces an AR(1) covariance", "[stats][rng][property]") {
  for (std::size_t d : {3, 10}) {
    const Matrix sigma = ar1(d, 0.5);
    const auto f = cholesky(SymmetricMatrix(sigma));
    RngStream rng(21, d);
    const Matrix x = sample_mvn(Vector::Zero(static_cast<Eigen::Index>(d)), f.lower(), 100000, rng);
    const Matrix c = x.rowwise() - x.colwise().mean();
    const Matrix cov = c.transpose() * c / static_cast<double>(x.rows() - 1);
    CHECK((cov - sigma).cwiseAbs().maxCoeff() < 5e-2);
  }
}

TEST_CASE("RngStream streams are deterministic and distinct", "[stats][rng]") {
  RngStream a(5, 1), b(5, 1), c(5, 2), d(6, 1);
  std::vector<std::uint64_t> va, vb, vc, vd;
  for (int i = 0; i < 16; ++i) {
    va.push_back(a());
    vb.push_back(b());
    vc.push_back(c());
    vd.push_back(d());
  }
  CHECK(va == vb);
  CHECK(va != vc);
  CHECK(va != vd);

  const RngStream parent(5, 1);
  auto c1 = parent.child(3), c2 = parent.child(3), c3 = parent.child(4);
  CHECK(c1() == c2());
  CHECK(c1() != c3());

  RngStream u(8);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double v = u.uniform();
    REQUIRE(v >= 0.0);
    REQUIRE(v < 1.0);
    sum += v;
    REQUIRE(u.uniform_index(7) < 7);
  }
  CHECK_THAT(sum / 100000, WithinAbs(0.5, 4 * std::sqrt(1.0 / 12 / 100000)));
}
