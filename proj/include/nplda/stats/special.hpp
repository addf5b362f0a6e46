#pragma once

#include <cstdint>

namespace nplda::stats {

/// Standard normal CDF. Saturates to exactly 0 or 1 far in the tails.
double normal_cdf(double z);

/// Inverse of normal_cdf on (0, 1). Throws DomainError outside the open interval.
double normal_quantile(double p);

/// Regularized incomplete beta I_x(a, b) for a, b > 0 and x in [0, 1].
///
/// Evaluated with a modified-Lentz continued fraction on whichever side of
/// the mode converges; the prefactor x^a (1-x)^b / B(a, b) is assembled from
/// Stirling remainders so that it stays accurate for a + b up to ~1e7.
/// `y` must equal 1 - x; passing it separately keeps precision when x is
/// close to 1.
double incomplete_beta(double a, double b, double x, double y);
double incomplete_beta(double a, double b, double x);

/// Student t CDF with `df` degrees of freedom (df > 0, may be non-integer).
double student_t_cdf(double t, double df);

/// Inverse Student t CDF by bisection on student_t_cdf.
double student_t_quantile(double p, std::int64_t df);

/// P[Bin(n, q) >= k] = sum_{j=k}^{n} C(n,j) q^j (1-q)^(n-j), for 1 <= k <= n.
double binomial_upper_tail(std::int64_t k, std::int64_t n, double q);

}  // namespace nplda::stats
