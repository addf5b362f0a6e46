#include "nplda/stats/special.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "nplda/errors.hpp"

namespace nplda::stats {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;  // 0.5 * log(2*pi)

// Stirling remainder: lgamma(x) - [(x - 0.5) log x - x + 0.5 log(2 pi)].
double stirling_remainder(double x) {
  if (x >= 15.0) {
    const double r = 1.0 / x;
    const double r2 = r * r;
    return r * (1.0 / 12.0 -
                r2 * (1.0 / 360.0 -
                      r2 * (1.0 / 1260.0 - r2 * (1.0 / 1680.0 - r2 / 1188.0))));
  }
  return std::lgamma(x) - ((x - 0.5) * std::log(x) - x + kHalfLog2Pi);
}

// log( x^a y^b / B(a,b) ) with y = 1 - x.
//
// Writing log B(a,b) through Stirling remainders turns the prefactor into
// a*log(x c / a) + b*log(y c / b) + ..., where both logs are near zero at the
// mode, so no large lgamma terms cancel.
double log_beta_prefactor(double a, double b, double x, double y) {
  const double c = a + b;
  return a * std::log(x * c / a) + b * std::log(y * c / b) +
         0.5 * std::log(a / c * b) - kHalfLog2Pi - stirling_remainder(a) -
         stirling_remainder(b) + stirling_remainder(c);
}

// Continued fraction for I_x(a,b) (modified Lentz), valid for
// x < (a + 1) / (a + b + 2).
double beta_continued_fraction(double a, double b, double x) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-16;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  const int max_iter = 20000 + static_cast<int>(20.0 * std::sqrt(qab));

  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= max_iter; ++m) {
    const double md = m;
    const double m2 = 2.0 * md;
    double aa = md * (b - md) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + md) * (qab + md) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  throw NumericalError("incomplete beta continued fraction did not converge (a=" +
                       std::to_string(a) + ", b=" + std::to_string(b) + ")");
}

}  // namespace

double normal_cdf(double z) {
  return 0.5 * std::erfc(-z * std::numbers::sqrt2 / 2.0);
}

// Wichura's AS241 (PPND16), relative accuracy about 1e-16.
double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("normal_quantile: p must lie in (0, 1), got " +
                      std::to_string(p));
  }
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((r * 2509.0809287301226727 + 33430.575583588128105) * r +
                 67265.770927008700853) * r + 45921.953931549871457) * r +
               13731.693765509461125) * r + 1971.5909503065514427) * r +
             133.14166789178437745) * r + 3.387132872796366608) /
           (((((((r * 5226.495278852545925 + 28729.085735721942674) * r +
                 39307.89580009271061) * r + 21213.794301586595867) * r +
               5394.1960214247511077) * r + 687.1870074920579083) * r +
             42.313330701600911252) * r + 1.0);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((r * 7.7454501427834140764e-4 + 0.0227238449892691845833) * r +
                0.24178072517745061177) * r + 1.27045825245236838258) * r +
              3.64784832476320460504) * r + 5.7694972214606914055) * r +
            4.6303378461565452959) * r + 1.42343711074968357734) /
          (((((((r * 1.05075007164441684324e-9 + 5.475938084995344946e-4) * r +
                0.0151986665636164571966) * r + 0.14810397642748007459) * r +
              0.68976733498510000455) * r + 1.6763848301838038494) * r +
            2.05319162663775882187) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((r * 2.01033439929228813265e-7 + 2.71155556874348757815e-5) * r +
                0.0012426609473880784386) * r + 0.026532189526576123093) * r +
              0.29656057182850489123) * r + 1.7848265399172913358) * r +
            5.4637849111641143699) * r + 6.6579046435011037772) /
          (((((((r * 2.04426310338993978564e-15 + 1.4215117583164458887e-7) * r +
                1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r +
              0.0148753612908506148525) * r + 0.13692988092273580531) * r +
            0.59983220655588793769) * r + 1.0);
  }
  return q < 0.0 ? -val : val;
}

double incomplete_beta(double a, double b, double x, double y) {
  if (!(a > 0.0 && b > 0.0)) {
    throw DomainError("incomplete_beta: shape parameters must be positive");
  }
  if (!(x >= 0.0 && x <= 1.0 && y >= 0.0 && y <= 1.0)) {
    throw DomainError("incomplete_beta: x must lie in [0, 1]");
  }
  if (x == 0.0) return 0.0;
  if (y == 0.0) return 1.0;
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return std::exp(log_beta_prefactor(a, b, x, y)) *
           beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - std::exp(log_beta_prefactor(b, a, y, x)) *
                   beta_continued_fraction(b, a, y) / b;
}

double incomplete_beta(double a, double b, double x) {
  return incomplete_beta(a, b, x, 1.0 - x);
}

double student_t_cdf(double t, double df) {
  if (!(df > 0.0)) throw DomainError("student_t_cdf: df must be positive");
  if (std::isnan(t)) return t;
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const double t2 = t * t;
  const double denom = df + t2;
  const double tail = 0.5 * incomplete_beta(0.5 * df, 0.5, df / denom, t2 / denom);
  return t < 0.0 ? tail : 1.0 - tail;
}

double student_t_quantile(double p, std::int64_t df) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("student_t_quantile: p must lie in (0, 1), got " +
                      std::to_string(p));
  }
  if (df < 1) throw DomainError("student_t_quantile: df must be >= 1");
  if (p == 0.5) return 0.0;
  const double nu = static_cast<double>(df);

  double lo = -50.0;
  double hi = 50.0;
  // Heavy tails (df = 1, 2) put extreme quantiles beyond the default bracket.
  while (student_t_cdf(lo, nu) > p) {
    hi = lo;
    lo *= 2.0;
    if (lo < -1e300) throw NumericalError("student_t_quantile: cannot bracket");
  }
  while (student_t_cdf(hi, nu) < p) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) throw NumericalError("student_t_quantile: cannot bracket");
  }
  for (int it = 0; it < 2000; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (hi - lo <= 1e-10 * std::max(1e-2, std::fabs(mid)) || mid == lo ||
        mid == hi) {
      break;
    }
    if (student_t_cdf(mid, nu) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double binomial_upper_tail(std::int64_t k, std::int64_t n, double q) {
  if (n < 1 || k < 1 || k > n) {
    throw DomainError("binomial_upper_tail: need 1 <= k <= n (k=" +
                      std::to_string(k) + ", n=" + std::to_string(n) + ")");
  }
  if (!(q >= 0.0 && q <= 1.0)) {
    throw DomainError("binomial_upper_tail: q must lie in [0, 1]");
  }
  // P[Bin(n,q) >= k] = I_q(k, n - k + 1)
  return incomplete_beta(static_cast<double>(k), static_cast<double>(n - k + 1), q,
                         1.0 - q);
}

}  // namespace nplda::stats
