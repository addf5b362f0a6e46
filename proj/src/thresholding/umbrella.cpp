#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "nplda/errors.hpp"
#include "nplda/stats/special.hpp"
#include "nplda/thresholding/thresholding.hpp"

namespace nplda::thresholding {

namespace {

void check_unit(double v, const char* name) {
  if (!(v > 0.0 && v < 1.0)) {
    throw DomainError(std::string(name) + " must lie strictly inside (0, 1)");
  }
}

}  // namespace

void UmbrellaConfig::validate() const {
  check_unit(alpha, "alpha");
  check_unit(delta0, "delta0");
}

std::string ThresholdResult::kind_name() const {
  switch (kind.index()) {
    case 0:
      return "umbrella";
    case 1:
      return "parametric";
    default:
      return "sign_rule";
  }
}

double violation_rate(std::size_t k, std::size_t n0prime, double alpha) {
  check_unit(alpha, "alpha");
  if (k < 1 || k > n0prime) {
    throw DomainError("violation_rate: need 1 <= k <= n0' (k=" + std::to_string(k) +
                      ", n0'=" + std::to_string(n0prime) + ")");
  }
  const auto n = static_cast<double>(n0prime);
  if (k == n0prime) return std::exp(n * std::log1p(-alpha));
  if (k == 1) return -std::expm1(n * std::log(alpha));
  const auto kd = static_cast<double>(k);
  return stats::incomplete_beta(kd, n - kd + 1.0, 1.0 - alpha, alpha);
}

std::size_t min_class0_size(double alpha, double delta0) {
  check_unit(alpha, "alpha");
  check_unit(delta0, "delta0");
  const double log_q = std::log1p(-alpha);
  const double log_d = std::log(delta0);
  auto ok = [&](double n) { return n * log_q <= log_d; };
  auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(log_d / log_q)));
  while (!ok(static_cast<double>(n))) ++n;
  while (n > 1 && ok(static_cast<double>(n - 1))) --n;
  return n;
}

std::size_t k_star(std::size_t n0prime, double alpha, double delta0) {
  const std::size_t required = min_class0_size(alpha, delta0);
  if (n0prime < required) {
    throw FeasibilityError("insufficient left-out class-0 sample: need n0' >= " +
                               std::to_string(required) + " for alpha=" + std::to_string(alpha) +
                               ", delta0=" + std::to_string(delta0) + ", have " +
                               std::to_string(n0prime),
                           required, n0prime);
  }
  std::size_t lo = 1;
  std::size_t hi = n0prime;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (violation_rate(mid, n0prime, alpha) <= delta0) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return lo;
}

KPrime k_prime(std::size_t n0prime, double alpha, double delta0) {
  check_unit(alpha, "alpha");
  check_unit(delta0, "delta0");
  const auto n = static_cast<double>(n0prime);
  if (n * alpha * delta0 < 4.0 - 1e-9) {
    throw DomainError("k_prime: requires n0' >= 4/(alpha*delta0) = " +
                      std::to_string(4.0 / (alpha * delta0)) + ", got " +
                      std::to_string(n0prime));
  }
  const double m = n + 2.0;
  const double num = 1.0 + 2.0 * delta0 * m * (1.0 - alpha) +
                     std::sqrt(1.0 + 4.0 * delta0 * (1.0 - alpha) * alpha * m);
  const double den = 2.0 * (delta0 * m + 1.0);
  KPrime out;
  out.a = num / den;
  out.raw = static_cast<std::size_t>(std::ceil((n + 1.0) * out.a));
  out.clamped = std::min(out.raw, n0prime);
  out.was_clamped = out.raw > n0prime;
  return out;
}

ThresholdResult umbrella_threshold(std::span<const double> scores, const UmbrellaConfig& cfg) {
  cfg.validate();
  for (double s : scores) {
    if (std::isnan(s)) throw DomainError("umbrella_threshold: NaN score");
  }
  const std::size_t n = scores.size();
  const std::size_t k = k_star(n, cfg.alpha, cfg.delta0);
  std::vector<double> sorted(scores.begin(), scores.end());
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k - 1),
                   sorted.end());
  ThresholdResult result;
  result.cutoff = sorted[k - 1];
  result.kind = UmbrellaInfo{k, n, violation_rate(k, n, cfg.alpha)};
  return result;
}

}  // namespace nplda::thresholding
