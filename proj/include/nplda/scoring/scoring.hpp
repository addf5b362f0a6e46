#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nplda/stats/linalg.hpp"
#include "nplda/stats/rng.hpp"

namespace nplda::scoring {

enum class ScoreMethod { Lda, Slda };

std::string to_string(ScoreMethod m);

struct FitMeta {
  ScoreMethod method = ScoreMethod::Lda;
  std::optional<double> lambda;
  std::size_t n0 = 0;
  std::size_t n1 = 0;
  std::size_t d = 0;
};

/// Linear score s(x) = beta^T x (no offset). `support` lists the indices of
/// the non-zero coefficients as recorded by the fitting routine.
class ScoringFunction {
 public:
  ScoringFunction() = default;
  ScoringFunction(Vector beta, std::vector<std::size_t> support, FitMeta meta);

  const Vector& beta() const noexcept { return beta_; }
  const std::vector<std::size_t>& support() const noexcept { return support_; }
  const FitMeta& meta() const noexcept { return meta_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(beta_.size()); }

  double score(const Vector& x) const;
  /// Scores every row of `x`; only support columns are touched.
  Vector score_rows(const Matrix& x) const;

  /// Same direction multiplied by c > 0.
  ScoringFunction scaled(double c) const;

 private:
  Vector beta_;
  std::vector<std::size_t> support_;
  FitMeta meta_;
};

/// Class means and the pooled covariance with divisor n0 + n1 - 2.
/// When `columns` is non-empty the moments describe only those original
/// feature columns (in that order).
struct PooledMoments {
  Vector mu0_hat;
  Vector mu1_hat;
  stats::SymmetricMatrix sigma_hat;
  std::size_t n0 = 0;
  std::size_t n1 = 0;
  std::vector<std::size_t> columns;
};

PooledMoments pooled_moments(const Matrix& class0, const Matrix& class1,
                             std::span<const std::size_t> columns = {});

/// beta = Sigma_hat^{-1} (mu1_hat - mu0_hat). Throws FeasibilityError when
/// d >= n0 + n1 - 2 and SingularityError when Sigma_hat is numerically singular.
ScoringFunction fit_lda(const PooledMoments& moments);

// ---------------------------------------------------------------------------
// Lasso-penalised discriminant direction
// ---------------------------------------------------------------------------

struct LassoOptions {
  double tol = 1e-7;        ///< max curvature-weighted squared change per sweep, relative to |y|^2/n
  double kkt_tol = 1e-7;    ///< KKT certificate tolerance
  int max_sweeps = 10000;   ///< per lambda value
  /// Tighten `tol` until the KKT residual is below `kkt_tol`. When false,
  /// stop at the first sweep-convergence with no inactive KKT violators.
  bool kkt_refine = true;
};

struct LassoFit {
  Vector beta;
  double intercept = 0.0;
  std::vector<std::size_t> support;
  double lambda = 0.0;
  int sweeps = 0;
  double kkt_residual = 0.0;
  double objective = 0.0;
};

/// Least squares with recoded responses y = -n/n0 (class 0), n/n1 (class 1)
/// and an l1 penalty:
///   min_{beta, beta0}  n^{-1} sum_i (y_i - beta0 - x_i^T beta)^2 + lambda ||beta||_1.
/// Solved by cyclic coordinate descent on centred (not standardised)
/// features with warm starts and strong-rule screening. The intercept is
/// recovered as ybar - xbar^T beta.
class LassoProblem {
 public:
  LassoProblem(const Matrix& class0, const Matrix& class1, LassoOptions options = {});

  std::size_t n() const noexcept { return static_cast<std::size_t>(x_.rows()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(x_.cols()); }
  std::size_t n0() const noexcept { return n0_; }
  std::size_t n1() const noexcept { return n1_; }

  /// Smallest lambda with an all-zero solution: max_j |2 x_j^T y| / n.
  double lambda_max() const;
  /// `count` values, geometric from lambda_max down `decades` decades. A
  /// non-positive `decades` means 2 when d >= n and 3 otherwise.
  std::vector<double> default_grid(std::size_t count = 50, double decades = 0.0) const;

  /// Solves at one lambda, warm-started from `start` (zero when empty).
  LassoFit solve(double lambda, const Vector& start = Vector()) const;
  /// Solves along a decreasing grid with warm starts.
  std::vector<LassoFit> path(std::span<const double> grid) const;

  /// n^{-1} ||y - beta0 - X beta||^2 + lambda ||beta||_1 at the optimal beta0.
  double objective(const Vector& beta, double lambda) const;
  /// max over coordinates of the KKT violation at beta.
  double kkt_residual(const Vector& beta, double lambda) const;

 private:
  friend std::vector<double> lasso_objective_trace(const LassoProblem&, double);

  LassoFit solve_impl(double lambda, Vector beta, double prev_lambda,
                      std::vector<double>* trace) const;

  Matrix x_;        // centred design
  Vector y_;        // centred responses
  Vector col_mean_;
  double y_mean_ = 0.0;
  Vector curvature_;  // (2/n) ||x_j||^2
  std::size_t n0_ = 0;
  std::size_t n1_ = 0;
  LassoOptions options_;
};

/// Objective after each coordinate-descent sweep of a cold-started solve.
std::vector<double> lasso_objective_trace(const LassoProblem& problem, double lambda);

ScoringFunction to_scoring_function(const LassoFit& fit, std::size_t n0, std::size_t n1);

/// Fits at a fixed lambda.
ScoringFunction fit_slda(const Matrix& class0, const Matrix& class1, double lambda,
                         LassoOptions options = {});

enum class CvRule {
  Min,    ///< grid point with the smallest CV error
  OneSe,  ///< largest lambda within one standard error of the smallest
};

/// Stratified K-fold CV of the sign rule beta0 + beta^T x > 0 (0-1 loss) over
/// a decreasing grid. Ties go to the larger lambda. Folds are clamped to
/// min(folds, n0, n1) and must be at least 2.
struct CvResult {
  double lambda;
  double lambda_min;
  std::vector<double> grid;
  std::vector<double> errors;     ///< misclassification rate per grid point
  std::vector<double> std_errors; ///< standard error of the fold-level rates
};
CvResult select_lambda_cv(const Matrix& class0, const Matrix& class1, std::size_t folds,
                          std::span<const double> grid, stats::RngStream& rng,
                          LassoOptions options = {}, CvRule rule = CvRule::Min);

/// Fit with lambda chosen by CV over the default 50-point grid (or `lambda`
/// when given). Returns the full fit, including the intercept.
LassoFit fit_slda_auto(const Matrix& class0, const Matrix& class1,
                       std::optional<double> lambda, std::size_t folds,
                       stats::RngStream& rng, LassoOptions options = {},
                       CvRule rule = CvRule::Min);

}  // namespace nplda::scoring
