#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "nplda/errors.hpp"
#include "nplda/scoring/scoring.hpp"

namespace nplda::scoring {

namespace {

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

Matrix gather_rows(const Matrix& m, std::span<const std::size_t> idx) {
  Matrix out(static_cast<Eigen::Index>(idx.size()), m.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(idx[i]));
  }
  return out;
}

void check_grid(std::span<const double> grid) {
  if (grid.empty()) throw DomainError("lasso: lambda grid must be nonempty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(grid[i]) || grid[i] < 0.0) {
      throw DomainError("lasso: lambda values must be finite and >= 0");
    }
    if (i > 0 && !(grid[i] < grid[i - 1])) {
      throw DomainError("lasso: lambda grid must be strictly decreasing");
    }
  }
}

// Grid values strictly above `lambda`, then `lambda` itself.
std::vector<double> grid_down_to(const LassoProblem& problem, double lambda) {
  std::vector<double> grid;
  for (double g : problem.default_grid()) {
    if (g > lambda) grid.push_back(g);
  }
  grid.push_back(lambda);
  return grid;
}

}  // namespace

LassoProblem::LassoProblem(const Matrix& class0, const Matrix& class1, LassoOptions options)
    : n0_(static_cast<std::size_t>(class0.rows())),
      n1_(static_cast<std::size_t>(class1.rows())),
      options_(options) {
  if (n0_ == 0 || n1_ == 0) throw DomainError("lasso: both classes need observations");
  if (class0.cols() != class1.cols()) throw DomainError("lasso: dimension mismatch");
  if (class0.cols() == 0) throw DomainError("lasso: dimension must be positive");
  if (!(options_.tol > 0.0) || !(options_.kkt_tol > 0.0) || options_.max_sweeps < 1) {
    throw DomainError("lasso: invalid solver options");
  }
  const auto n = static_cast<Eigen::Index>(n0_ + n1_);
  const auto nd = static_cast<double>(n);
  x_.resize(n, class0.cols());
  x_.topRows(class0.rows()) = class0;
  x_.bottomRows(class1.rows()) = class1;
  if (!x_.allFinite()) throw DomainError("lasso: features must be finite");
  col_mean_ = x_.colwise().mean().transpose();
  x_.rowwise() -= col_mean_.transpose();

  y_.resize(n);
  y_.head(class0.rows()).setConstant(-nd / static_cast<double>(n0_));
  y_.tail(class1.rows()).setConstant(nd / static_cast<double>(n1_));
  // n0 * (-n/n0) + n1 * (n/n1) = 0, so the recoded responses are already centred.
  y_mean_ = 0.0;

  curvature_ = (2.0 / nd) * x_.colwise().squaredNorm().transpose();
}

double LassoProblem::lambda_max() const {
  const double nd = static_cast<double>(n());
  return (x_.transpose() * y_).cwiseAbs().maxCoeff() * 2.0 / nd;
}

std::vector<double> LassoProblem::default_grid(std::size_t count, double decades) const {
  if (count == 0) throw DomainError("default_grid: count must be positive");
  if (!std::isfinite(decades)) throw DomainError("default_grid: decades must be finite");
  if (decades <= 0.0) decades = dim() >= n() ? 2.0 : 3.0;
  const double top = lambda_max();
  if (!(top > 0.0)) return {0.0};
  std::vector<double> grid(count);
  if (count == 1) {
    grid[0] = top;
    return grid;
  }
  const double step = decades / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) {
    grid[i] = top * std::pow(10.0, -step * static_cast<double>(i));
  }
  return grid;
}

double LassoProblem::objective(const Vector& beta, double lambda) const {
  if (static_cast<std::size_t>(beta.size()) != dim()) {
    throw DomainError("lasso objective: coefficient length mismatch");
  }
  const Vector r = y_ - x_ * beta;
  return r.squaredNorm() / static_cast<double>(n()) + lambda * beta.lpNorm<1>();
}

double LassoProblem::kkt_residual(const Vector& beta, double lambda) const {
  if (static_cast<std::size_t>(beta.size()) != dim()) {
    throw DomainError("lasso KKT: coefficient length mismatch");
  }
  const Vector g = (2.0 / static_cast<double>(n())) * (x_.transpose() * (y_ - x_ * beta));
  double worst = 0.0;
  for (Eigen::Index j = 0; j < g.size(); ++j) {
    const double v = beta(j) == 0.0 ? std::max(0.0, std::abs(g(j)) - lambda)
                                    : std::abs(g(j) - lambda * (beta(j) > 0.0 ? 1.0 : -1.0));
    worst = std::max(worst, v);
  }
  return worst;
}

LassoFit LassoProblem::solve_impl(double lambda, Vector beta, double prev_lambda,
                                  std::vector<double>* trace) const {
  if (!std::isfinite(lambda) || lambda < 0.0) {
    throw DomainError("lasso: lambda must be finite and >= 0");
  }
  const auto d = static_cast<Eigen::Index>(dim());
  if (beta.size() == 0) beta = Vector::Zero(d);
  if (beta.size() != d) throw DomainError("lasso: warm start has wrong length");

  const double two_over_n = 2.0 / static_cast<double>(n());
  Vector r = y_ - x_ * beta;
  Vector g = two_over_n * (x_.transpose() * r);

  std::vector<char> in_set(static_cast<std::size_t>(d), 0);
  std::vector<Eigen::Index> work;
  const double strong = 2.0 * lambda - prev_lambda;
  for (Eigen::Index j = 0; j < d; ++j) {
    if (curvature_(j) > 0.0 && (beta(j) != 0.0 || std::abs(g(j)) >= strong)) {
      in_set[static_cast<std::size_t>(j)] = 1;
      work.push_back(j);
    }
  }

  auto record = [&] {
    if (trace) trace->push_back(r.squaredNorm() / static_cast<double>(n()) + lambda * beta.lpNorm<1>());
  };

  const double scale = y_.squaredNorm() / static_cast<double>(n());
  double tol = options_.tol;
  int sweeps = 0;
  double residual = std::numeric_limits<double>::infinity();
  auto sweep = [&](const std::vector<Eigen::Index>& coords) {
    if (sweeps >= options_.max_sweeps) {
      throw NumericalError("lasso: coordinate descent did not converge at lambda=" +
                               std::to_string(lambda) + " after " + std::to_string(sweeps) +
                               " sweeps",
                           kkt_residual(beta, lambda));
    }
    ++sweeps;
    double max_change = 0.0;
    for (Eigen::Index j : coords) {
      const double c = curvature_(j);
      const double old = beta(j);
      const double z = two_over_n * x_.col(j).dot(r) + c * old;
      const double updated = soft_threshold(z, lambda) / c;
      if (updated != old) {
        r.noalias() -= (updated - old) * x_.col(j);
        beta(j) = updated;
        max_change = std::max(max_change, c * (updated - old) * (updated - old));
      }
    }
    record();
    return max_change;
  };

  std::vector<Eigen::Index> active;
  for (;;) {
    // Full passes over the working set; between them, cycle on the nonzero
    // coordinates only until they settle.
    while (sweep(work) > tol * scale) {
      active.clear();
      for (Eigen::Index j : work) {
        if (beta(j) != 0.0) active.push_back(j);
      }
      while (sweep(active) > tol * scale) {
      }
    }

    r = y_ - x_ * beta;
    g = two_over_n * (x_.transpose() * r);
    bool added = false;
    residual = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
      if (curvature_(j) == 0.0) continue;
      if (beta(j) == 0.0) {
        const double v = std::abs(g(j)) - lambda;
        residual = std::max(residual, v);
        if (v > options_.kkt_tol && !in_set[static_cast<std::size_t>(j)]) {
          in_set[static_cast<std::size_t>(j)] = 1;
          work.push_back(j);
          added = true;
        }
      } else {
        residual = std::max(residual, std::abs(g(j) - lambda * (beta(j) > 0.0 ? 1.0 : -1.0)));
      }
    }
    if (added) {
      std::sort(work.begin(), work.end());
      continue;
    }
    if (residual <= options_.kkt_tol || !options_.kkt_refine) break;
    tol = std::max(tol * 0.1, 1e-15);
  }

  LassoFit fit;
  fit.lambda = lambda;
  fit.sweeps = sweeps;
  fit.kkt_residual = std::max(residual, 0.0);
  for (Eigen::Index j = 0; j < d; ++j) {
    if (beta(j) != 0.0) fit.support.push_back(static_cast<std::size_t>(j));
  }
  fit.intercept = y_mean_ - col_mean_.dot(beta);
  fit.objective = r.squaredNorm() / static_cast<double>(n()) + lambda * beta.lpNorm<1>();
  fit.beta = std::move(beta);
  return fit;
}

LassoFit LassoProblem::solve(double lambda, const Vector& start) const {
  return solve_impl(lambda, start, lambda_max(), nullptr);
}

std::vector<LassoFit> LassoProblem::path(std::span<const double> grid) const {
  check_grid(grid);
  std::vector<LassoFit> fits;
  fits.reserve(grid.size());
  Vector beta = Vector::Zero(static_cast<Eigen::Index>(dim()));
  double prev = std::max(lambda_max(), grid.front());
  for (double lambda : grid) {
    fits.push_back(solve_impl(lambda, beta, prev, nullptr));
    beta = fits.back().beta;
    prev = lambda;
  }
  return fits;
}

std::vector<double> lasso_objective_trace(const LassoProblem& problem, double lambda) {
  std::vector<double> trace;
  trace.push_back(problem.objective(Vector::Zero(static_cast<Eigen::Index>(problem.dim())), lambda));
  (void)problem.solve_impl(lambda, Vector(), problem.lambda_max(), &trace);
  return trace;
}

ScoringFunction to_scoring_function(const LassoFit& fit, std::size_t n0, std::size_t n1) {
  FitMeta meta{ScoreMethod::Slda, fit.lambda, n0, n1, static_cast<std::size_t>(fit.beta.size())};
  return ScoringFunction(fit.beta, fit.support, meta);
}

ScoringFunction fit_slda(const Matrix& class0, const Matrix& class1, double lambda,
                         LassoOptions options) {
  if (!std::isfinite(lambda) || lambda < 0.0) {
    throw DomainError("fit_slda: lambda must be finite and >= 0");
  }
  const LassoProblem problem(class0, class1, options);
  const auto grid = grid_down_to(problem, lambda);
  auto fits = problem.path(grid);
  return to_scoring_function(fits.back(), problem.n0(), problem.n1());
}

CvResult select_lambda_cv(const Matrix& class0, const Matrix& class1, std::size_t folds,
                          std::span<const double> grid, stats::RngStream& rng,
                          LassoOptions options, CvRule rule) {
  check_grid(grid);
  const auto n0 = static_cast<std::size_t>(class0.rows());
  const auto n1 = static_cast<std::size_t>(class1.rows());
  if (class0.cols() != class1.cols()) throw DomainError("select_lambda_cv: dimension mismatch");
  const std::size_t k = std::min({folds, n0, n1});
  if (k < 2) {
    throw DomainError("select_lambda_cv: need at least 2 folds with both classes in each");
  }

  CvResult result;
  result.grid.assign(grid.begin(), grid.end());
  result.errors.assign(grid.size(), 0.0);
  result.std_errors.assign(grid.size(), 0.0);
  if (grid.size() == 1) {
    result.lambda = result.lambda_min = grid.front();
    return result;
  }

  auto assign = [&](std::size_t count) {
    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(order));
    std::vector<std::size_t> fold(count);
    for (std::size_t i = 0; i < count; ++i) fold[order[i]] = i % k;
    return fold;
  };
  const auto fold0 = assign(n0);
  const auto fold1 = assign(n1);

  // Fold fits only feed sign-rule error counts.
  LassoOptions fold_options = options;
  fold_options.kkt_refine = false;
  std::vector<std::size_t> wrong(grid.size(), 0);
  std::vector<std::vector<double>> fold_rate(grid.size(), std::vector<double>(k, 0.0));
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<std::size_t> tr0, te0, tr1, te1;
    for (std::size_t i = 0; i < n0; ++i) (fold0[i] == f ? te0 : tr0).push_back(i);
    for (std::size_t i = 0; i < n1; ++i) (fold1[i] == f ? te1 : tr1).push_back(i);
    const Matrix test0 = gather_rows(class0, te0);
    const Matrix test1 = gather_rows(class1, te1);
    const LassoProblem problem(gather_rows(class0, tr0), gather_rows(class1, tr1), fold_options);
    const auto fits = problem.path(grid);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const Vector s0 = (test0 * fits[g].beta).array() + fits[g].intercept;
      const Vector s1 = (test1 * fits[g].beta).array() + fits[g].intercept;
      const auto w = static_cast<std::size_t>((s0.array() > 0.0).count()) +
                     static_cast<std::size_t>((s1.array() <= 0.0).count());
      wrong[g] += w;
      fold_rate[g][f] = static_cast<double>(w) / static_cast<double>(te0.size() + te1.size());
    }
  }

  std::size_t best = 0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    result.errors[g] = static_cast<double>(wrong[g]) / static_cast<double>(n0 + n1);
    double mean = 0.0, ss = 0.0;
    for (double r : fold_rate[g]) mean += r;
    mean /= static_cast<double>(k);
    for (double r : fold_rate[g]) ss += (r - mean) * (r - mean);
    result.std_errors[g] = std::sqrt(ss / static_cast<double>(k - 1) / static_cast<double>(k));
    if (wrong[g] < wrong[best]) best = g;
  }
  result.lambda_min = grid[best];
  result.lambda = result.lambda_min;
  if (rule == CvRule::OneSe) {
    const double limit = result.errors[best] + result.std_errors[best];
    for (std::size_t g = 0; g < best; ++g) {
      if (result.errors[g] <= limit) {
        result.lambda = grid[g];
        break;
      }
    }
  }
  return result;
}

LassoFit fit_slda_auto(const Matrix& class0, const Matrix& class1, std::optional<double> lambda,
                       std::size_t folds, stats::RngStream& rng, LassoOptions options,
                       CvRule rule) {
  const LassoProblem problem(class0, class1, options);
  double chosen;
  if (lambda) {
    if (!std::isfinite(*lambda) || *lambda < 0.0) {
      throw DomainError("fit_slda: lambda must be finite and >= 0");
    }
    chosen = *lambda;
  } else {
    const auto grid = problem.default_grid();
    chosen = select_lambda_cv(class0, class1, folds, grid, rng, options, rule).lambda;
  }
  const auto grid = grid_down_to(problem, chosen);
  auto fits = problem.path(grid);
  return std::move(fits.back());
}

}  // namespace nplda::scoring
