#include "nplda/classifier/classifier.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "nplda/errors.hpp"

namespace nplda::classifier {

namespace {

constexpr std::array<std::pair<NpMethod, std::string_view>, 5> kMethodNames{{
    {NpMethod::NpLda, "np-lda"},
    {NpMethod::NpSlda, "np-slda"},
    {NpMethod::PnpLda, "pnp-lda"},
    {NpMethod::PnpSlda, "pnp-slda"},
    {NpMethod::ClassicSlda, "slda"},
}};

constexpr std::uint64_t kSplitKey = 1;
constexpr std::uint64_t kLambdaCvKey = 2;
constexpr std::uint64_t kClassicCvKey = 3;

void check_dim(std::size_t expected, Eigen::Index got) {
  if (static_cast<std::size_t>(got) != expected) {
    throw DomainError("dimension mismatch: model has d=" + std::to_string(expected) +
                      ", data has " + std::to_string(got) + " features");
  }
}

}  // namespace

std::string to_string(NpMethod method) {
  for (const auto& [m, name] : kMethodNames) {
    if (m == method) return std::string(name);
  }
  throw DomainError("unknown method");
}

NpMethod parse_method(std::string_view name) {
  for (const auto& [m, n] : kMethodNames) {
    if (n == name) return m;
  }
  throw DomainError("unknown method '" + std::string(name) +
                    "'; valid: np-lda, np-slda, pnp-lda, pnp-slda, slda");
}

bool uses_umbrella(NpMethod method) {
  return method == NpMethod::NpLda || method == NpMethod::NpSlda;
}

bool uses_parametric(NpMethod method) {
  return method == NpMethod::PnpLda || method == NpMethod::PnpSlda;
}

bool is_sparse(NpMethod method) {
  return method == NpMethod::NpSlda || method == NpMethod::PnpSlda ||
         method == NpMethod::ClassicSlda;
}

NpClassifier::NpClassifier(scoring::ScoringFunction score, thresholding::ThresholdResult threshold,
                           NpMethod method, ClassifierConfig config)
    : score_(std::move(score)),
      threshold_(std::move(threshold)),
      method_(method),
      config_(config) {
  if (std::isnan(threshold_.cutoff)) throw DomainError("NpClassifier: cutoff is NaN");
}

double NpClassifier::score(const Vector& x) const { return score_.score(x); }

int NpClassifier::predict(const Vector& x) const { return score(x) > cutoff() ? 1 : 0; }

Vector NpClassifier::scores(const Matrix& x) const {
  check_dim(dim(), x.cols());
  return score_.score_rows(x);
}

std::vector<std::uint8_t> NpClassifier::predict_rows(const Matrix& x) const {
  const Vector s = scores(x);
  std::vector<std::uint8_t> out(static_cast<std::size_t>(s.size()));
  for (Eigen::Index i = 0; i < s.size(); ++i) out[static_cast<std::size_t>(i)] = s(i) > cutoff();
  return out;
}

ErrorPair error_pair(std::span<const std::uint8_t> labels,
                     std::span<const std::uint8_t> labels_hat) {
  if (labels.size() != labels_hat.size()) throw DomainError("error_pair: length mismatch");
  std::size_t n0 = 0, n1 = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 0) {
      ++n0;
      fp += labels_hat[i] != 0;
    } else {
      ++n1;
      fn += labels_hat[i] == 0;
    }
  }
  if (n0 == 0 || n1 == 0) throw DomainError("evaluate: test data must contain both classes");
  return {static_cast<double>(fp) / static_cast<double>(n0),
          static_cast<double>(fn) / static_cast<double>(n1)};
}

ErrorPair evaluate(const NpClassifier& clf, const data::LabeledDataset& test) {
  const auto hat = clf.predict_rows(test.features());
  return error_pair(test.labels(), hat);
}

void check_feasible(NpMethod method, std::size_t n0, std::size_t n1, std::size_t d, double alpha,
                    double delta0, double tau) {
  if (n0 == 0 || n1 == 0) {
    throw DomainError("training data must contain both classes (n0=" + std::to_string(n0) +
                      ", n1=" + std::to_string(n1) + ")");
  }
  if (method == NpMethod::ClassicSlda) return;
  thresholding::UmbrellaConfig{alpha, delta0}.validate();
  if (!(tau > 0.0 && tau < 1.0)) throw DomainError("tau must lie strictly inside (0, 1)");
  const std::size_t n0_train = data::split_train_size(n0, tau);
  const std::size_t n0_prime = n0 - std::min(n0_train, n0);
  if (n0_train == 0 || n0_prime == 0) {
    throw FeasibilityError("tau=" + std::to_string(tau) + " leaves an empty side of the class-0 split (N0=" +
                               std::to_string(n0) + ")",
                           2, n0);
  }
  if (uses_umbrella(method)) {
    const std::size_t required = thresholding::min_class0_size(alpha, delta0);
    if (n0_prime < required) {
      throw FeasibilityError(
          "insufficient left-out class-0 sample for " + to_string(method) + ": need n0' >= " +
              std::to_string(required) + " at alpha=" + std::to_string(alpha) +
              ", delta0=" + std::to_string(delta0) + ", but N0=" + std::to_string(n0) +
              " with tau=" + std::to_string(tau) + " leaves n0'=" + std::to_string(n0_prime),
          required, n0_prime);
    }
  }
  if (uses_parametric(method) && n0_prime < 2) {
    throw FeasibilityError("parametric threshold needs n0' >= 2", 2, n0_prime);
  }
  if (!is_sparse(method) && d + 2 >= n0_train + n1) {
    throw FeasibilityError("LDA requires d < n0+n1-2 (d=" + std::to_string(d) +
                               ", n0+n1-2=" + std::to_string(n0_train + n1 - 2) + ")",
                           d + 3, n0_train + n1);
  }
}

std::vector<MethodOutcome> train_shared(const data::LabeledDataset& dataset,
                                        std::span<const NpMethod> methods, double alpha,
                                        double delta0, double tau, stats::RngStream& rng,
                                        const TrainOptions& options) {
  const std::size_t n0 = dataset.count(0);
  const std::size_t n1 = dataset.count(1);
  const std::size_t d = dataset.dim();
  if (!(options.epsilon > 0.0)) throw DomainError("epsilon must be positive");

  std::vector<MethodOutcome> out;
  out.reserve(methods.size());
  bool need_split = false;
  for (NpMethod m : methods) {
    MethodOutcome o{m, std::nullopt, {}};
    try {
      check_feasible(m, n0, n1, d, alpha, delta0, tau);
      need_split = need_split || m != NpMethod::ClassicSlda;
    } catch (const FeasibilityError& e) {
      o.error = e.what();
    }
    out.push_back(std::move(o));
  }

  const Matrix class1 = dataset.class_rows(1);

  std::optional<data::Class0Split> split;
  Matrix s0_train, s0_prime;
  if (need_split) {
    auto split_rng = rng.child(kSplitKey);
    split = data::split_class0(dataset, tau, split_rng);
    s0_train = dataset.rows(split->train_indices);
    s0_prime = dataset.rows(split->threshold_indices);
  }

  std::optional<scoring::PooledMoments> lda_moments;
  std::optional<scoring::ScoringFunction> lda_score;
  std::optional<scoring::LassoFit> slda_fit;
  const thresholding::UmbrellaConfig cfg{alpha, delta0};

  for (auto& o : out) {
    if (!o.error.empty()) continue;
    try {
      ClassifierConfig config;
      config.epsilon = options.epsilon;
      if (o.method == NpMethod::ClassicSlda) {
        auto cv_rng = rng.child(kClassicCvKey);
        const auto fit = scoring::fit_slda_auto(dataset.class_rows(0), class1, options.lambda,
                                                options.cv_folds, cv_rng, options.lasso,
                                                options.cv_rule);
        config.lambda = fit.lambda;
        config.lambda_from_cv = !options.lambda.has_value();
        thresholding::ThresholdResult th;
        th.cutoff = -fit.intercept;
        th.kind = thresholding::SignRuleInfo{fit.intercept};
        o.classifier.emplace(scoring::to_scoring_function(fit, n0, n1), th, o.method, config);
        continue;
      }

      config.alpha = alpha;
      config.delta0 = delta0;
      config.tau = tau;
      const scoring::ScoringFunction* score = nullptr;
      scoring::PooledMoments moments;
      if (is_sparse(o.method)) {
        if (!slda_fit) {
          auto cv_rng = rng.child(kLambdaCvKey);
          slda_fit = scoring::fit_slda_auto(s0_train, class1, options.lambda, options.cv_folds,
                                            cv_rng, options.lasso, options.cv_rule);
        }
        config.lambda = slda_fit->lambda;
        config.lambda_from_cv = !options.lambda.has_value();
      } else if (!lda_score) {
        lda_moments = scoring::pooled_moments(s0_train, class1);
        lda_score = scoring::fit_lda(*lda_moments);
      }

      scoring::ScoringFunction sparse_score;
      if (is_sparse(o.method)) {
        sparse_score = scoring::to_scoring_function(*slda_fit, s0_train.rows(), class1.rows());
        score = &sparse_score;
      } else {
        score = &*lda_score;
      }

      const Vector prime_scores = score->score_rows(s0_prime);
      const std::span<const double> ps(prime_scores.data(),
                                       static_cast<std::size_t>(prime_scores.size()));
      thresholding::ThresholdResult th;
      if (uses_umbrella(o.method)) {
        th = thresholding::umbrella_threshold(ps, cfg);
      } else if (is_sparse(o.method)) {
        if (score->support().empty()) {
          throw FeasibilityError("parametric threshold: degenerate score with empty support");
        }
        moments = scoring::pooled_moments(s0_train, class1, score->support());
        th = thresholding::parametric_threshold(*score, moments, ps, cfg, options.epsilon);
      } else {
        th = thresholding::parametric_threshold(*score, *lda_moments, ps, cfg, options.epsilon);
      }
      o.classifier.emplace(*score, th, o.method, config);
    } catch (const FeasibilityError& e) {
      o.error = e.what();
    }
  }
  return out;
}

NpClassifier train(const data::LabeledDataset& dataset, NpMethod method, double alpha,
                   double delta0, double tau, stats::RngStream& rng, const TrainOptions& options) {
  const NpMethod methods[] = {method};
  auto outcome = train_shared(dataset, methods, alpha, delta0, tau, rng, options);
  if (!outcome.front().classifier) {
    check_feasible(method, dataset.count(0), dataset.count(1), dataset.dim(), alpha, delta0, tau);
    throw FeasibilityError(outcome.front().error);
  }
  return std::move(*outcome.front().classifier);
}

}  // namespace nplda::classifier
