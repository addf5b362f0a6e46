#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "nplda/data/dataset.hpp"
#include "nplda/scoring/scoring.hpp"
#include "nplda/stats/rng.hpp"
#include "nplda/thresholding/thresholding.hpp"

namespace nplda::classifier {

enum class NpMethod { NpLda, NpSlda, PnpLda, PnpSlda, ClassicSlda };

/// "np-lda", "np-slda", "pnp-lda", "pnp-slda", "slda".
std::string to_string(NpMethod method);
/// Inverse of to_string; throws DomainError listing the valid names.
NpMethod parse_method(std::string_view name);

bool uses_umbrella(NpMethod method);
bool uses_parametric(NpMethod method);
bool is_sparse(NpMethod method);

struct TrainOptions {
  double epsilon = 1e-3;
  std::optional<double> lambda;  ///< fixed lasso penalty; CV when absent
  std::size_t cv_folds = 5;
  scoring::CvRule cv_rule = scoring::CvRule::OneSe;  ///< applies when lambda is absent
  scoring::LassoOptions lasso;
};

struct ClassifierConfig {
  std::optional<double> alpha;   ///< absent for ClassicSlda
  std::optional<double> delta0;
  std::optional<double> tau;
  double epsilon = 1e-3;
  std::optional<double> lambda;  ///< lasso penalty actually used
  bool lambda_from_cv = false;
};

/// phi(x) = 1 iff beta^T x > cutoff.
class NpClassifier {
 public:
  NpClassifier(scoring::ScoringFunction score, thresholding::ThresholdResult threshold,
               NpMethod method, ClassifierConfig config);

  const scoring::ScoringFunction& score_function() const noexcept { return score_; }
  const thresholding::ThresholdResult& threshold() const noexcept { return threshold_; }
  NpMethod method() const noexcept { return method_; }
  const ClassifierConfig& config() const noexcept { return config_; }
  std::size_t dim() const noexcept { return score_.dim(); }
  double cutoff() const noexcept { return threshold_.cutoff; }

  double score(const Vector& x) const;
  int predict(const Vector& x) const;
  Vector scores(const Matrix& x) const;
  std::vector<std::uint8_t> predict_rows(const Matrix& x) const;

 private:
  scoring::ScoringFunction score_;
  thresholding::ThresholdResult threshold_;
  NpMethod method_;
  ClassifierConfig config_;
};

struct ErrorPair {
  double type1 = 0.0;
  double type2 = 0.0;
};

/// Type I / type II error frequencies of `labels_hat` against `labels`.
ErrorPair error_pair(std::span<const std::uint8_t> labels,
                     std::span<const std::uint8_t> labels_hat);
ErrorPair evaluate(const NpClassifier& clf, const data::LabeledDataset& test);

/// Trains one classifier. Np* methods need the left-out class-0 part of the
/// tau split to reach min_class0_size(alpha, delta0); *Lda methods need
/// d < n0 + n1 - 2 on the training part. Both raise FeasibilityError before
/// any fitting. ClassicSlda ignores alpha, delta0 and tau.
NpClassifier train(const data::LabeledDataset& dataset, NpMethod method, double alpha,
                   double delta0, double tau, stats::RngStream& rng,
                   const TrainOptions& options = {});

/// Result of one method in `train_shared`.
struct MethodOutcome {
  NpMethod method;
  std::optional<NpClassifier> classifier;
  std::string error;  ///< set when classifier is absent
};

/// Trains several methods off one class-0 split, fitting each score family
/// (LDA, SLDA, ClassicSlda) at most once. With the same rng this gives the
/// same classifiers as calling `train` per method. Feasibility failures are
/// reported per method; other errors propagate.
std::vector<MethodOutcome> train_shared(const data::LabeledDataset& dataset,
                                        std::span<const NpMethod> methods, double alpha,
                                        double delta0, double tau, stats::RngStream& rng,
                                        const TrainOptions& options = {});

/// Throws FeasibilityError when `method` cannot be trained at (N0, n1, d, tau).
/// Covers only size conditions that do not depend on the data values.
void check_feasible(NpMethod method, std::size_t n0, std::size_t n1, std::size_t d,
                    double alpha, double delta0, double tau);

/// Split proportions searched by adaptive_tau: 0.1, 0.2, ..., 0.9.
std::vector<double> tau_grid();

struct TauPoint {
  double tau;
  std::optional<double> type2;  ///< absent when tau is infeasible
};

struct AdaptiveResult {
  double tau_min;
  std::vector<TauPoint> curve;
};

/// K-fold cross-validated type II error over tau_grid(). Class-1 folds are
/// shared by every tau; each fold draws a fresh class-0 split. Infeasible
/// tau values are skipped; ties go to the smaller tau.
AdaptiveResult adaptive_tau(const data::LabeledDataset& dataset, NpMethod method, double alpha,
                            double delta0, std::size_t folds, stats::RngStream& rng,
                            const TrainOptions& options = {});

/// Majority vote over an odd number of members trained on independent
/// class-0 splits.
class VotingClassifier {
 public:
  explicit VotingClassifier(std::vector<NpClassifier> members);

  const std::vector<NpClassifier>& members() const noexcept { return members_; }
  NpMethod method() const noexcept { return members_.front().method(); }
  std::size_t dim() const noexcept { return members_.front().dim(); }

  /// Fraction of members voting 1.
  double vote_share(const Vector& x) const;
  int predict(const Vector& x) const;
  Vector vote_shares(const Matrix& x) const;
  std::vector<std::uint8_t> predict_rows(const Matrix& x) const;

 private:
  std::vector<NpClassifier> members_;
};

ErrorPair evaluate(const VotingClassifier& clf, const data::LabeledDataset& test);

VotingClassifier train_voting(const data::LabeledDataset& dataset, NpMethod method, double alpha,
                              double delta0, double tau, std::size_t members,
                              stats::RngStream& rng, const TrainOptions& options = {});

using Model = std::variant<NpClassifier, VotingClassifier>;

/// JSON text with every double written to 17 significant digits.
std::string to_json(const NpClassifier& clf);
std::string to_json(const VotingClassifier& clf);
std::string to_json(const Model& model);
/// Throws DomainError on malformed or inconsistent documents.
Model model_from_json(std::string_view text);

std::size_t model_dim(const Model& model);
Vector model_scores(const Model& model, const Matrix& x);
std::vector<std::uint8_t> model_predict(const Model& model, const Matrix& x);

}  // namespace nplda::classifier
