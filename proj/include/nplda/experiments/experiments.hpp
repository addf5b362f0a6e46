#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nplda/classifier/classifier.hpp"
#include "nplda/data/model.hpp"

namespace nplda::experiments {

enum class ExampleId {
  Ex1a, Ex1b, Ex1c, Ex1d,
  Ex2a, Ex2b, Ex2c, Ex2d,
  Ex3, Ex4, Ex5,
  Ex6a, Ex6b, Ex7,
  Ex8,
};

/// Lower-case ids: "ex1a", ..., "ex8".
std::string to_string(ExampleId id);
/// Case-insensitive inverse of to_string; throws DomainError listing valid ids.
ExampleId parse_example(std::string_view id);
const std::vector<ExampleId>& all_examples();

enum class StudyKind {
  ErrorTable,  ///< violation rate and type II error per method
  SplitStudy,  ///< fixed versus adaptive split proportion
  EigenBound,  ///< lambda_max(Sigma) <= factor * lambda_max(Sigma_hat)
};

struct Setting {
  std::string label;
  data::LdaModelSpec model;
  std::size_t n0 = 0;
  std::size_t n1 = 0;
  /// Ordered (name, value) pairs describing the varying parameters.
  std::vector<std::pair<std::string, std::string>> tags;
};

/// A method column. `method` is empty for base algorithms outside the LDA
/// family, which are reported as unsupported.
struct MethodSlot {
  std::string name;
  std::optional<classifier::NpMethod> method;
};

struct ExperimentSpec {
  ExampleId id = ExampleId::Ex3;
  StudyKind kind = StudyKind::ErrorTable;
  std::vector<Setting> settings;
  std::vector<MethodSlot> methods;
  std::size_t reps = 1000;
  std::size_t test_n0 = 10000;
  std::size_t test_n1 = 10000;
  /// One test set shared by all repetitions of a setting; fresh per
  /// repetition otherwise.
  bool common_test_set = false;
  double alpha = 0.1;
  double delta0 = 0.1;
  double tau = 0.5;
  double epsilon = 1e-3;
  std::uint64_t seed = 42;
  classifier::TrainOptions train;
  std::size_t adaptive_folds = 5;
  /// Split study: numbers of voting members to run (1 = single split).
  std::vector<std::size_t> voting_members{1};
  bool keep_per_rep = false;

  /// Throws DomainError on inconsistent fields.
  void validate() const;
};

/// Default configuration of an example with the published constants.
ExperimentSpec preset(ExampleId id);

/// Per-(setting, method) summary over repetitions.
struct MethodSummary {
  std::string method;
  bool supported = true;
  bool available = true;     ///< false when infeasible at this setting (NA)
  std::string note;          ///< reason for NA or unsupported
  double violation_rate = 0.0;
  double type2_mean = 0.0;
  double type2_sd = 0.0;
  std::size_t n_reps = 0;    ///< repetitions that produced a classifier
  std::size_t failed_reps = 0;
  std::vector<classifier::ErrorPair> per_rep;
};

struct ErrorTableSetting {
  std::string setting;
  std::vector<std::pair<std::string, std::string>> tags;
  double oracle_type2 = 0.0;
  std::vector<MethodSummary> methods;
};

/// Split-study statistics for one (setting, method, number of splits).
struct SplitSummary {
  std::string method;
  std::size_t splits = 1;
  bool supported = true;
  std::string note;
  std::vector<double> tau_grid;
  /// Ave_tau: mean test type II error over repetitions, per tau (NA when
  /// tau is infeasible).
  std::vector<std::optional<double>> ave_fixed;
  /// median_j Ave_{tau_ada(j)}: adaptive proportion chosen on one dataset,
  /// then fixed.
  std::optional<double> ave_adaptive;
  /// mean_i of the test type II error at tau_ada(i): adaptive per dataset.
  std::optional<double> ave_adaptive_per_dataset;
  std::optional<double> tau_ada;
  std::optional<double> tau_opt;
  std::size_t n_reps = 0;
  /// Repetitions dropped after a numerical failure in any of their fits.
  std::size_t failed_reps = 0;
  std::vector<double> tau_ada_per_rep;
};

struct SplitStudySetting {
  std::string setting;
  std::vector<std::pair<std::string, std::string>> tags;
  std::vector<SplitSummary> summaries;
};

struct EigenBoundSetting {
  std::string setting;
  std::vector<std::pair<std::string, std::string>> tags;
  std::optional<double> probability;  ///< NA when the factor is unavailable
  std::optional<double> factor;
  double lambda_max_population = 0.0;
  std::size_t n_reps = 0;
};

struct ExperimentReport {
  ExperimentSpec spec;
  std::vector<ErrorTableSetting> error_table;
  std::vector<SplitStudySetting> split_study;
  std::vector<EigenBoundSetting> eigen_bound;
  double runtime_seconds = 0.0;
};

/// Runs any study kind. Deterministic given spec.seed for every thread count.
ExperimentReport run(const ExperimentSpec& spec, std::size_t threads = 1);

ExperimentReport run_experiment(const ExperimentSpec& spec, std::size_t threads = 1);
ExperimentReport run_split_study(const ExperimentSpec& spec, std::size_t threads = 1);
ExperimentReport run_eigenbound_study(const ExperimentSpec& spec, std::size_t threads = 1);

/// Error table: setting,method,violation_rate,type2_mean,type2_sd,n_reps.
/// Split study: setting,method,splits,statistic,value.
/// Eigen bound: d,covariance,rho followed by one column per N0.
std::string to_csv(const ExperimentReport& report);
/// Full nested report. `include_runtime` false gives byte-identical output
/// for identical specs.
std::string to_json(const ExperimentReport& report, bool include_runtime = true);

/// Runs body(i) for i in [0, n) on up to `threads` workers. The first
/// exception thrown by any body is rethrown after all workers finish.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& body);

/// Number of hardware threads, at least 1.
std::size_t default_threads();

}  // namespace nplda::experiments
