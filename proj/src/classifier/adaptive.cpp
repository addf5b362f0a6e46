#include <limits>
#include <numeric>
#include <string>

#include "nplda/classifier/classifier.hpp"
#include "nplda/errors.hpp"

namespace nplda::classifier {

namespace {

constexpr std::uint64_t kFoldKey = 0xF01D;
constexpr std::uint64_t kTrainKeyBase = 0x10000;

}  // namespace

std::vector<double> tau_grid() {
  std::vector<double> grid;
  for (int i = 1; i <= 9; ++i) grid.push_back(static_cast<double>(i) / 10.0);
  return grid;
}

AdaptiveResult adaptive_tau(const data::LabeledDataset& dataset, NpMethod method, double alpha,
                            double delta0, std::size_t folds, stats::RngStream& rng,
                            const TrainOptions& options) {
  if (method == NpMethod::ClassicSlda) {
    throw DomainError("adaptive_tau: slda does not use a split proportion");
  }
  thresholding::UmbrellaConfig{alpha, delta0}.validate();
  const auto idx0 = dataset.class_indices(0);
  auto idx1 = dataset.class_indices(1);
  if (folds < 2) throw DomainError("adaptive_tau: need at least 2 folds");
  if (idx1.size() < folds) {
    throw DomainError("adaptive_tau: class 1 has " + std::to_string(idx1.size()) +
                      " rows, fewer than the " + std::to_string(folds) + " folds");
  }
  if (idx0.empty()) throw DomainError("adaptive_tau: class 0 is empty");

  auto fold_rng = rng.child(kFoldKey);
  fold_rng.shuffle(std::span<std::size_t>(idx1));
  std::vector<data::LabeledDataset> train_sets;
  std::vector<Matrix> validation;
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<std::size_t> keep(idx0.begin(), idx0.end());
    std::vector<std::size_t> held;
    for (std::size_t i = 0; i < idx1.size(); ++i) {
      (i % folds == f ? held : keep).push_back(idx1[i]);
    }
    std::vector<std::uint8_t> labels(keep.size(), 0);
    std::fill(labels.begin() + static_cast<std::ptrdiff_t>(idx0.size()), labels.end(),
              std::uint8_t{1});
    train_sets.emplace_back(dataset.rows(keep), std::move(labels));
    validation.push_back(dataset.rows(held));
  }

  AdaptiveResult result;
  result.tau_min = std::numeric_limits<double>::quiet_NaN();
  double best = std::numeric_limits<double>::infinity();
  const auto grid = tau_grid();
  for (std::size_t t = 0; t < grid.size(); ++t) {
    const double tau = grid[t];
    TauPoint point{tau, std::nullopt};
    try {
      double sum = 0.0;
      for (std::size_t f = 0; f < folds; ++f) {
        auto train_rng = rng.child(kTrainKeyBase + t * folds + f);
        const auto clf = train(train_sets[f], method, alpha, delta0, tau, train_rng, options);
        const Vector s = clf.scores(validation[f]);
        const auto missed = static_cast<double>((s.array() <= clf.cutoff()).count());
        sum += missed / static_cast<double>(s.size());
      }
      point.type2 = sum / static_cast<double>(folds);
    } catch (const FeasibilityError&) {
      point.type2.reset();
    }
    if (point.type2 && *point.type2 < best) {
      best = *point.type2;
      result.tau_min = tau;
    }
    result.curve.push_back(point);
  }
  if (!(best < std::numeric_limits<double>::infinity())) {
    throw FeasibilityError("adaptive_tau: no split proportion in {0.1, ..., 0.9} is feasible for " +
                           to_string(method) + " at alpha=" + std::to_string(alpha) +
                           ", delta0=" + std::to_string(delta0) + " with N0=" +
                           std::to_string(idx0.size()));
  }
  return result;
}

}  // namespace nplda::classifier
