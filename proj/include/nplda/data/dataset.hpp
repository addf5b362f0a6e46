#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "nplda/stats/linalg.hpp"
#include "nplda/stats/rng.hpp"

namespace nplda::data {

/// Feature matrix (one observation per row) plus 0/1 labels.
class LabeledDataset {
 public:
  LabeledDataset() = default;
  /// Throws DomainError on a size mismatch, a label outside {0, 1} or a
  /// non-finite feature.
  LabeledDataset(Matrix features, std::vector<std::uint8_t> labels);

  const Matrix& features() const noexcept { return features_; }
  const std::vector<std::uint8_t>& labels() const noexcept { return labels_; }

  std::size_t size() const noexcept { return labels_.size(); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(features_.cols()); }
  std::size_t count(int label) const;

  /// Row indices of the given class, ascending.
  std::vector<std::size_t> class_indices(int label) const;

  /// Features of the listed rows, in the listed order.
  Matrix rows(std::span<const std::size_t> indices) const;
  Matrix class_rows(int label) const;

  /// Stacks two datasets with equal dimension.
  static LabeledDataset concat(const LabeledDataset& a, const LabeledDataset& b);

 private:
  Matrix features_;
  std::vector<std::uint8_t> labels_;
};

/// Partition of the class-0 rows: `train_indices` fit the score,
/// `threshold_indices` are held out for the threshold.
struct Class0Split {
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> threshold_indices;
  double tau = 0.5;
};

/// round(tau * n0), half-up.
std::size_t split_train_size(std::size_t n0, double tau);

/// Uniformly random split with |train| = round(tau * N0) (half-up).
/// Throws DomainError unless 0 < tau < 1 and both sides are non-empty.
Class0Split split_class0(const LabeledDataset& dataset, double tau, stats::RngStream& rng);

}  // namespace nplda::data
