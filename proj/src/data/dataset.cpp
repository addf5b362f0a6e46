#include "nplda/data/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nplda/errors.hpp"

namespace nplda::data {

LabeledDataset::LabeledDataset(Matrix features, std::vector<std::uint8_t> labels)
    : features_(std::move(features)), labels_(std::move(labels)) {
  if (static_cast<std::size_t>(features_.rows()) != labels_.size()) {
    throw DomainError("LabeledDataset: " + std::to_string(features_.rows()) +
                      " feature rows but " + std::to_string(labels_.size()) + " labels");
  }
  for (auto y : labels_) {
    if (y > 1) throw DomainError("LabeledDataset: labels must be 0 or 1");
  }
  if (!features_.allFinite()) {
    throw DomainError("LabeledDataset: features contain non-finite values");
  }
}

std::size_t LabeledDataset::count(int label) const {
  return static_cast<std::size_t>(
      std::count(labels_.begin(), labels_.end(), static_cast<std::uint8_t>(label)));
}

std::vector<std::size_t> LabeledDataset::class_indices(int label) const {
  std::vector<std::size_t> out;
  out.reserve(count(label));
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] == label) out.push_back(i);
  }
  return out;
}

Matrix LabeledDataset::rows(std::span<const std::size_t> indices) const {
  Matrix out(static_cast<Eigen::Index>(indices.size()), features_.cols());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    out.row(static_cast<Eigen::Index>(r)) =
        features_.row(static_cast<Eigen::Index>(indices[r]));
  }
  return out;
}

Matrix LabeledDataset::class_rows(int label) const {
  const auto idx = class_indices(label);
  return rows(idx);
}

LabeledDataset LabeledDataset::concat(const LabeledDataset& a, const LabeledDataset& b) {
  if (a.size() == 0) return b;
  if (b.size() == 0) return a;
  if (a.dim() != b.dim()) throw DomainError("LabeledDataset::concat: dimension mismatch");
  Matrix f(a.features_.rows() + b.features_.rows(), a.features_.cols());
  f << a.features_, b.features_;
  std::vector<std::uint8_t> y = a.labels_;
  y.insert(y.end(), b.labels_.begin(), b.labels_.end());
  return LabeledDataset(std::move(f), std::move(y));
}

std::size_t split_train_size(std::size_t n0, double tau) {
  // The 1e-9 guard keeps decimal halves such as 0.35 * 10 on the upper side.
  return static_cast<std::size_t>(std::floor(tau * static_cast<double>(n0) + 0.5 + 1e-9));
}

Class0Split split_class0(const LabeledDataset& dataset, double tau, stats::RngStream& rng) {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw DomainError("split_class0: tau must lie in (0, 1), got " + std::to_string(tau));
  }
  std::vector<std::size_t> idx = dataset.class_indices(0);
  const std::size_t n0 = idx.size();
  const std::size_t n_train = split_train_size(n0, tau);
  if (n_train == 0 || n_train >= n0) {
    throw DomainError("split_class0: tau=" + std::to_string(tau) + " with N0=" +
                      std::to_string(n0) + " leaves one side of the split empty");
  }
  rng.shuffle(std::span<std::size_t>(idx));
  Class0Split split;
  split.tau = tau;
  split.train_indices.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.threshold_indices.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
  std::sort(split.train_indices.begin(), split.train_indices.end());
  std::sort(split.threshold_indices.begin(), split.threshold_indices.end());
  return split;
}

}  // namespace nplda::data
