#include <string>

#include "nplda/classifier/classifier.hpp"
#include "nplda/errors.hpp"

namespace nplda::classifier {

namespace {

constexpr std::uint64_t kMemberKeyBase = 0x766F7465;

}  // namespace

VotingClassifier::VotingClassifier(std::vector<NpClassifier> members)
    : members_(std::move(members)) {
  if (members_.empty() || members_.size() % 2 == 0) {
    throw DomainError("voting: need an odd number of members, got " +
                      std::to_string(members_.size()));
  }
  const auto& first = members_.front();
  for (const auto& m : members_) {
    if (m.method() != first.method() || m.dim() != first.dim() ||
        m.config().alpha != first.config().alpha || m.config().delta0 != first.config().delta0 ||
        m.config().tau != first.config().tau) {
      throw DomainError("voting: members must share method, dimension, alpha, delta0 and tau");
    }
  }
}

double VotingClassifier::vote_share(const Vector& x) const {
  std::size_t votes = 0;
  for (const auto& m : members_) votes += static_cast<std::size_t>(m.predict(x));
  return static_cast<double>(votes) / static_cast<double>(members_.size());
}

int VotingClassifier::predict(const Vector& x) const { return vote_share(x) > 0.5 ? 1 : 0; }

Vector VotingClassifier::vote_shares(const Matrix& x) const {
  Vector votes = Vector::Zero(x.rows());
  for (const auto& m : members_) {
    const auto hat = m.predict_rows(x);
    for (std::size_t i = 0; i < hat.size(); ++i) votes(static_cast<Eigen::Index>(i)) += hat[i];
  }
  return votes / static_cast<double>(members_.size());
}

std::vector<std::uint8_t> VotingClassifier::predict_rows(const Matrix& x) const {
  const Vector share = vote_shares(x);
  std::vector<std::uint8_t> out(static_cast<std::size_t>(share.size()));
  for (Eigen::Index i = 0; i < share.size(); ++i) out[static_cast<std::size_t>(i)] = share(i) > 0.5;
  return out;
}

ErrorPair evaluate(const VotingClassifier& clf, const data::LabeledDataset& test) {
  const auto hat = clf.predict_rows(test.features());
  return error_pair(test.labels(), hat);
}

VotingClassifier train_voting(const data::LabeledDataset& dataset, NpMethod method, double alpha,
                              double delta0, double tau, std::size_t members,
                              stats::RngStream& rng, const TrainOptions& options) {
  if (members == 0 || members % 2 == 0) {
    throw DomainError("train_voting: number of splits must be odd, got " +
                      std::to_string(members));
  }
  std::vector<NpClassifier> trained;
  trained.reserve(members);
  // Member 0 consumes `rng` itself, so a single-member vote equals `train`.
  trained.push_back(train(dataset, method, alpha, delta0, tau, rng, options));
  for (std::size_t m = 1; m < members; ++m) {
    auto member_rng = rng.child(kMemberKeyBase + m);
    trained.push_back(train(dataset, method, alpha, delta0, tau, member_rng, options));
  }
  return VotingClassifier(std::move(trained));
}

}  // namespace nplda::classifier
