#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "nplda/errors.hpp"
#include "nplda/experiments/experiments.hpp"
#include "nplda/stats/special.hpp"

namespace nplda::experiments {

namespace {

using classifier::NpMethod;

const std::vector<std::pair<ExampleId, std::string>>& id_names() {
  static const std::vector<std::pair<ExampleId, std::string>> names{
      {ExampleId::Ex1a, "ex1a"}, {ExampleId::Ex1b, "ex1b"}, {ExampleId::Ex1c, "ex1c"},
      {ExampleId::Ex1d, "ex1d"}, {ExampleId::Ex2a, "ex2a"}, {ExampleId::Ex2b, "ex2b"},
      {ExampleId::Ex2c, "ex2c"}, {ExampleId::Ex2d, "ex2d"}, {ExampleId::Ex3, "ex3"},
      {ExampleId::Ex4, "ex4"},   {ExampleId::Ex5, "ex5"},   {ExampleId::Ex6a, "ex6a"},
      {ExampleId::Ex6b, "ex6b"}, {ExampleId::Ex7, "ex7"},   {ExampleId::Ex8, "ex8"},
  };
  return names;
}

std::string fmt(double v) {
  std::string s = std::to_string(v);
  s.erase(s.find_last_not_of('0') + 1);
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

data::LdaModelSpec model_from_beta(const data::CovarianceKind& cov, const Vector& beta) {
  const auto d = static_cast<std::size_t>(beta.size());
  const auto sigma = data::materialize_covariance(cov, d);
  data::LdaModelSpec spec;
  spec.mu0 = Vector::Zero(beta.size());
  spec.mu1 = data::mu_from_beta(beta, sigma, spec.mu0);
  spec.covariance = cov;
  spec.pi0 = 0.5;
  return spec;
}

Vector padded(std::initializer_list<double> head, std::size_t d, double scale) {
  Vector v = Vector::Zero(static_cast<Eigen::Index>(d));
  Eigen::Index i = 0;
  for (double h : head) v(i++) = scale * h;
  return v;
}

// ex1: AR(1) rho = .5, beta = 1.2 (1_3, 0_{d-3}).
Vector ex1_beta(std::size_t d) { return padded({1.0, 1.0, 1.0}, d, 1.2); }

// ex2: beta = C_d 1_d with C_d fixing the NP oracle type II error at
// 0.112 for alpha = 0.1.
Vector ex2_beta(std::size_t d) {
  const data::CovarianceKind cov = data::Ar1{0.5};
  const Vector ones = Vector::Ones(static_cast<Eigen::Index>(d));
  const double c = data::scale_for_oracle_type2(ones, data::materialize_covariance(cov, d), 0.1,
                                                0.112);
  return c * ones;
}

Vector ex3_beta(std::size_t d) { return padded({3.0, 1.5, 0.0, 0.0, 2.0}, d, 0.556); }
Vector ex4_beta(std::size_t d) { return padded({3.0, 1.7, -2.2, -2.1, 2.55}, d, 0.551); }
Vector ex5_beta(std::size_t d) { return padded({3.0, 1.7, -2.2, -2.1, 2.55}, d, 0.362); }

Setting make_setting(std::string label, const data::CovarianceKind& cov, const Vector& beta,
                     std::size_t n0, std::size_t n1,
                     std::vector<std::pair<std::string, std::string>> tags) {
  Setting s;
  s.label = std::move(label);
  s.model = model_from_beta(cov, beta);
  s.n0 = n0;
  s.n1 = n1;
  s.tags = std::move(tags);
  return s;
}

std::vector<MethodSlot> low_dim_methods() {
  return {{"NP-LDA", NpMethod::NpLda},
          {"NP-sLDA", NpMethod::NpSlda},
          {"pNP-LDA", NpMethod::PnpLda},
          {"pNP-sLDA", NpMethod::PnpSlda}};
}

std::vector<MethodSlot> high_dim_methods() {
  return {{"NP-sLDA", NpMethod::NpSlda},
          {"NP-penlog", std::nullopt},
          {"NP-svm", std::nullopt},
          {"pNP-sLDA", NpMethod::PnpSlda},
          {"sLDA", NpMethod::ClassicSlda}};
}

// Variants: 'a' N0 = n1 varying (d = 3), 'b' n1 = 500 and N0 varying (d = 3),
// 'c' d varying at N0 = n1 = 125, 'd' d varying at N0 = 125, n1 = 500,
// 'e' N0 = n1 varying at d = 6.
void low_dim(ExperimentSpec& spec, Vector (*beta)(std::size_t), char variant) {
  const data::CovarianceKind cov = data::Ar1{0.5};
  spec.kind = StudyKind::ErrorTable;
  spec.methods = low_dim_methods();
  const std::size_t n0_grid[] = {20, 70, 120, 170, 220, 270, 320, 370};
  const std::size_t d_grid[] = {3, 6, 9, 12, 15, 18, 21, 24, 26, 30};
  switch (variant) {
    case 'a':
    case 'e': {
      const std::size_t d = variant == 'a' ? 3 : 6;
      for (auto n : n0_grid) {
        spec.settings.push_back(make_setting("N0=n1=" + std::to_string(n), cov, beta(d), n, n,
                                             {{"d", std::to_string(d)}, {"N0", std::to_string(n)},
                                              {"n1", std::to_string(n)}}));
      }
      break;
    }
    case 'b':
      for (auto n : n0_grid) {
        spec.settings.push_back(make_setting("N0=" + std::to_string(n), cov, beta(3), n, 500,
                                             {{"d", "3"}, {"N0", std::to_string(n)}, {"n1", "500"}}));
      }
      break;
    case 'c':
      for (auto d : d_grid) {
        spec.settings.push_back(make_setting("d=" + std::to_string(d), cov, beta(d), 125, 125,
                                             {{"d", std::to_string(d)}, {"N0", "125"}, {"n1", "125"}}));
      }
      break;
    default:
      for (auto d : d_grid) {
        spec.settings.push_back(make_setting("d=" + std::to_string(d), cov, beta(d), 125, 500,
                                             {{"d", std::to_string(d)}, {"N0", "125"}, {"n1", "500"}}));
      }
  }
}

void high_dim(ExperimentSpec& spec, const data::CovarianceKind& cov, Vector beta, std::size_t n) {
  spec.kind = StudyKind::ErrorTable;
  spec.methods = high_dim_methods();
  const auto d = static_cast<std::size_t>(beta.size());
  spec.settings.push_back(make_setting("d=" + std::to_string(d) + ",N0=n1=" + std::to_string(n),
                                       cov, beta, n, n,
                                       {{"d", std::to_string(d)}, {"N0", std::to_string(n)},
                                        {"n1", std::to_string(n)}}));
}

void split_study(ExperimentSpec& spec, std::size_t d, const std::vector<std::size_t>& n0s,
                 const std::vector<std::size_t>& n1s) {
  spec.kind = StudyKind::SplitStudy;
  spec.common_test_set = true;
  spec.test_n0 = 0;
  spec.test_n1 = 100000;
  const data::CovarianceKind cov = data::Ar1{0.5};
  const Vector beta = ex3_beta(d);
  for (std::size_t i = 0; i < n0s.size(); ++i) {
    const std::size_t n0 = n0s[i], n1 = n1s[i];
    std::string label = "N0=" + std::to_string(n0) + ",n1=" + std::to_string(n1);
    spec.settings.push_back(make_setting(label, cov, beta, n0, n1,
                                         {{"d", std::to_string(d)}, {"N0", std::to_string(n0)},
                                          {"n1", std::to_string(n1)},
                                          {"n1/N0", fmt(static_cast<double>(n1) /
                                                        static_cast<double>(n0))}}));
  }
}

}  // namespace

std::string to_string(ExampleId id) {
  for (const auto& [k, name] : id_names()) {
    if (k == id) return name;
  }
  throw DomainError("unknown example id");
}

ExampleId parse_example(std::string_view id) {
  std::string lower(id);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  std::string valid;
  for (const auto& [k, name] : id_names()) {
    if (name == lower) return k;
    valid += (valid.empty() ? "" : ", ") + name;
  }
  throw DomainError("unknown example '" + std::string(id) + "'; valid: " + valid);
}

const std::vector<ExampleId>& all_examples() {
  static const std::vector<ExampleId> ids = [] {
    std::vector<ExampleId> out;
    for (const auto& [k, name] : id_names()) out.push_back(k);
    return out;
  }();
  return ids;
}

void ExperimentSpec::validate() const {
  if (reps < 1) throw DomainError("experiment: reps must be >= 1");
  if (settings.empty()) throw DomainError("experiment: no settings");
  if (kind != StudyKind::EigenBound) {
    thresholding::UmbrellaConfig{alpha, delta0}.validate();
    if (!(tau > 0.0 && tau < 1.0)) throw DomainError("experiment: tau must lie in (0, 1)");
    if (methods.empty()) throw DomainError("experiment: no methods");
    if (test_n1 == 0) throw DomainError("experiment: class-1 test size must be positive");
  }
  if (kind == StudyKind::ErrorTable && test_n0 == 0) {
    throw DomainError("experiment: class-0 test size must be positive");
  }
  if (kind == StudyKind::SplitStudy) {
    if (adaptive_folds < 2) throw DomainError("experiment: adaptive folds must be >= 2");
    if (voting_members.empty()) throw DomainError("experiment: no voting sizes");
    for (std::size_t i = 0; i < voting_members.size(); ++i) {
      const auto m = voting_members[i];
      if (m == 0 || m % 2 == 0) throw DomainError("experiment: voting members must be odd");
      if (i > 0 && m <= voting_members[i - 1]) {
        throw DomainError("experiment: voting sizes must be increasing");
      }
    }
    for (const auto& slot : methods) {
      if (slot.method && !classifier::uses_umbrella(*slot.method)) {
        throw DomainError("experiment: split studies use umbrella methods only");
      }
    }
  }
  if (!(epsilon > 0.0)) throw DomainError("experiment: epsilon must be positive");
  for (const auto& s : settings) {
    s.model.validate();
    if (s.n0 == 0 || s.n1 == 0) throw DomainError("experiment: empty class in " + s.label);
  }
}

ExperimentSpec preset(ExampleId id) {
  ExperimentSpec spec;
  spec.id = id;
  switch (id) {
    case ExampleId::Ex1a: low_dim(spec, ex1_beta, 'a'); break;
    case ExampleId::Ex1b: low_dim(spec, ex1_beta, 'b'); break;
    case ExampleId::Ex1c: low_dim(spec, ex1_beta, 'c'); break;
    case ExampleId::Ex1d: low_dim(spec, ex1_beta, 'd'); break;
    case ExampleId::Ex2a: low_dim(spec, ex2_beta, 'a'); break;
    case ExampleId::Ex2b: low_dim(spec, ex2_beta, 'e'); break;
    case ExampleId::Ex2c: low_dim(spec, ex2_beta, 'c'); break;
    case ExampleId::Ex2d: low_dim(spec, ex2_beta, 'd'); break;
    case ExampleId::Ex3:
      high_dim(spec, data::Ar1{0.5}, ex3_beta(1000), 200);
      break;
    case ExampleId::Ex4:
      high_dim(spec, data::CompoundSymmetry{0.5}, ex4_beta(2000), 300);
      break;
    case ExampleId::Ex5:
      high_dim(spec, data::CompoundSymmetry{0.5}, ex5_beta(3000), 400);
      spec.alpha = 0.2;
      break;
    case ExampleId::Ex6a: {
      std::vector<std::size_t> n0s, n1s;
      for (std::size_t r : {1, 2, 4, 8, 16, 32, 64, 128, 256}) {
        n0s.push_back(100);
        n1s.push_back(100 * r);
      }
      split_study(spec, 1000, n0s, n1s);
      spec.methods = {{"NP-sLDA", NpMethod::NpSlda}, {"NP-penlog", std::nullopt}};
      break;
    }
    case ExampleId::Ex6b: {
      std::vector<std::size_t> ns;
      for (std::size_t n = 100; n <= 500; n += 50) ns.push_back(n);
      split_study(spec, 1000, ns, ns);
      spec.methods = {{"NP-sLDA", NpMethod::NpSlda}, {"NP-penlog", std::nullopt}};
      break;
    }
    case ExampleId::Ex7: {
      std::vector<std::size_t> n0s, n1s;
      for (std::size_t r : {1, 2, 4, 8, 16}) {
        n0s.push_back(100);
        n1s.push_back(100 * r);
      }
      split_study(spec, 20, n0s, n1s);
      spec.methods = {{"NP-sLDA", NpMethod::NpSlda},
                      {"NP-penlog", std::nullopt},
                      {"NP-svm", std::nullopt},
                      {"NP-randomforest", std::nullopt}};
      spec.voting_members = {1, 11};
      break;
    }
    case ExampleId::Ex8: {
      spec.kind = StudyKind::EigenBound;
      spec.test_n0 = 0;
      spec.test_n1 = 0;
      for (std::size_t d : {3, 10}) {
        const double shift = d == 3 ? 1.16 : 0.75;
        for (int cs = 0; cs < 2; ++cs) {
          for (double rho : {0.5, 0.9}) {
            const data::CovarianceKind cov =
                cs ? data::CovarianceKind{data::CompoundSymmetry{rho}}
                   : data::CovarianceKind{data::Ar1{rho}};
            for (std::size_t n = 20; n <= 200; n += 20) {
              Setting s;
              s.model.mu0 = Vector::Zero(static_cast<Eigen::Index>(d));
              s.model.mu1 = Vector::Constant(static_cast<Eigen::Index>(d), shift);
              s.model.covariance = cov;
              s.n0 = n;
              s.n1 = n;
              const std::string cov_name = cs ? "CS" : "AR1";
              s.label = "d=" + std::to_string(d) + "," + cov_name + ",rho=" + fmt(rho) +
                        ",N0=" + std::to_string(n);
              s.tags = {{"d", std::to_string(d)},
                        {"covariance", cov_name},
                        {"rho", fmt(rho)},
                        {"N0", std::to_string(n)}};
              spec.settings.push_back(std::move(s));
            }
          }
        }
      }
      break;
    }
  }
  return spec;
}

}  // namespace nplda::experiments
