#include <catch_amalgamated.hpp>

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "nplda/errors.hpp"
#include "nplda/experiments/experiments.hpp"
#include "nplda/stats/linalg.hpp"

using namespace nplda;
using namespace nplda::experiments;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

nlohmann::json golden() {
  std::ifstream in(std::string(NPLDA_TEST_DATA) + "/presets_golden.json");
  REQUIRE(in);
  return nlohmann::json::parse(in);
}

std::string covariance_name(const data::CovarianceKind& k) {
  if (std::holds_alternative<data::Ar1>(k)) return "AR1";
  if (std::holds_alternative<data::CompoundSymmetry>(k)) return "CS";
  return "explicit";
}

double covariance_rho(const data::CovarianceKind& k) {
  if (const auto* a = std::get_if<data::Ar1>(&k)) return a->rho;
  if (const auto* c = std::get_if<data::CompoundSymmetry>(&k)) return c->rho;
  return 0.0;
}

std::string kind_name(StudyKind k) {
  switch (k) {
    case StudyKind::ErrorTable:
      return "error_table";
    case StudyKind::SplitStudy:
      return "split_study";
    default:
      return "eigen_bound";
  }
}

ExperimentSpec small_low_dim(std::size_t reps) {
  auto spec = preset(ExampleId::Ex1a);
  spec.settings = {spec.settings[0], spec.settings[2]};
  spec.reps = reps;
  spec.test_n0 = 2000;
  spec.test_n1 = 2000;
  return spec;
}

}  // namespace

TEST_CASE("example ids", "[experiments]") {
  CHECK(all_examples().size() == 15);
  for (auto id : all_examples()) CHECK(parse_example(to_string(id)) == id);
  CHECK(parse_example("EX3") == ExampleId::Ex3);
  try {
    (void)parse_example("ex9");
    FAIL("expected DomainError");
  } catch (const DomainError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("ex1a") != std::string::npos);
    CHECK(msg.find("ex8") != std::string::npos);
  }
}

TEST_CASE("preset parameters match the golden file", "[experiments][presets]") {
  const auto g = golden();
  REQUIRE(g.size() == all_examples().size());
  for (auto id : all_examples()) {
    const auto name = to_string(id);
    INFO("preset " << name);
    const auto& e = g.at(name);
    const auto spec = preset(id);
    CHECK_NOTHROW(spec.validate());
    CHECK(kind_name(spec.kind) == e.at("kind").get<std::string>());
    REQUIRE(spec.settings.size() == e.at("settings").size());

    if (spec.kind == StudyKind::EigenBound) {
      CHECK(spec.epsilon == e.at("epsilon").get<double>());
      for (std::size_t i = 0; i < spec.settings.size(); ++i) {
        const auto& s = spec.settings[i];
        const auto& ge = e.at("settings")[i];
        CHECK(s.model.dim() == ge.at("d").get<std::size_t>());
        CHECK(covariance_name(s.model.covariance) == ge.at("covariance").get<std::string>());
        CHECK(covariance_rho(s.model.covariance) == ge.at("rho").get<double>());
        CHECK(s.n0 == ge.at("n0").get<std::size_t>());
        CHECK(s.n1 == ge.at("n1").get<std::size_t>());
        CHECK(s.model.mu0.isZero(0.0));
        CHECK(s.model.mu1 == Vector::Constant(s.model.mu1.size(), ge.at("mu1").get<double>()));
      }
      continue;
    }

    CHECK(spec.alpha == e.at("alpha").get<double>());
    CHECK(spec.delta0 == e.at("delta0").get<double>());
    CHECK(spec.test_n0 == e.at("test")[0].get<std::size_t>());
    CHECK(spec.test_n1 == e.at("test")[1].get<std::size_t>());
    CHECK(spec.common_test_set == e.at("common_test_set").get<bool>());
    if (e.contains("tau")) CHECK(spec.tau == e.at("tau").get<double>());
    if (e.contains("voting_members")) {
      CHECK(spec.voting_members == e.at("voting_members").get<std::vector<std::size_t>>());
      CHECK(spec.adaptive_folds == e.at("adaptive_folds").get<std::size_t>());
    }
    std::vector<std::string> methods;
    for (const auto& m : spec.methods) methods.push_back(m.name);
    CHECK(methods == e.at("methods").get<std::vector<std::string>>());

    for (std::size_t i = 0; i < spec.settings.size(); ++i) {
      const auto& s = spec.settings[i];
      const auto& ge = e.at("settings")[i];
      CHECK(s.n0 == ge[0].get<std::size_t>());
      CHECK(s.n1 == ge[1].get<std::size_t>());
      const std::size_t d = ge[2].get<std::size_t>();
      REQUIRE(s.model.dim() == d);
      CHECK(covariance_name(s.model.covariance) == e.at("covariance").get<std::string>());
      CHECK(covariance_rho(s.model.covariance) == e.at("rho").get<double>());
      CHECK(s.model.mu0.isZero(0.0));
      CHECK(s.model.pi0 == 0.5);

      const auto sigma = data::materialize_covariance(s.model);
      const Vector beta = stats::spd_solve(sigma, s.model.mu1 - s.model.mu0);
      const auto& gb = e.at("beta");
      if (gb.contains("oracle_type2")) {
        CHECK((beta.array() - beta(0)).abs().maxCoeff() < 1e-9 * std::abs(beta(0)));
        CHECK_THAT(data::oracle_errors(s.model, spec.alpha).type2,
                   WithinAbs(gb.at("oracle_type2").get<double>(), 1e-12));
      } else {
        Vector expected = Vector::Zero(static_cast<Eigen::Index>(d));
        const auto head = gb.at("head").get<std::vector<double>>();
        for (std::size_t j = 0; j < head.size(); ++j) {
          expected(static_cast<Eigen::Index>(j)) = gb.at("scale").get<double>() * head[j];
        }
        CHECK((beta - expected).cwiseAbs().maxCoeff() < 1e-9);
      }
    }
  }
}

TEST_CASE("reports are deterministic and independent of thread count", "[experiments][property]") {
  const auto spec = small_low_dim(4);
  const auto a = run(spec, 1);
  const auto b = run(spec, 2);
  const auto c = run(spec, 1);
  CHECK(to_json(a, false) == to_json(b, false));
  CHECK(to_json(a, false) == to_json(c, false));
  CHECK(to_csv(a) == to_csv(b));
  CHECK(nlohmann::json::parse(to_json(a)).contains("runtime_seconds"));
  CHECK(!nlohmann::json::parse(to_json(a, false)).contains("runtime_seconds"));

  auto eig = preset(ExampleId::Ex8);
  eig.settings.resize(3);
  eig.reps = 20;
  CHECK(to_json(run(eig, 1), false) == to_json(run(eig, 2), false));

  auto other = spec;
  other.seed = 43;
  CHECK(to_json(run(other, 1), false) != to_json(a, false));
}

TEST_CASE("a single repetition echoes its error pair", "[experiments]") {
  auto spec = small_low_dim(1);
  spec.keep_per_rep = true;
  const auto report = run(spec, 1);
  for (const auto& s : report.error_table) {
    for (const auto& m : s.methods) {
      if (!m.available) continue;
      REQUIRE(m.per_rep.size() == 1);
      CHECK(m.n_reps == 1);
      CHECK(m.type2_mean == m.per_rep[0].type2);
      CHECK(m.type2_sd == 0.0);
      CHECK(m.violation_rate == (m.per_rep[0].type1 > spec.alpha ? 1.0 : 0.0));
    }
  }
}

TEST_CASE("violation rate counts repetitions with type I error above alpha", "[experiments][property]") {
  auto spec = small_low_dim(12);
  spec.keep_per_rep = true;
  const auto report = run(spec, 1);
  for (const auto& s : report.error_table) {
    for (const auto& m : s.methods) {
      if (!m.available) continue;
      double exceed = 0.0, type2 = 0.0;
      for (const auto& e : m.per_rep) {
        exceed += e.type1 > spec.alpha;
        type2 += e.type2;
      }
      CHECK(m.violation_rate == exceed / static_cast<double>(m.per_rep.size()));
      CHECK_THAT(m.type2_mean, WithinRel(type2 / static_cast<double>(m.per_rep.size()), 1e-12));
    }
  }
}

TEST_CASE("umbrella methods are NA below the minimum class-0 size", "[experiments]") {
  auto spec = small_low_dim(2);
  const auto report = run(spec, 1);
  const auto& first = report.error_table.front();
  CHECK(first.setting == "N0=n1=20");
  for (const auto& m : first.methods) {
    const bool umbrella = m.method == "NP-LDA" || m.method == "NP-sLDA";
    CHECK(m.available == !umbrella);
    if (umbrella) CHECK(m.note.find("22") != std::string::npos);
  }
  const auto csv = to_csv(report);
  CHECK(csv.find("N0=n1=20,NP-LDA,NA,NA,NA,0") != std::string::npos);
  CHECK(csv.find("N0=n1=20,pNP-LDA,NA") == std::string::npos);
}

TEST_CASE("unsupported base algorithms keep the table shape", "[experiments]") {
  auto spec = preset(ExampleId::Ex3);
  spec.reps = 1;
  spec.test_n0 = spec.test_n1 = 500;
  const auto report = run(spec, 1);
  const auto csv = to_csv(report);
  std::istringstream lines(csv);
  std::string line;
  std::size_t rows = 0;
  std::getline(lines, line);
  CHECK(line == "setting,method,violation_rate,type2_mean,type2_sd,n_reps");
  while (std::getline(lines, line)) ++rows;
  CHECK(rows == 5);
  CHECK(csv.find("NP-penlog,NA,NA,NA,0") != std::string::npos);
}

TEST_CASE("split study statistics", "[experiments][split]") {
  ExperimentSpec spec = preset(ExampleId::Ex7);
  spec.settings.resize(1);
  spec.reps = 3;
  spec.test_n1 = 5000;
  spec.voting_members = {1};
  spec.methods = {{"NP-sLDA", classifier::NpMethod::NpSlda}};
  const auto report = run(spec, 1);
  REQUIRE(report.split_study.size() == 1);
  const auto& s = report.split_study[0].summaries.at(0);
  CHECK(s.tau_grid.size() == 9);
  CHECK(s.n_reps == 3);
  CHECK(s.tau_ada_per_rep.size() == 3);
  REQUIRE(s.tau_ada);
  REQUIRE(s.ave_adaptive);
  double mean_tau = 0.0;
  for (double t : s.tau_ada_per_rep) mean_tau += t / 3.0;
  CHECK_THAT(*s.tau_ada, WithinAbs(mean_tau, 1e-15));
  // Ave at tau_ada(j) is one of the fixed-tau averages; the median of three is one of them.
  bool matches = false;
  for (double t : s.tau_ada_per_rep) {
    const auto idx = static_cast<std::size_t>(std::lround(t * 10.0)) - 1;
    matches = matches || (s.ave_fixed[idx] && *s.ave_fixed[idx] == *s.ave_adaptive);
  }
  CHECK(matches);
  // 0.9 leaves n0' = 10 < 22.
  CHECK(!s.ave_fixed[8]);
  CHECK(s.ave_fixed[4]);

  const auto csv = to_csv(report);
  CHECK(csv.rfind("setting,method,splits,statistic,value\n", 0) == 0);
  CHECK(csv.find("ave_tau_0.9,NA") != std::string::npos);
}

TEST_CASE("split study with one repetition and one feasible proportion", "[experiments][split]") {
  ExperimentSpec spec = preset(ExampleId::Ex7);
  spec.reps = 1;
  spec.test_n1 = 2000;
  spec.voting_members = {1};
  spec.methods = {{"NP-LDA", classifier::NpMethod::NpLda}};
  // N0 = 25: only tau = 0.1 leaves n0' >= 22.
  spec.settings.resize(1);
  spec.settings[0].n0 = 25;
  spec.settings[0].n1 = 60;
  const auto report = run(spec, 1);
  const auto& s = report.split_study[0].summaries.at(0);
  REQUIRE(s.tau_opt);
  CHECK(*s.tau_opt == 0.1);
  CHECK(*s.tau_ada == 0.1);
  REQUIRE(s.ave_fixed[0]);
  CHECK(*s.ave_adaptive == *s.ave_fixed[0]);
  CHECK(*s.ave_adaptive_per_dataset == *s.ave_fixed[0]);
  for (std::size_t t = 1; t < 9; ++t) CHECK(!s.ave_fixed[t]);
}

TEST_CASE("eigen-bound study", "[experiments][eigen]") {
  auto spec = preset(ExampleId::Ex8);
  spec.reps = 50;
  const auto report = run(spec, 1);
  REQUIRE(report.eigen_bound.size() == 80);
  for (const auto& s : report.eigen_bound) {
    if (s.probability) CHECK(*s.probability >= 0.9);
  }
  const auto csv = to_csv(report);
  std::istringstream lines(csv);
  std::string header, line;
  std::getline(lines, header);
  CHECK(header == "d,covariance,rho,20,40,60,80,100,120,140,160,180,200");
  std::size_t rows = 0;
  while (std::getline(lines, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 12);
  }
  CHECK(rows == 8);

  // Large samples: the bound holds with probability one.
  auto big = preset(ExampleId::Ex8);
  big.settings.resize(1);
  big.settings[0].n0 = big.settings[0].n1 = 5000;
  big.reps = 20;
  const auto r = run(big, 1);
  REQUIRE(r.eigen_bound[0].probability);
  CHECK(*r.eigen_bound[0].probability == 1.0);
}

TEST_CASE("spec validation", "[experiments]") {
  auto spec = small_low_dim(0);
  CHECK_THROWS_AS(run(spec, 1), DomainError);
  spec.reps = 1;
  spec.alpha = 1.5;
  CHECK_THROWS_AS(run(spec, 1), DomainError);
  auto split = preset(ExampleId::Ex7);
  split.voting_members = {2};
  CHECK_THROWS_AS(split.validate(), DomainError);
  split.voting_members = {1};
  split.methods = {{"pNP-sLDA", classifier::NpMethod::PnpSlda}};
  CHECK_THROWS_AS(split.validate(), DomainError);
}
