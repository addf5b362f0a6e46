#include <charconv>
#include <string>

#include <json.hpp>

#include "nplda/experiments/experiments.hpp"

namespace nplda::experiments {

namespace {

using Json = nlohmann::ordered_json;

std::string num(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : "NA"; }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

Json opt_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json tags_json(const std::vector<std::pair<std::string, std::string>>& tags) {
  Json j = Json::object();
  for (const auto& [k, v] : tags) j[k] = v;
  return j;
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

Json spec_json(const ExperimentSpec& spec) {
  Json j;
  j["example"] = to_string(spec.id);
  j["kind"] = kind_name(spec.kind);
  j["reps"] = spec.reps;
  j["seed"] = spec.seed;
  j["alpha"] = spec.alpha;
  j["delta0"] = spec.delta0;
  j["tau"] = spec.tau;
  j["epsilon"] = spec.epsilon;
  j["test_n0"] = spec.test_n0;
  j["test_n1"] = spec.test_n1;
  j["common_test_set"] = spec.common_test_set;
  j["lambda"] = spec.train.lambda ? Json(*spec.train.lambda) : Json("cv");
  j["cv_folds"] = spec.train.cv_folds;
  j["cv_rule"] = spec.train.cv_rule == scoring::CvRule::OneSe ? "1se" : "min";
  j["adaptive_folds"] = spec.adaptive_folds;
  j["voting_members"] = spec.voting_members;
  Json methods = Json::array();
  for (const auto& m : spec.methods) methods.push_back(m.name);
  j["methods"] = methods;
  Json settings = Json::array();
  for (const auto& s : spec.settings) {
    Json e;
    e["label"] = s.label;
    e["n0"] = s.n0;
    e["n1"] = s.n1;
    e["d"] = s.model.dim();
    e["tags"] = tags_json(s.tags);
    settings.push_back(e);
  }
  j["settings"] = settings;
  return j;
}

}  // namespace

std::string to_csv(const ExperimentReport& report) {
  std::string out;
  switch (report.spec.kind) {
    case StudyKind::ErrorTable:
      out = "setting,method,violation_rate,type2_mean,type2_sd,n_reps\n";
      for (const auto& s : report.error_table) {
        for (const auto& m : s.methods) {
          out += csv_field(s.setting) + "," + csv_field(m.method) + ",";
          if (m.available) {
            out += num(m.violation_rate) + "," + num(m.type2_mean) + "," + num(m.type2_sd);
          } else {
            out += "NA,NA,NA";
          }
          out += "," + std::to_string(m.n_reps) + "\n";
        }
      }
      break;
    case StudyKind::SplitStudy:
      out = "setting,method,splits,statistic,value\n";
      for (const auto& s : report.split_study) {
        for (const auto& m : s.summaries) {
          const std::string prefix = csv_field(s.setting) + "," + csv_field(m.method) + "," +
                                     std::to_string(m.splits) + ",";
          for (std::size_t t = 0; t < m.tau_grid.size(); ++t) {
            out += prefix + "ave_tau_" + num(m.tau_grid[t]) + "," + opt_num(m.ave_fixed[t]) + "\n";
          }
          out += prefix + "ave_adaptive," + opt_num(m.ave_adaptive) + "\n";
          out += prefix + "ave_adaptive_per_dataset," + opt_num(m.ave_adaptive_per_dataset) + "\n";
          out += prefix + "tau_ada," + opt_num(m.tau_ada) + "\n";
          out += prefix + "tau_opt," + opt_num(m.tau_opt) + "\n";
          out += prefix + "n_reps," + std::to_string(m.n_reps) + "\n";
        }
      }
      break;
    case StudyKind::EigenBound: {
      // Rows are (d, covariance, rho); columns are the N0 values in order of
      // first appearance.
      std::vector<std::string> n0s;
      std::vector<std::string> rows;
      std::vector<std::vector<std::string>> cells;
      auto tag = [](const EigenBoundSetting& s, const std::string& key) {
        for (const auto& [k, v] : s.tags) {
          if (k == key) return v;
        }
        return std::string("NA");
      };
      for (const auto& s : report.eigen_bound) {
        const std::string row = tag(s, "d") + "," + tag(s, "covariance") + "," + tag(s, "rho");
        const std::string n0 = tag(s, "N0");
        std::size_t ri = 0;
        while (ri < rows.size() && rows[ri] != row) ++ri;
        if (ri == rows.size()) {
          rows.push_back(row);
          cells.emplace_back();
        }
        std::size_t ci = 0;
        while (ci < n0s.size() && n0s[ci] != n0) ++ci;
        if (ci == n0s.size()) n0s.push_back(n0);
        if (cells[ri].size() <= ci) cells[ri].resize(ci + 1, "NA");
        cells[ri][ci] = opt_num(s.probability);
      }
      out = "d,covariance,rho";
      for (const auto& n : n0s) out += "," + n;
      out += "\n";
      for (std::size_t r = 0; r < rows.size(); ++r) {
        out += rows[r];
        for (std::size_t c = 0; c < n0s.size(); ++c) {
          out += "," + (c < cells[r].size() ? cells[r][c] : std::string("NA"));
        }
        out += "\n";
      }
      break;
    }
  }
  return out;
}

std::string to_json(const ExperimentReport& report, bool include_runtime) {
  Json j;
  j["config"] = spec_json(report.spec);
  Json settings = Json::array();
  for (const auto& s : report.error_table) {
    Json e;
    e["setting"] = s.setting;
    e["tags"] = tags_json(s.tags);
    e["oracle_type2"] = s.oracle_type2;
    Json methods = Json::array();
    for (const auto& m : s.methods) {
      Json mj;
      mj["method"] = m.method;
      mj["supported"] = m.supported;
      mj["available"] = m.available;
      mj["note"] = m.note;
      mj["violation_rate"] = m.available ? Json(m.violation_rate) : Json(nullptr);
      mj["type2_mean"] = m.available ? Json(m.type2_mean) : Json(nullptr);
      mj["type2_sd"] = m.available ? Json(m.type2_sd) : Json(nullptr);
      mj["n_reps"] = m.n_reps;
      mj["failed_reps"] = m.failed_reps;
      if (!m.per_rep.empty()) {
        Json reps = Json::array();
        for (const auto& e2 : m.per_rep) reps.push_back({{"type1", e2.type1}, {"type2", e2.type2}});
        mj["per_rep"] = reps;
      }
      methods.push_back(mj);
    }
    e["methods"] = methods;
    settings.push_back(e);
  }
  for (const auto& s : report.split_study) {
    Json e;
    e["setting"] = s.setting;
    e["tags"] = tags_json(s.tags);
    Json sums = Json::array();
    for (const auto& m : s.summaries) {
      Json mj;
      mj["method"] = m.method;
      mj["splits"] = m.splits;
      mj["supported"] = m.supported;
      mj["note"] = m.note;
      Json fixed = Json::object();
      for (std::size_t t = 0; t < m.tau_grid.size(); ++t) {
        fixed[num(m.tau_grid[t])] = opt_json(m.ave_fixed[t]);
      }
      mj["ave_fixed"] = fixed;
      mj["ave_adaptive_once_then_fixed"] = opt_json(m.ave_adaptive);
      mj["ave_adaptive_per_dataset"] = opt_json(m.ave_adaptive_per_dataset);
      mj["tau_ada"] = opt_json(m.tau_ada);
      mj["tau_opt"] = opt_json(m.tau_opt);
      mj["n_reps"] = m.n_reps;
      mj["failed_reps"] = m.failed_reps;
      if (report.spec.keep_per_rep) mj["tau_ada_per_rep"] = m.tau_ada_per_rep;
      sums.push_back(mj);
    }
    e["summaries"] = sums;
    settings.push_back(e);
  }
  for (const auto& s : report.eigen_bound) {
    Json e;
    e["setting"] = s.setting;
    e["tags"] = tags_json(s.tags);
    e["probability"] = opt_json(s.probability);
    e["factor"] = opt_json(s.factor);
    e["lambda_max_population"] = s.lambda_max_population;
    e["n_reps"] = s.n_reps;
    settings.push_back(e);
  }
  j["settings"] = settings;
  if (include_runtime) j["runtime_seconds"] = report.runtime_seconds;
  return j.dump(2) + "\n";
}

}  // namespace nplda::experiments
