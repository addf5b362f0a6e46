#include <cmath>
#include <cstdio>
#include <string>

#include <json.hpp>

#include "nplda/classifier/classifier.hpp"
#include "nplda/errors.hpp"

namespace nplda::classifier {

namespace {

using Json = nlohmann::ordered_json;

std::string format_double(double v) {
  if (!std::isfinite(v)) throw DomainError("model serialization: non-finite number");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

void write(const Json& j, std::string& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
  const std::string close(static_cast<std::size_t>(indent), ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad + Json(it.key()).dump() + ": ";
        write(it.value(), out, indent + 2);
      }
      out += "\n" + close + "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      bool scalars = true;
      for (const auto& v : j) scalars = scalars && v.is_primitive();
      if (scalars) {
        out += "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) out += ", ";
          write(j[i], out, indent);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += pad;
        write(j[i], out, indent + 2);
      }
      out += "\n" + close + "]";
      return;
    }
    case Json::value_t::number_float:
      out += format_double(j.get<double>());
      return;
    default:
      out += j.dump();
  }
}

std::string dump(const Json& j) {
  std::string out;
  write(j, out, 0);
  out += "\n";
  return out;
}

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json to_document(const NpClassifier& clf) {
  const auto& score = clf.score_function();
  const auto& cfg = clf.config();
  Json doc;
  doc["method"] = to_string(clf.method());
  doc["alpha"] = optional_number(cfg.alpha);
  doc["delta0"] = optional_number(cfg.delta0);
  doc["tau"] = optional_number(cfg.tau);
  Json beta = Json::array();
  for (Eigen::Index j = 0; j < score.beta().size(); ++j) beta.push_back(score.beta()(j));
  doc["beta"] = std::move(beta);
  doc["cutoff"] = clf.cutoff();
  doc["threshold_kind"] = clf.threshold().kind_name();

  Json meta;
  meta["score_method"] = scoring::to_string(score.meta().method);
  meta["lambda"] = optional_number(score.meta().lambda);
  meta["lambda_from_cv"] = cfg.lambda_from_cv;
  meta["n0"] = score.meta().n0;
  meta["n1"] = score.meta().n1;
  meta["d"] = score.meta().d;
  meta["support"] = score.support();
  meta["epsilon"] = cfg.epsilon;
  Json th;
  if (const auto* u = std::get_if<thresholding::UmbrellaInfo>(&clf.threshold().kind)) {
    th["k_star"] = u->k_star;
    th["n0prime"] = u->n0prime;
    th["violation_bound"] = u->violation_bound;
  } else if (const auto* p = std::get_if<thresholding::ParametricInfo>(&clf.threshold().kind)) {
    th["mean_bound"] = p->mean_bound;
    th["var_bound"] = p->var_bound;
    th["epsilon"] = p->epsilon;
    th["factor"] = p->factor;
    th["d_eff"] = p->d_eff;
  } else {
    th["intercept"] = std::get<thresholding::SignRuleInfo>(clf.threshold().kind).intercept;
  }
  meta["threshold"] = std::move(th);
  doc["meta"] = std::move(meta);
  return doc;
}

template <class T>
T field(const Json& j, const char* key) {
  if (!j.contains(key)) throw DomainError(std::string("model JSON: missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw DomainError(std::string("model JSON: field '") + key + "' has the wrong type");
  }
}

std::optional<double> optional_field(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return field<double>(j, key);
}

NpClassifier from_document(const Json& doc) {
  if (!doc.is_object()) throw DomainError("model JSON: expected an object");
  const NpMethod method = parse_method(field<std::string>(doc, "method"));
  const auto beta_vec = field<std::vector<double>>(doc, "beta");
  if (beta_vec.empty()) throw DomainError("model JSON: beta is empty");
  const double cutoff = field<double>(doc, "cutoff");
  const auto kind = field<std::string>(doc, "threshold_kind");
  const Json meta = doc.contains("meta") ? doc.at("meta") : Json::object();

  ClassifierConfig cfg;
  cfg.alpha = optional_field(doc, "alpha");
  cfg.delta0 = optional_field(doc, "delta0");
  cfg.tau = optional_field(doc, "tau");
  cfg.epsilon = meta.contains("epsilon") ? field<double>(meta, "epsilon") : 1e-3;
  cfg.lambda = optional_field(meta, "lambda");
  cfg.lambda_from_cv = meta.contains("lambda_from_cv") && field<bool>(meta, "lambda_from_cv");

  Vector beta = Eigen::Map<const Vector>(beta_vec.data(), static_cast<Eigen::Index>(beta_vec.size()));
  std::vector<std::size_t> support;
  if (meta.contains("support")) {
    support = field<std::vector<std::size_t>>(meta, "support");
  } else {
    for (std::size_t j = 0; j < beta_vec.size(); ++j) {
      if (beta_vec[j] != 0.0) support.push_back(j);
    }
  }
  for (std::size_t j = 0, s = 0; j < beta_vec.size(); ++j) {
    const bool listed = s < support.size() && support[s] == j;
    if (listed) ++s;
    if (!listed && beta_vec[j] != 0.0) {
      throw DomainError("model JSON: support does not cover every non-zero coefficient");
    }
  }

  scoring::FitMeta fm;
  fm.method = is_sparse(method) ? scoring::ScoreMethod::Slda : scoring::ScoreMethod::Lda;
  fm.lambda = cfg.lambda;
  fm.n0 = meta.contains("n0") ? field<std::size_t>(meta, "n0") : 0;
  fm.n1 = meta.contains("n1") ? field<std::size_t>(meta, "n1") : 0;
  fm.d = beta_vec.size();

  const Json th = meta.contains("threshold") ? meta.at("threshold") : Json::object();
  thresholding::ThresholdResult result;
  result.cutoff = cutoff;
  if (kind == "umbrella") {
    thresholding::UmbrellaInfo u;
    if (th.contains("k_star")) u.k_star = field<std::size_t>(th, "k_star");
    if (th.contains("n0prime")) u.n0prime = field<std::size_t>(th, "n0prime");
    if (th.contains("violation_bound")) u.violation_bound = field<double>(th, "violation_bound");
    result.kind = u;
  } else if (kind == "parametric") {
    thresholding::ParametricInfo p;
    if (th.contains("mean_bound")) p.mean_bound = field<double>(th, "mean_bound");
    if (th.contains("var_bound")) p.var_bound = field<double>(th, "var_bound");
    if (th.contains("epsilon")) p.epsilon = field<double>(th, "epsilon");
    if (th.contains("factor")) p.factor = field<double>(th, "factor");
    if (th.contains("d_eff")) p.d_eff = field<std::size_t>(th, "d_eff");
    result.kind = p;
  } else if (kind == "sign_rule") {
    thresholding::SignRuleInfo s;
    s.intercept = th.contains("intercept") ? field<double>(th, "intercept") : -cutoff;
    result.kind = s;
  } else {
    throw DomainError("model JSON: unknown threshold_kind '" + kind + "'");
  }
  return NpClassifier(scoring::ScoringFunction(std::move(beta), std::move(support), fm), result,
                      method, cfg);
}

}  // namespace

std::string to_json(const NpClassifier& clf) { return dump(to_document(clf)); }

std::string to_json(const VotingClassifier& clf) {
  Json doc;
  doc["ensemble"] = "majority_vote";
  Json members = Json::array();
  for (const auto& m : clf.members()) members.push_back(to_document(m));
  doc["members"] = std::move(members);
  return dump(doc);
}

std::string to_json(const Model& model) {
  return std::visit([](const auto& m) { return to_json(m); }, model);
}

Model model_from_json(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw DomainError(std::string("model JSON: parse error: ") + e.what());
  }
  if (doc.is_object() && doc.contains("ensemble")) {
    if (field<std::string>(doc, "ensemble") != "majority_vote") {
      throw DomainError("model JSON: unsupported ensemble kind");
    }
    if (!doc.contains("members") || !doc.at("members").is_array()) {
      throw DomainError("model JSON: ensemble needs a members array");
    }
    std::vector<NpClassifier> members;
    for (const auto& m : doc.at("members")) members.push_back(from_document(m));
    return VotingClassifier(std::move(members));
  }
  return from_document(doc);
}

std::size_t model_dim(const Model& model) {
  return std::visit([](const auto& m) { return m.dim(); }, model);
}

Vector model_scores(const Model& model, const Matrix& x) {
  if (const auto* c = std::get_if<NpClassifier>(&model)) return c->scores(x);
  return std::get<VotingClassifier>(model).vote_shares(x);
}

std::vector<std::uint8_t> model_predict(const Model& model, const Matrix& x) {
  return std::visit([&](const auto& m) { return m.predict_rows(x); }, model);
}

}  // namespace nplda::classifier
