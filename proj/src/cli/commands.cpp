#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "nplda/classifier/classifier.hpp"
#include "nplda/cli/cli.hpp"
#include "nplda/errors.hpp"
#include "nplda/experiments/experiments.hpp"
#include "nplda/thresholding/thresholding.hpp"

namespace nplda::cli {

namespace {

using classifier::NpMethod;

struct Globals {
  std::uint64_t seed = 42;
  std::size_t threads = 0;
  std::string output;
  std::string format = "csv";
};

struct TrainArgs {
  std::string data;
  std::string method;
  std::optional<double> alpha;
  std::optional<double> delta;
  double tau = 0.5;
  bool adaptive = false;
  std::size_t folds = 5;
  std::size_t splits = 1;
  std::string lambda = "cv";
  std::string cv_rule = "1se";
  double epsilon = 1e-3;
  std::string model_out;
};

struct PredictArgs {
  std::string model;
  std::string data;
  bool scores = false;
};

struct SimulateArgs {
  std::string example;
  std::optional<std::size_t> reps;
  std::optional<std::size_t> test_n0;
  std::optional<std::size_t> test_n1;
  std::string lambda = "cv";
  std::string cv_rule = "1se";
  bool per_rep = false;
};

struct TableArgs {
  double alpha = 0.05;
  double delta = 0.05;
  std::size_t n = 0;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string full(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes `text` to `path`, or to `out` when path is empty.
void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw DomainError("cannot write '" + path + "'");
  f << text;
  if (!f) throw DomainError("failed writing '" + path + "'");
}

scoring::CvRule parse_cv_rule(const std::string& text) {
  return text == "min" ? scoring::CvRule::Min : scoring::CvRule::OneSe;
}

std::optional<double> parse_lambda(const std::string& text) {
  if (text == "cv") return std::nullopt;
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size() || !(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw DomainError("--lambda must be 'cv' or a finite number >= 0, got '" + text + "'");
  }
}

void describe_threshold(const classifier::NpClassifier& clf, std::ostream& out) {
  const auto& th = clf.threshold();
  if (const auto* u = std::get_if<thresholding::UmbrellaInfo>(&th.kind)) {
    out << "threshold: umbrella, k* = " << u->k_star << " of n0' = " << u->n0prime
        << ", violation bound v(k*) = " << num(u->violation_bound) << "\n";
  } else if (const auto* p = std::get_if<thresholding::ParametricInfo>(&th.kind)) {
    out << "threshold: parametric, mean bound = " << num(p->mean_bound)
        << ", variance bound = " << num(p->var_bound) << " (factor " << num(p->factor)
        << ", d_eff = " << p->d_eff << ", epsilon = " << num(p->epsilon) << ")\n";
  } else {
    out << "threshold: sign rule, intercept = " << num(std::get<thresholding::SignRuleInfo>(th.kind).intercept)
        << "\n";
  }
  out << "cutoff = " << full(clf.cutoff()) << "\n";
  const auto& meta = clf.score_function().meta();
  out << "score: " << scoring::to_string(meta.method) << ", support size = "
      << clf.score_function().support().size() << " of d = " << clf.dim();
  if (meta.lambda) {
    out << ", lambda = " << num(*meta.lambda) << (clf.config().lambda_from_cv ? " (cv)" : "");
  }
  out << "\n";
}

int cmd_train(const Globals& g, const TrainArgs& a, std::ostream& out, std::ostream& err) {
  const NpMethod method = classifier::parse_method(a.method);
  const bool classic = method == NpMethod::ClassicSlda;
  if (classic) {
    if (a.alpha || a.delta || a.adaptive) {
      err << "warning: slda ignores --alpha, --delta, --tau and --adaptive\n";
    }
  } else if (!a.alpha || !a.delta) {
    throw DomainError("--alpha and --delta are required for " + a.method);
  }
  if (a.splits == 0 || a.splits % 2 == 0) throw DomainError("--splits must be odd");
  const double alpha = a.alpha.value_or(0.05);
  const double delta = a.delta.value_or(0.05);

  classifier::TrainOptions opts;
  opts.epsilon = a.epsilon;
  opts.lambda = parse_lambda(a.lambda);
  opts.cv_rule = parse_cv_rule(a.cv_rule);

  const auto dataset = to_labeled(read_csv_file(a.data));
  stats::RngStream rng(g.seed, 0);
  double tau = a.tau;
  std::optional<classifier::AdaptiveResult> adaptive;
  if (a.adaptive && !classic) {
    auto ada_rng = rng.child(0xADA);
    adaptive = classifier::adaptive_tau(dataset, method, alpha, delta, a.folds, ada_rng, opts);
    tau = adaptive->tau_min;
  }

  classifier::Model model = a.splits == 1
      ? classifier::Model(classifier::train(dataset, method, alpha, delta, tau, rng, opts))
      : classifier::Model(classifier::train_voting(dataset, method, alpha, delta, tau, a.splits, rng, opts));

  const std::string path = a.model_out.empty() ? g.output : a.model_out;
  emit(path, classifier::to_json(model), out);

  std::ostream& summary = path.empty() ? err : out;
  const std::size_t n0 = dataset.count(0), n1 = dataset.count(1);
  summary << "method: " << a.method << "\n";
  summary << "n0 = " << n0 << ", n1 = " << n1 << ", d = " << dataset.dim() << "\n";
  if (!classic) {
    const std::size_t n0_train = data::split_train_size(n0, tau);
    summary << "alpha = " << num(alpha) << ", delta0 = " << num(delta) << "\n";
    summary << "tau = " << num(tau) << (adaptive ? " (adaptive)" : "") << ": n0 train = "
            << n0_train << ", n0' = " << n0 - n0_train << "\n";
    if (adaptive) {
      summary << "cross-validated type II error by tau:";
      for (const auto& p : adaptive->curve) {
        summary << " " << num(p.tau) << "=" << (p.type2 ? num(*p.type2) : std::string("NA"));
      }
      summary << "\n";
    }
  }
  if (const auto* clf = std::get_if<classifier::NpClassifier>(&model)) {
    describe_threshold(*clf, summary);
  } else {
    const auto& vote = std::get<classifier::VotingClassifier>(model);
    summary << "majority vote over " << vote.members().size() << " splits\n";
    for (std::size_t m = 0; m < vote.members().size(); ++m) {
      summary << "member " << m << ": ";
      describe_threshold(vote.members()[m], summary);
    }
  }
  const auto train_err = std::visit([&](const auto& m) { return classifier::evaluate(m, dataset); }, model);
  summary << "training errors: type I = " << num(train_err.type1) << ", type II = "
          << num(train_err.type2) << "\n";
  return kSuccess;
}

int cmd_predict(const Globals& g, const PredictArgs& a, std::ostream& out) {
  const auto model = classifier::model_from_json(read_file(a.model));
  const auto table = read_csv_file(a.data);
  std::ostringstream text;
  if (table.header.empty()) {
    emit(g.output, "", out);
    return kSuccess;
  }
  const Matrix x = to_features(table);
  const std::size_t d = classifier::model_dim(model);
  if (static_cast<std::size_t>(x.cols()) != d) {
    throw DomainError("dimension mismatch: model has d=" + std::to_string(d) + ", data has " +
                      std::to_string(x.cols()) + " feature columns");
  }
  const auto labels = classifier::model_predict(model, x);
  const Vector scores = a.scores ? classifier::model_scores(model, x) : Vector();
  if (g.format == "json") {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < labels.size(); ++i) {
      nlohmann::ordered_json r;
      r["row_id"] = i;
      if (a.scores) r["score"] = scores(static_cast<Eigen::Index>(i));
      r["label"] = labels[i];
      rows.push_back(r);
    }
    text << rows.dump(2) << "\n";
  } else {
    text << (a.scores ? "row_id,score,label\n" : "row_id,label\n");
    for (std::size_t i = 0; i < labels.size(); ++i) {
      text << i << ",";
      if (a.scores) text << full(scores(static_cast<Eigen::Index>(i))) << ",";
      text << static_cast<int>(labels[i]) << "\n";
    }
  }
  emit(g.output, text.str(), out);
  return kSuccess;
}

int cmd_simulate(const Globals& g, const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  auto spec = experiments::preset(experiments::parse_example(a.example));
  spec.seed = g.seed;
  if (a.reps) spec.reps = *a.reps;
  if (a.test_n0) spec.test_n0 = *a.test_n0;
  if (a.test_n1) spec.test_n1 = *a.test_n1;
  spec.train.lambda = parse_lambda(a.lambda);
  spec.train.cv_rule = parse_cv_rule(a.cv_rule);
  spec.keep_per_rep = a.per_rep;
  const auto report = experiments::run(spec, g.threads);
  emit(g.output, g.format == "json" ? experiments::to_json(report) : experiments::to_csv(report),
       out);
  err << "simulate " << a.example << ": " << spec.reps << " reps in " << num(report.runtime_seconds)
      << " s\n";
  return kSuccess;
}

int cmd_threshold_table(const Globals& g, const TableArgs& a, std::ostream& out,
                        std::ostream& err) {
  thresholding::UmbrellaConfig{a.alpha, a.delta}.validate();
  if (a.n == 0) throw DomainError("--n must be positive");
  const std::size_t minimum = thresholding::min_class0_size(a.alpha, a.delta);
  std::optional<std::size_t> kstar;
  if (a.n >= minimum) kstar = thresholding::k_star(a.n, a.alpha, a.delta);
  std::optional<thresholding::KPrime> kprime;
  if (static_cast<double>(a.n) * a.alpha * a.delta >= 4.0 - 1e-9) {
    kprime = thresholding::k_prime(a.n, a.alpha, a.delta);
  }

  const std::size_t centre = kstar.value_or(a.n);
  const std::size_t lo = centre > 5 ? centre - 5 : 1;
  const std::size_t hi = std::min(a.n, centre + 5);

  std::ostringstream text;
  if (g.format == "json") {
    nlohmann::ordered_json j;
    j["alpha"] = a.alpha;
    j["delta0"] = a.delta;
    j["n0prime"] = a.n;
    j["min_class0_size"] = minimum;
    j["k_star"] = kstar ? nlohmann::ordered_json(*kstar) : nlohmann::ordered_json(nullptr);
    if (kprime) {
      j["k_prime"] = {{"raw", kprime->raw}, {"clamped", kprime->clamped}, {"A", kprime->a}};
    } else {
      j["k_prime"] = nullptr;
    }
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (std::size_t k = lo; k <= hi; ++k) {
      rows.push_back({{"k", k},
                      {"violation_rate", thresholding::violation_rate(k, a.n, a.alpha)},
                      {"k_star", kstar && *kstar == k}});
    }
    j["rows"] = rows;
    text << j.dump(2) << "\n";
  } else {
    text << "alpha = " << num(a.alpha) << ", delta0 = " << num(a.delta) << ", n0' = " << a.n
         << "\n";
    text << "minimum n0' = " << minimum << "\n";
    if (kstar) {
      text << "k* = " << *kstar << "\n";
    } else {
      text << "k* = NA (n0' below the minimum)\n";
    }
    if (kprime) {
      text << "k' = " << kprime->raw;
      if (kprime->was_clamped) text << " (clamped to " << kprime->clamped << ")";
      text << ", A = " << full(kprime->a) << "\n";
    } else {
      text << "k' = NA (requires n0' >= 4/(alpha*delta0) = " << num(4.0 / (a.alpha * a.delta))
           << ")\n";
    }
    text << "k,v(k),flag\n";
    for (std::size_t k = lo; k <= hi; ++k) {
      text << k << "," << full(thresholding::violation_rate(k, a.n, a.alpha)) << ","
           << (kstar && *kstar == k ? "k*" : "") << "\n";
    }
  }
  if (!kstar) {
    err << "warning: n0' = " << a.n << " is below the minimum " << minimum
        << "; no order k has v(k) <= delta0\n";
  }
  emit(g.output, text.str(), out);
  return kSuccess;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Neyman-Pearson classifiers under the LDA model", "nplda"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--seed", g.seed, "Seed for every randomized step")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads for simulations (0 = all cores)")
      ->capture_default_str();
  app.add_option("--output", g.output, "Output path (default stdout)");
  app.add_option("--format", g.format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "Train a classifier on a labeled CSV file");
  train->add_option("--data", ta.data, "CSV with a 0/1 'label' column")->required();
  train->add_option("--method", ta.method, "Classifier")
      ->required()
      ->check(CLI::IsMember({"np-lda", "np-slda", "pnp-lda", "pnp-slda", "slda"}));
  train->add_option("--alpha", ta.alpha, "Type I error bound")->check(CLI::Range(0.0, 1.0));
  train->add_option("--delta", ta.delta, "Violation-rate tolerance")->check(CLI::Range(0.0, 1.0));
  auto* tau_opt = train->add_option("--tau", ta.tau, "Class-0 split proportion")
                      ->check(CLI::Range(0.0, 1.0))
                      ->capture_default_str();
  auto* adaptive_flag =
      train->add_flag("--adaptive", ta.adaptive, "Choose tau by cross-validated type II error");
  tau_opt->excludes(adaptive_flag);
  train->add_option("--folds", ta.folds, "Folds for --adaptive")
      ->check(CLI::Range(std::size_t{2}, std::size_t{1000}))
      ->capture_default_str();
  train->add_option("--splits", ta.splits, "Number of random splits for majority voting (odd)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train->add_option("--lambda", ta.lambda, "Lasso penalty, or 'cv'")->capture_default_str();
  train->add_option("--cv-rule", ta.cv_rule, "CV choice of lambda: smallest error or one-SE")
      ->check(CLI::IsMember({"min", "1se"}))
      ->capture_default_str();
  train->add_option("--epsilon", ta.epsilon, "Epsilon of the eigenvalue bound")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train->add_option("--model-out", ta.model_out, "Model JSON path (default --output)");

  PredictArgs pa;
  auto* predict = app.add_subcommand("predict", "Label the rows of a CSV file");
  predict->add_option("--model", pa.model, "Model JSON")->required();
  predict->add_option("--data", pa.data, "CSV of features")->required();
  predict->add_flag("--scores", pa.scores, "Also print scores");

  SimulateArgs sa;
  auto* simulate = app.add_subcommand("simulate", "Run a preset simulation study");
  simulate->add_option("--example", sa.example, "Preset id (ex1a ... ex8)")->required();
  simulate->add_option("--reps", sa.reps, "Repetitions")->check(CLI::PositiveNumber);
  simulate->add_option("--test-n0", sa.test_n0, "Class-0 test points per repetition");
  simulate->add_option("--test-n1", sa.test_n1, "Class-1 test points per repetition");
  simulate->add_option("--lambda", sa.lambda, "Lasso penalty, or 'cv'")->capture_default_str();
  simulate->add_option("--cv-rule", sa.cv_rule, "CV choice of lambda: smallest error or one-SE")
      ->check(CLI::IsMember({"min", "1se"}))
      ->capture_default_str();
  simulate->add_flag("--per-rep", sa.per_rep, "Keep per-repetition errors in JSON output");

  TableArgs tb;
  auto* table = app.add_subcommand("threshold-table", "Print v(k) around k*, with k' and the minimum n0'");
  table->add_option("--alpha", tb.alpha, "Type I error bound")->required()->check(CLI::Range(0.0, 1.0));
  table->add_option("--delta", tb.delta, "Violation-rate tolerance")
      ->required()
      ->check(CLI::Range(0.0, 1.0));
  table->add_option("--n", tb.n, "Left-out class-0 sample size n0'")
      ->required()
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    if (*train) return cmd_train(g, ta, out, err);
    if (*predict) return cmd_predict(g, pa, out);
    if (*simulate) return cmd_simulate(g, sa, out, err);
    return cmd_threshold_table(g, tb, out, err);
  } catch (const FeasibilityError& e) {
    err << "error: " << e.what() << "\n";
    return kFeasibility;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << " (residual " << e.residual() << ")\n";
    return kNumerical;
  } catch (const SingularityError& e) {
    err << "error: " << e.what() << "\n";
    return kNumerical;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
}

}  // namespace nplda::cli
