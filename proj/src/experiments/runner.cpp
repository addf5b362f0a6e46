#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "nplda/errors.hpp"
#include "nplda/experiments/experiments.hpp"
#include "nplda/scoring/scoring.hpp"
#include "nplda/thresholding/thresholding.hpp"

namespace nplda::experiments {

namespace {

using classifier::Model;
using classifier::NpClassifier;
using classifier::NpMethod;

constexpr std::uint64_t kTrainKey = 1;
constexpr std::uint64_t kDataKey = 2;
constexpr std::uint64_t kTestKey = 3;
constexpr std::uint64_t kAdaptiveKey = 4;
constexpr std::uint64_t kTauKeyBase = 100;
constexpr std::uint64_t kCommonTestRep = 0xFFFFFFFFull;

stats::RngStream rep_stream(std::uint64_t seed, std::size_t setting, std::uint64_t rep) {
  return stats::RngStream(seed, (static_cast<std::uint64_t>(setting) << 32) | rep);
}

classifier::TrainOptions train_options(const ExperimentSpec& spec) {
  auto opts = spec.train;
  opts.epsilon = spec.epsilon;
  return opts;
}

Eigen::Index chunk_rows(std::size_t d) {
  return std::clamp<Eigen::Index>(static_cast<Eigen::Index>((1u << 21) / std::max<std::size_t>(d, 1)),
                                  256, 8192);
}

// Streams n rows from N(mean, Sigma) in chunks; `visit` sees each chunk.
template <class Visit>
void stream_rows(const data::GaussianSampler& sampler, const Vector& mean, std::size_t n,
                 stats::RngStream& rng, Visit&& visit) {
  const Eigen::Index step = chunk_rows(sampler.dim());
  Matrix chunk;
  for (std::size_t done = 0; done < n;) {
    const Eigen::Index rows = std::min<Eigen::Index>(step, static_cast<Eigen::Index>(n - done));
    chunk.resize(rows, static_cast<Eigen::Index>(sampler.dim()));
    sampler.sample_into(mean, chunk, rng);
    visit(chunk);
    done += static_cast<std::size_t>(rows);
  }
}

std::size_t count_positive(const Model& model, const Matrix& x) {
  const auto hat = classifier::model_predict(model, x);
  return static_cast<std::size_t>(std::count(hat.begin(), hat.end(), std::uint8_t{1}));
}

struct Moments {
  double mean = 0.0;
  double sd = 0.0;
};

Moments mean_sd(const std::vector<double>& v) {
  Moments m;
  if (v.empty()) return m;
  for (double x : v) m.mean += x;
  m.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - m.mean) * (x - m.mean);
    m.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return m;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::size_t tau_index(double tau, const std::vector<double>& grid) {
  for (std::size_t t = 0; t < grid.size(); ++t) {
    if (std::abs(grid[t] - tau) < 1e-12) return t;
  }
  throw DomainError("tau not on the grid");
}

}  // namespace

ExperimentReport run_experiment(const ExperimentSpec& spec, std::size_t threads) {
  spec.validate();
  if (spec.kind != StudyKind::ErrorTable) {
    throw DomainError("run_experiment: spec is not an error-table study");
  }
  const auto start = std::chrono::steady_clock::now();
  ExperimentReport report;
  report.spec = spec;
  const auto opts = train_options(spec);

  for (std::size_t si = 0; si < spec.settings.size(); ++si) {
    const Setting& setting = spec.settings[si];
    const std::size_t d = setting.model.dim();
    const data::GaussianSampler sampler(setting.model.covariance, d);

    ErrorTableSetting out;
    out.setting = setting.label;
    out.tags = setting.tags;
    out.oracle_type2 = data::oracle_errors(setting.model, spec.alpha).type2;

    std::vector<NpMethod> active;
    std::vector<std::size_t> slot_of;
    for (std::size_t m = 0; m < spec.methods.size(); ++m) {
      MethodSummary summary;
      summary.method = spec.methods[m].name;
      if (!spec.methods[m].method) {
        summary.supported = false;
        summary.available = false;
        summary.note = "unsupported";
      } else {
        try {
          classifier::check_feasible(*spec.methods[m].method, setting.n0, setting.n1, d,
                                     spec.alpha, spec.delta0, spec.tau);
          active.push_back(*spec.methods[m].method);
          slot_of.push_back(m);
        } catch (const FeasibilityError& e) {
          summary.available = false;
          summary.note = e.what();
        }
      }
      out.methods.push_back(std::move(summary));
    }

    // results[rep][k]: errors of active method k, empty when that rep failed.
    std::vector<std::vector<std::optional<classifier::ErrorPair>>> results(
        spec.reps, std::vector<std::optional<classifier::ErrorPair>>(active.size()));
    std::vector<std::vector<std::string>> errors(spec.reps, std::vector<std::string>(active.size()));

    if (!active.empty()) {
      parallel_for(spec.reps, threads, [&](std::size_t r) {
        auto rng = rep_stream(spec.seed, si, r);
        auto data_rng = rng.child(kDataKey);
        const auto train_data =
            data::generate(setting.model, sampler, setting.n0, setting.n1, data_rng);
        auto train_rng = rng.child(kTrainKey);
        std::vector<classifier::MethodOutcome> outcomes;
        try {
          outcomes = classifier::train_shared(train_data, active, spec.alpha, spec.delta0,
                                              spec.tau, train_rng, opts);
        } catch (const NumericalError& e) {
          for (auto& msg : errors[r]) msg = e.what();
          return;
        } catch (const SingularityError& e) {
          for (auto& msg : errors[r]) msg = e.what();
          return;
        }

        std::vector<std::size_t> fp(active.size(), 0), fn(active.size(), 0);
        auto test_rng = spec.common_test_set ? rep_stream(spec.seed, si, kCommonTestRep).child(kTestKey)
                                             : rng.child(kTestKey);
        stream_rows(sampler, setting.model.mu0, spec.test_n0, test_rng, [&](const Matrix& x) {
          for (std::size_t k = 0; k < active.size(); ++k) {
            if (outcomes[k].classifier) fp[k] += count_positive(*outcomes[k].classifier, x);
          }
        });
        stream_rows(sampler, setting.model.mu1, spec.test_n1, test_rng, [&](const Matrix& x) {
          for (std::size_t k = 0; k < active.size(); ++k) {
            if (outcomes[k].classifier) {
              fn[k] += static_cast<std::size_t>(x.rows()) - count_positive(*outcomes[k].classifier, x);
            }
          }
        });
        for (std::size_t k = 0; k < active.size(); ++k) {
          if (outcomes[k].classifier) {
            results[r][k] = classifier::ErrorPair{
                static_cast<double>(fp[k]) / static_cast<double>(spec.test_n0),
                static_cast<double>(fn[k]) / static_cast<double>(spec.test_n1)};
          } else {
            errors[r][k] = outcomes[k].error;
          }
        }
      });
    }

    for (std::size_t k = 0; k < active.size(); ++k) {
      MethodSummary& summary = out.methods[slot_of[k]];
      std::vector<double> type2;
      std::size_t violations = 0;
      for (std::size_t r = 0; r < spec.reps; ++r) {
        if (!results[r][k]) {
          ++summary.failed_reps;
          if (summary.note.empty()) summary.note = errors[r][k];
          continue;
        }
        type2.push_back(results[r][k]->type2);
        violations += results[r][k]->type1 > spec.alpha;
        if (spec.keep_per_rep) summary.per_rep.push_back(*results[r][k]);
      }
      summary.n_reps = type2.size();
      if (type2.empty()) {
        summary.available = false;
        continue;
      }
      const auto ms = mean_sd(type2);
      summary.violation_rate = static_cast<double>(violations) / static_cast<double>(type2.size());
      summary.type2_mean = ms.mean;
      summary.type2_sd = ms.sd;
    }
    report.error_table.push_back(std::move(out));
  }
  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

ExperimentReport run_split_study(const ExperimentSpec& spec, std::size_t threads) {
  spec.validate();
  if (spec.kind != StudyKind::SplitStudy) {
    throw DomainError("run_split_study: spec is not a split study");
  }
  const auto start = std::chrono::steady_clock::now();
  ExperimentReport report;
  report.spec = spec;
  const auto opts = train_options(spec);
  const auto grid = classifier::tau_grid();
  const std::size_t max_members = *std::max_element(spec.voting_members.begin(),
                                                     spec.voting_members.end());

  for (std::size_t si = 0; si < spec.settings.size(); ++si) {
    const Setting& setting = spec.settings[si];
    const std::size_t d = setting.model.dim();
    const data::GaussianSampler sampler(setting.model.covariance, d);
    SplitStudySetting out;
    out.setting = setting.label;
    out.tags = setting.tags;

    for (std::size_t mi = 0; mi < spec.methods.size(); ++mi) {
      const auto& slot = spec.methods[mi];
      if (!slot.method) {
        for (auto m : spec.voting_members) {
          SplitSummary s;
          s.method = slot.name;
          s.splits = m;
          s.supported = false;
          s.note = "unsupported";
          s.tau_grid = grid;
          s.ave_fixed.assign(grid.size(), std::nullopt);
          out.summaries.push_back(std::move(s));
        }
        continue;
      }
      const NpMethod method = *slot.method;

      std::vector<bool> feasible(grid.size(), false);
      for (std::size_t t = 0; t < grid.size(); ++t) {
        try {
          classifier::check_feasible(method, setting.n0, setting.n1, d, spec.alpha, spec.delta0,
                                     grid[t]);
          feasible[t] = true;
        } catch (const FeasibilityError&) {
        }
      }

      // members[r][t]: up to max_members single-split classifiers at grid[t].
      std::vector<std::vector<std::vector<NpClassifier>>> members(
          spec.reps, std::vector<std::vector<NpClassifier>>(grid.size()));
      std::vector<std::optional<double>> tau_ada(spec.reps);
      std::vector<char> failed(spec.reps, 0);

      parallel_for(spec.reps, threads, [&](std::size_t r) {
        try {
          auto rng = rep_stream(spec.seed, si, r);
          auto data_rng = rng.child(kDataKey);
          const auto train_data =
              data::generate(setting.model, sampler, setting.n0, setting.n1, data_rng);
          for (std::size_t t = 0; t < grid.size(); ++t) {
            if (!feasible[t]) continue;
            auto tau_rng = rng.child(kTauKeyBase + t);
            try {
              const auto vote = classifier::train_voting(train_data, method, spec.alpha, spec.delta0,
                                                         grid[t], max_members, tau_rng, opts);
              members[r][t] = vote.members();
            } catch (const FeasibilityError&) {
              members[r][t].clear();
            }
          }
          auto ada_rng = rng.child(kAdaptiveKey);
          try {
            tau_ada[r] = classifier::adaptive_tau(train_data, method, spec.alpha, spec.delta0,
                                                  spec.adaptive_folds, ada_rng, opts)
                             .tau_min;
          } catch (const FeasibilityError&) {
            tau_ada[r].reset();
          }
        } catch (const NumericalError&) {
          failed[r] = 1;
        } catch (const SingularityError&) {
          failed[r] = 1;
        }
        if (failed[r]) {
          for (auto& m : members[r]) m.clear();
          tau_ada[r].reset();
        }
      });
      const std::size_t n_ok =
          spec.reps - static_cast<std::size_t>(std::count(failed.begin(), failed.end(), 1));

      // One pass over the common class-1 test set. votes[r][t][m] counts
      // test points that member m predicts as class 1; majority votes for
      // each ensemble size are accumulated in `missed`.
      const std::size_t n_sizes = spec.voting_members.size();
      std::vector<std::vector<std::vector<std::size_t>>> missed(
          n_sizes, std::vector<std::vector<std::size_t>>(spec.reps,
                                                         std::vector<std::size_t>(grid.size(), 0)));
      auto test_rng = rep_stream(spec.seed, si, kCommonTestRep).child(kTestKey);
      stream_rows(sampler, setting.model.mu1, spec.test_n1, test_rng, [&](const Matrix& x) {
        parallel_for(spec.reps, threads, [&](std::size_t r) {
          std::vector<int> votes(static_cast<std::size_t>(x.rows()));
          for (std::size_t t = 0; t < grid.size(); ++t) {
            const auto& clfs = members[r][t];
            if (clfs.empty()) continue;
            std::fill(votes.begin(), votes.end(), 0);
            std::size_t used = 0;
            for (std::size_t z = 0; z < n_sizes; ++z) {
              const std::size_t m = spec.voting_members[z];
              for (; used < m; ++used) {
                const Vector s = clfs[used].scores(x);
                for (Eigen::Index i = 0; i < s.size(); ++i) {
                  votes[static_cast<std::size_t>(i)] += s(i) > clfs[used].cutoff();
                }
              }
              std::size_t miss = 0;
              for (int v : votes) miss += 2 * static_cast<std::size_t>(v) < m;
              missed[z][r][t] += miss;
            }
          }
        });
      });

      for (std::size_t z = 0; z < n_sizes; ++z) {
        SplitSummary s;
        s.method = slot.name;
        s.splits = spec.voting_members[z];
        s.tau_grid = grid;
        s.ave_fixed.assign(grid.size(), std::nullopt);
        const auto n1 = static_cast<double>(spec.test_n1);
        auto r1 = [&](std::size_t r, std::size_t t) -> std::optional<double> {
          if (members[r][t].empty()) return std::nullopt;
          return static_cast<double>(missed[z][r][t]) / n1;
        };
        for (std::size_t t = 0; t < grid.size(); ++t) {
          double sum = 0.0;
          bool all = feasible[t] && n_ok > 0;
          for (std::size_t r = 0; r < spec.reps && all; ++r) {
            if (failed[r]) continue;
            const auto v = r1(r, t);
            if (!v) all = false;
            else sum += *v;
          }
          if (all) s.ave_fixed[t] = sum / static_cast<double>(n_ok);
        }

        std::vector<double> w, chosen, per_dataset;
        for (std::size_t r = 0; r < spec.reps; ++r) {
          if (!tau_ada[r]) continue;
          const std::size_t t = tau_index(*tau_ada[r], grid);
          chosen.push_back(*tau_ada[r]);
          if (s.ave_fixed[t]) w.push_back(*s.ave_fixed[t]);
          if (const auto v = r1(r, t)) per_dataset.push_back(*v);
        }
        s.tau_ada_per_rep = chosen;
        if (!chosen.empty()) s.tau_ada = mean_sd(chosen).mean;
        if (!w.empty()) s.ave_adaptive = median(w);
        if (!per_dataset.empty()) s.ave_adaptive_per_dataset = mean_sd(per_dataset).mean;

        std::vector<double> opt;
        for (std::size_t r = 0; r < spec.reps; ++r) {
          std::optional<std::size_t> best;
          for (std::size_t t = 0; t < grid.size(); ++t) {
            const auto v = r1(r, t);
            if (v && (!best || *v < *r1(r, *best))) best = t;
          }
          if (best) opt.push_back(grid[*best]);
        }
        if (!opt.empty()) s.tau_opt = mean_sd(opt).mean;
        s.n_reps = n_ok;
        s.failed_reps = spec.reps - n_ok;
        if (std::none_of(feasible.begin(), feasible.end(), [](bool f) { return f; })) {
          s.note = "no feasible split proportion";
        }
        out.summaries.push_back(std::move(s));
      }
    }
    report.split_study.push_back(std::move(out));
  }
  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

ExperimentReport run_eigenbound_study(const ExperimentSpec& spec, std::size_t threads) {
  spec.validate();
  if (spec.kind != StudyKind::EigenBound) {
    throw DomainError("run_eigenbound_study: spec is not an eigenvalue-bound study");
  }
  const auto start = std::chrono::steady_clock::now();
  ExperimentReport report;
  report.spec = spec;
  for (std::size_t si = 0; si < spec.settings.size(); ++si) {
    const Setting& setting = spec.settings[si];
    const std::size_t d = setting.model.dim();
    EigenBoundSetting out;
    out.setting = setting.label;
    out.tags = setting.tags;
    out.lambda_max_population =
        stats::max_eigenvalue(data::materialize_covariance(setting.model));
    out.factor = thresholding::eigen_bound_factor(d, setting.n0 + setting.n1, spec.epsilon);
    if (out.factor) {
      const data::GaussianSampler sampler(setting.model.covariance, d);
      std::vector<char> ok(spec.reps, 0);
      parallel_for(spec.reps, threads, [&](std::size_t r) {
        auto rng = rep_stream(spec.seed, si, r);
        auto data_rng = rng.child(kDataKey);
        const Matrix x0 = sampler.sample(setting.model.mu0, setting.n0, data_rng);
        const Matrix x1 = sampler.sample(setting.model.mu1, setting.n1, data_rng);
        const auto moments = scoring::pooled_moments(x0, x1);
        ok[r] = out.lambda_max_population <= *out.factor * stats::max_eigenvalue(moments.sigma_hat);
      });
      out.probability = static_cast<double>(std::count(ok.begin(), ok.end(), 1)) /
                        static_cast<double>(spec.reps);
      out.n_reps = spec.reps;
    }
    report.eigen_bound.push_back(std::move(out));
  }
  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

ExperimentReport run(const ExperimentSpec& spec, std::size_t threads) {
  switch (spec.kind) {
    case StudyKind::ErrorTable:
      return run_experiment(spec, threads);
    case StudyKind::SplitStudy:
      return run_split_study(spec, threads);
    default:
      return run_eigenbound_study(spec, threads);
  }
}

}  // namespace nplda::experiments
