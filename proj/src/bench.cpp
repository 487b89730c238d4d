#include "nestprune/bench.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <set>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "nestprune/errors.hpp"

namespace nestprune {

namespace {

int omp_default_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

struct RepetitionRun {
  std::vector<RepetitionResult> per_variant;
  std::vector<std::vector<FalsePruneRecord>> false_prunes;
};

Cohort cohort_for(const BenchConfig& bench, int rep) {
  if (bench.fixed_cohort) return *bench.fixed_cohort;
  TraceGenConfig gen = bench.gen;
  gen.trials = bench.trials_per_rep;
  gen.seed = bench.base_seed + static_cast<std::uint64_t>(rep);
  return generate_cohort(gen);
}

RepetitionRun run_repetition(const BenchConfig& bench, int rep) {
  const Cohort cohort = cohort_for(bench, rep);
  const Direction direction = bench.variants.front().config.direction;

  // Ground truth: first trial with the best full objective, per variant trim.
  RepetitionRun run;
  for (const auto& variant : bench.variants) {
    const auto& cfg = variant.config;
    std::size_t best = 0;
    double best_value = 0.0;
    for (std::size_t i = 0; i < cohort.size(); ++i) {
      const double v = full_objective(cohort[i], cfg.trim_fraction);
      if (i == 0 || strictly_better(v, best_value, direction)) {
        best = i;
        best_value = v;
      }
    }

    const StudyReport study = run_study(cohort, cfg, bench.workers);
    RepetitionResult r;
    r.rep = rep;
    r.models_trained = study.total_models;
    r.completed = study.completed;
    r.pruned_semantic = study.pruned_semantic;
    r.pruned_threshold = study.pruned_threshold;
    r.pruned_comparison = study.pruned_comparison;
    r.true_best = cohort[best].trial_id;
    r.best_preserved = study.outcomes[best].status == TrialStatus::completed;

    auto false_prunes = classify_false_prunes(study.outcomes, cohort, cfg, rep);
    r.falsely_pruned = static_cast<std::int64_t>(false_prunes.size());
    for (const auto& f : false_prunes) {
      if (!r.max_margin || f.margin > *r.max_margin) r.max_margin = f.margin;
    }
    run.per_variant.push_back(std::move(r));
    run.false_prunes.push_back(std::move(false_prunes));
  }
  return run;
}

BenchReport aggregate(const BenchConfig& bench, std::vector<RepetitionRun>& runs) {
  BenchReport report;
  report.repetitions = bench.repetitions;
  report.trials_per_rep = bench.fixed_cohort ? static_cast<int>(bench.fixed_cohort->size()) : bench.trials_per_rep;
  report.shape = bench.shape();
  report.base_seed = bench.base_seed;
  report.baseline = bench.baseline;
  report.workers = bench.workers;
  report.source = bench.fixed_cohort ? "traces" : "synthetic";

  for (std::size_t v = 0; v < bench.variants.size(); ++v) {
    VariantReport out;
    out.name = bench.variants[v].name;
    out.config = bench.variants[v].config;
    out.best_preserved_all = true;
    for (auto& run : runs) {
      const auto& r = run.per_variant[v];
      out.total_models += r.models_trained;
      out.completed += r.completed;
      out.pruned_semantic += r.pruned_semantic;
      out.pruned_threshold += r.pruned_threshold;
      out.pruned_comparison += r.pruned_comparison;
      out.falsely_pruned += r.falsely_pruned;
      out.best_preserved_all = out.best_preserved_all && r.best_preserved;
      out.reps.push_back(r);
      for (auto& f : run.false_prunes[v]) out.false_prunes.push_back(std::move(f));
    }
    const auto n = static_cast<double>(out.reps.size());
    out.mean_models = static_cast<double>(out.total_models) / n;
    if (out.reps.size() > 1) {
      double ss = 0.0;
      for (const auto& r : out.reps) {
        const double d = static_cast<double>(r.models_trained) - out.mean_models;
        ss += d * d;
      }
      out.stddev_models = std::sqrt(ss / (n - 1.0));
    }
    report.variants.push_back(std::move(out));
  }

  const auto& base = report.variant(bench.baseline);
  const auto base_total = static_cast<double>(base.total_models);
  for (auto& v : report.variants) {
    v.percent_saved = 100.0 * (1.0 - static_cast<double>(v.total_models) / base_total);
  }
  return report;
}

}  // namespace

void BenchConfig::validate() const {
  if (repetitions < 1) throw ValidationError("repetitions must be >= 1");
  if (variants.empty()) throw ValidationError("at least one pruner variant is required");
  if (workers < 1) throw ValidationError("workers must be >= 1");
  if (threads < 0) throw ValidationError("threads must be >= 0");
  if (fixed_cohort) {
    validate_cohort(*fixed_cohort);
  } else {
    if (trials_per_rep < 1) throw ValidationError("trials per repetition must be >= 1");
    TraceGenConfig g = gen;
    g.trials = trials_per_rep;
    g.validate();
  }
  std::set<std::string> names;
  const Direction direction = variants.front().config.direction;
  for (const auto& v : variants) {
    if (v.name.empty()) throw ValidationError("variant names must be non-empty");
    if (!names.insert(v.name).second) throw ValidationError("duplicate variant name '" + v.name + "'");
    if (v.config.direction != direction) {
      throw ValidationError("variant '" + v.name + "' uses a different direction than '" + variants.front().name +
                            "'");
    }
    v.config.validate();
  }
  if (!fixed_cohort && gen.direction != direction) {
    throw ValidationError("trace generation direction differs from the pruner direction");
  }
  if (!names.contains(baseline)) throw ValidationError("baseline variant '" + baseline + "' not among variants");
}

CvShape BenchConfig::shape() const { return fixed_cohort ? fixed_cohort->front().shape : gen.shape; }

const VariantReport& BenchReport::variant(const std::string& name) const {
  const auto it = std::find_if(variants.begin(), variants.end(), [&](const auto& v) { return v.name == name; });
  if (it == variants.end()) throw ValidationError("no variant named '" + name + "' in report");
  return *it;
}

std::vector<FalsePruneRecord> classify_false_prunes(const std::vector<TrialOutcome>& outcomes, const Cohort& cohort,
                                                    const PrunerConfig& config, int rep) {
  std::vector<FalsePruneRecord> out;
  if (!config.threshold) return out;
  for (const auto& o : outcomes) {
    if (o.status != TrialStatus::pruned || o.layer != PruneLayer::threshold) continue;
    const auto it =
        std::find_if(cohort.begin(), cohort.end(), [&](const auto& t) { return t.trial_id == o.trial_id; });
    if (it == cohort.end()) throw PreconditionError("no trace for trial '" + o.trial_id + "'");
    const double objective = full_objective(*it, config.trim_fraction);
    if (strictly_better(objective, *config.threshold, config.direction)) {
      out.push_back(
          FalsePruneRecord{rep, o.trial_id, objective, *config.threshold, std::fabs(objective - *config.threshold)});
    }
  }
  return out;
}

BenchReport compare_pruners_serial(const BenchConfig& bench) {
  bench.validate();
  std::vector<RepetitionRun> runs;
  runs.reserve(static_cast<std::size_t>(bench.repetitions));
  for (int rep = 0; rep < bench.repetitions; ++rep) runs.push_back(run_repetition(bench, rep));
  return aggregate(bench, runs);
}

BenchReport compare_pruners(const BenchConfig& bench) {
  bench.validate();
  std::vector<RepetitionRun> runs(static_cast<std::size_t>(bench.repetitions));
  std::exception_ptr failure;
  const int threads = bench.threads;
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads > 0 ? threads : omp_default_threads())
  for (int rep = 0; rep < bench.repetitions; ++rep) {
    try {
      runs[static_cast<std::size_t>(rep)] = run_repetition(bench, rep);
    } catch (...) {
#pragma omp critical(nestprune_bench_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return aggregate(bench, runs);
}

ReportFormat parse_report_format(std::string_view text) {
  if (text == "json") return ReportFormat::json;
  if (text == "csv") return ReportFormat::csv;
  throw ValidationError("unknown report format '" + std::string(text) + "' (expected json|csv)");
}

}  // namespace nestprune
