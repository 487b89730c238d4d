// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nestprune/bench.hpp"
#include "nestprune/cv_engine.hpp"
#include "nestprune/pruners.hpp"
#include "oracles.hpp"

namespace {

using namespace nestprune;

struct Verdict {
  bool pass = false;
  std::string detail;
};

// Reference synthetic setup shared by criteria 1 and 2.
constexpr int kReps = 30;
constexpr int kTrials = 40;
constexpr std::uint64_t kBaseSeed = 42;
constexpr double kThreshold = 0.45;
constexpr double kMinSavedPercent = 40.0;
constexpr double kMaxWallSeconds = 60.0;

TraceGenConfig reference_gen() {
  TraceGenConfig g;
  g.shape = {30, 10};
  g.base_min = 0.2;
  g.base_max = 0.9;
  g.noise_sd = 0.15;
  g.outlier_prob = 0.05;
  g.outlier_magnitude = 1.0;
  g.zero_feature_prob = 0.10;
  g.direction = Direction::minimize;
  return g;
}

PrunerConfig reference_pruner() {
  PrunerConfig c;
  c.direction = Direction::minimize;
  c.threshold = kThreshold;
  c.extrapolation = ExtrapolationMethod::mean_deviation;
  c.optimal_value = 0.0;
  c.asha.reduction_factor = 3;
  c.asha.min_early_stopping_rate = 2;
  c.asha.bootstrap_count = 0;
  c.asha.min_resource = 1;
  return c;
}

BenchConfig reference_bench() {
  BenchConfig b;
  b.repetitions = kReps;
  b.trials_per_rep = kTrials;
  b.base_seed = kBaseSeed;
  b.gen = reference_gen();
  b.workers = 1;
  b.threads = 1;
  return b;
}

Verdict criterion_reference_benchmark() {
  auto bench = reference_bench();
  bench.variants = {{"asha", preset_config("asha", reference_pruner())},
                    {"three-layer", preset_config("three-layer", reference_pruner())}};
  bench.baseline = "asha";
  const auto start = std::chrono::steady_clock::now();
  const auto report = compare_pruners_serial(bench);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const auto& asha = report.variant("asha");
  const auto& three = report.variant("three-layer");
  // Which layer stopped the true best in repetitions that lost it.
  std::map<std::string, int> lost_by;
  for (const auto& r : three.reps) {
    if (r.best_preserved) continue;
    auto g = bench.gen;
    g.trials = bench.trials_per_rep;
    g.seed = bench.base_seed + static_cast<std::uint64_t>(r.rep);
    const auto cohort = generate_cohort(g);
    const auto study = run_study(cohort, three.config, 1);
    for (const auto& o : study.outcomes) {
      if (o.trial_id == r.true_best && o.layer) ++lost_by[std::string(to_string(*o.layer))];
    }
  }
  std::ostringstream d;
  d << "asha models " << asha.total_models << ", three-layer models " << three.total_models << ", saved "
    << three.percent_saved << "% (need >= " << kMinSavedPercent << "), best preserved "
    << std::count_if(three.reps.begin(), three.reps.end(), [](const auto& r) { return r.best_preserved; }) << "/"
    << kReps;
  for (const auto& [layer, n] : lost_by) d << " (" << n << " lost to " << layer << ")";
  d << ", " << seconds << " s (need < " << kMaxWallSeconds << ")";
  return {three.percent_saved >= kMinSavedPercent && three.best_preserved_all && seconds < kMaxWallSeconds, d.str()};
}

Verdict criterion_false_prune_ordering() {
  auto bench = reference_bench();
  const std::vector<std::pair<std::string, ExtrapolationMethod>> methods{
      {"none", ExtrapolationMethod::none},
      {"mean-dev", ExtrapolationMethod::mean_deviation},
      {"max-dev", ExtrapolationMethod::max_deviation},
      {"optimal", ExtrapolationMethod::optimal_metric}};
  for (const auto& [name, m] : methods) {
    auto cfg = preset_config("threshold", reference_pruner());
    cfg.extrapolation = m;
    bench.variants.push_back({name, cfg});
  }
  bench.baseline = "none";
  const auto r = compare_pruners_serial(bench);
  std::vector<std::int64_t> falsely, models;
  std::ostringstream d;
  for (const auto& [name, m] : methods) {
    falsely.push_back(r.variant(name).falsely_pruned);
    models.push_back(r.variant(name).total_models);
    d << name << ": false " << falsely.back() << " models " << models.back() << "; ";
  }
  bool ok = true;
  for (std::size_t i = 1; i < methods.size(); ++i) {
    ok = ok && falsely[i - 1] >= falsely[i] && models[i - 1] <= models[i];
  }
  return {ok, d.str()};
}

Verdict criterion_threshold_oracle() {
  std::mt19937_64 rng(1001);
  std::uniform_int_distribution<int> missing(0, 12);
  std::uniform_int_distribution<int> pick(0, 3);
  std::uniform_real_distribution<double> jitter(-0.3, 0.3);
  std::uniform_real_distribution<double> optimal(-0.5, 0.5);
  const ExtrapolationMethod methods[] = {ExtrapolationMethod::none, ExtrapolationMethod::optimal_metric,
                                         ExtrapolationMethod::max_deviation, ExtrapolationMethod::mean_deviation};
  int mismatches = 0;
  int prunes = 0;
  constexpr int kCases = 10000;
  for (int i = 0; i < kCases; ++i) {
    const auto values = oracle::random_series(rng, 1, 120, 0.0, 2.0);
    PrunerConfig cfg;
    cfg.direction = pick(rng) % 2 == 0 ? Direction::minimize : Direction::maximize;
    cfg.extrapolation = methods[pick(rng)];
    cfg.optimal_value = optimal(rng);
    cfg.threshold = oracle::median(values) + jitter(rng);
    const auto m = missing(rng);
    const bool got = threshold_decide(values, m, cfg).is_pruned();
    const bool want =
        oracle::threshold_prunes(values, m, cfg.direction, cfg.extrapolation, cfg.optimal_value, *cfg.threshold);
    mismatches += got != want;
    prunes += want;
  }
  return {mismatches == 0, std::to_string(kCases) + " cases, " + std::to_string(prunes) + " prunes, " +
                               std::to_string(mismatches) + " mismatches"};
}

Verdict criterion_asha_oracle() {
  std::mt19937_64 rng(2002);
  std::uniform_int_distribution<int> size(1, 50);
  std::uniform_int_distribution<int> eta(2, 5);
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_int_distribution<int> coarse(0, 5);
  std::uniform_real_distribution<double> fine(0.0, 1.0);
  int mismatches = 0;
  constexpr int kPopulations = 1000;
  for (int p = 0; p < kPopulations; ++p) {
    AshaConfig cfg;
    cfg.reduction_factor = eta(rng);
    const auto direction = coin(rng) ? Direction::minimize : Direction::maximize;
    const bool ties = coin(rng);
    std::vector<double> values(static_cast<std::size_t>(size(rng)));
    for (auto& v : values) v = ties ? coarse(rng) * 0.1 : fine(rng);

    const auto expected = oracle::asha_survivors(values, cfg.reduction_factor, direction);
    std::vector<std::size_t> got;
    const auto resource = asha_rung_resource(0, cfg);
    for (std::size_t k = 0; k < values.size(); ++k) {
      RungTable rungs;
      for (std::size_t j = 0; j < values.size(); ++j) {
        if (j != k) rungs.record(0, "m" + std::to_string(j), values[j]);
      }
      if (!asha_record_and_decide(rungs, "probe", resource, values[k], direction, cfg).is_pruned()) got.push_back(k);
    }
    mismatches += got != expected;
  }
  return {mismatches == 0, std::to_string(kPopulations) + " populations, " + std::to_string(mismatches) +
                               " survivor-set mismatches"};
}

Verdict criterion_robust_statistics() {
  std::mt19937_64 rng(3003);
  std::uniform_real_distribution<double> frac(0.0, 0.499);
  std::uniform_int_distribution<int> use_default(0, 3);
  std::uint64_t worst_trim = 0, worst_median = 0;
  int failures = 0;
  constexpr int kSeries = 10000;
  for (int i = 0; i < kSeries; ++i) {
    const auto v = oracle::random_series(rng, 1, 500);
    const double f = use_default(rng) == 0 ? 0.2 : frac(rng);
    const auto dt = oracle::ulp_distance(trimmed_mean(v, f), oracle::trimmed_mean(v, f));
    const auto dm = oracle::ulp_distance(median(v), oracle::median(v));
    worst_trim = std::max(worst_trim, dt);
    worst_median = std::max(worst_median, dm);
    failures += dt > 1 || dm > 1;
  }
  return {failures == 0, std::to_string(kSeries) + " series, worst trimmed-mean ulp " + std::to_string(worst_trim) +
                             ", worst median ulp " + std::to_string(worst_median)};
}

// Replays a trial step by step and records (layer, step) of the prune, if any.
struct PruneEvent {
  std::optional<PruneLayer> layer;
  std::int64_t step = 0;
  friend bool operator==(const PruneEvent&, const PruneEvent&) = default;
};

std::vector<PruneEvent> replay_events(const Cohort& cohort, const PrunerConfig& cfg) {
  StudyState study(cohort.front().shape, cfg);
  std::vector<PruneEvent> events;
  for (const auto& trial : cohort) {
    study.begin_trial(trial.trial_id);
    PruneEvent e;
    for (const auto& step : trial.steps) {
      ++e.step;
      const auto d = study.report(step);
      if (d.is_pruned()) {
        e.layer = d.layer();
        break;
      }
    }
    events.push_back(e);
  }
  return events;
}

Verdict criterion_window_discipline() {
  std::mt19937_64 rng(4004);
  std::uniform_int_distribution<int> outer(2, 30);
  std::uniform_int_distribution<int> inner(2, 12);
  std::uniform_int_distribution<int> min_steps(4, 8);
  std::uniform_real_distribution<double> window(0.05, 1.0);
  std::uniform_int_distribution<int> eta(2, 4);
  std::uniform_int_distribution<int> rate(0, 2);
  std::uniform_int_distribution<int> min_res(1, 3);
  std::uniform_real_distribution<double> thr(0.3, 0.7);
  int violations = 0, threshold_prunes = 0, comparison_prunes = 0, trials = 0;
  for (int c = 0; c < 300; ++c) {
    TraceGenConfig g;
    g.trials = 10;
    g.shape = {outer(rng), inner(rng)};
    g.seed = rng();
    const auto cohort = generate_cohort(g);
    PrunerConfig cfg;
    cfg.threshold = thr(rng);
    cfg.min_threshold_steps = min_steps(rng);
    cfg.threshold_window_fraction = window(rng);
    cfg.asha.reduction_factor = eta(rng);
    cfg.asha.min_early_stopping_rate = rate(rng);
    cfg.asha.min_resource = min_res(rng);
    const auto first_threshold_step = std::max<std::int64_t>(cfg.min_threshold_steps, (g.shape.inner_folds + 1) / 2);
    const auto window_end = static_cast<std::int64_t>(
        std::ceil(cfg.threshold_window_fraction * g.shape.outer_folds - 1e-9));
    const auto rung0 = asha_rung_resource(0, cfg.asha);
    for (const auto& e : replay_events(cohort, cfg)) {
      ++trials;
      if (!e.layer) continue;
      const auto completed_outer = e.step / g.shape.inner_folds;
      if (*e.layer == PruneLayer::threshold) {
        ++threshold_prunes;
        violations += e.step < first_threshold_step || completed_outer >= window_end;
      } else if (*e.layer == PruneLayer::comparison) {
        ++comparison_prunes;
        violations += e.step % g.shape.inner_folds != 0 || completed_outer < rung0;
      }
    }
  }
  // Default ASHA settings: rung 0 needs exactly 9 completed inner loops.
  violations += asha_rung_resource(0, AshaConfig{}) != 9;
  return {violations == 0, std::to_string(trials) + " trials, " + std::to_string(threshold_prunes) +
                               " threshold and " + std::to_string(comparison_prunes) + " comparison prunes, " +
                               std::to_string(violations) + " violations"};
}

Verdict criterion_semantic_immediacy() {
  int checked = 0, violations = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto g = reference_gen();
    g.trials = 40;
    g.zero_feature_prob = 0.5;
    g.seed = 500 + seed;
    const auto cohort = generate_cohort(g);
    for (const char* preset : {"semantic", "three-layer"}) {
      const auto report = run_study(cohort, preset_config(preset, reference_pruner()), 1);
      for (std::size_t i = 0; i < cohort.size(); ++i) {
        if (cohort[i].steps.front().selected_feature_count != 0) continue;
        ++checked;
        const auto& o = report.outcomes[i];
        violations += o.models_trained != 1 || o.layer != PruneLayer::semantic;
      }
    }
  }
  return {checked > 0 && violations == 0,
          std::to_string(checked) + " zero-feature trials, " + std::to_string(violations) + " not stopped at model 1"};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Verdict criterion_cli_determinism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "nestprune_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string tool = NESTPRUNE_TOOL;
  std::vector<std::string> outputs;
  bool commands_ok = true;
  for (int run = 0; run < 2; ++run) {
    const auto p = [&](const std::string& name) { return (dir / (name + std::to_string(run))).string(); };
    const std::string cmds[] = {
        tool + " gen --trials 40 --outer 30 --inner 10 --seed 42 --out " + p("traces.csv"),
        tool + " replay --traces " + p("traces.csv") +
            " --pruner three-layer --direction min --threshold 0.45 --extrapolation mean-dev --workers 1 --out " +
            p("study.json"),
        tool + " bench --reps 3 --trials 40 --seed 42 --threshold 0.45 --baseline asha --out " + p("bench.json"),
        tool + " report --in " + p("bench.json") + " --format csv --out " + p("bench.csv"),
    };
    for (const auto& cmd : cmds) commands_ok = commands_ok && std::system((cmd + " > /dev/null").c_str()) == 0;
    outputs.push_back(slurp(p("traces.csv")) + slurp(p("study.json")) + slurp(p("bench.json")) +
                      slurp(p("bench.csv")));
  }
  fs::remove_all(dir);
  const bool identical = outputs[0] == outputs[1] && !outputs[0].empty();
  return {commands_ok && identical, std::string("commands ") + (commands_ok ? "ok" : "FAILED") + ", outputs " +
                                        (identical ? "byte-identical" : "DIFFER") + " (" +
                                        std::to_string(outputs[0].size()) + " bytes)"};
}

Verdict criterion_direction_symmetry() {
  std::mt19937_64 rng(9009);
  std::uniform_int_distribution<int> pick(0, 3);
  std::uniform_real_distribution<double> thr(0.3, 0.7);
  const ExtrapolationMethod methods[] = {ExtrapolationMethod::none, ExtrapolationMethod::optimal_metric,
                                         ExtrapolationMethod::max_deviation, ExtrapolationMethod::mean_deviation};
  int trials = 0, mismatches = 0, prunes = 0;
  while (trials < 1000) {
    TraceGenConfig g;
    g.trials = 25;
    g.shape = {12 + pick(rng), 4 + pick(rng)};
    g.seed = rng();
    const auto cohort = generate_cohort(g);
    PrunerConfig cfg;
    cfg.threshold = thr(rng);
    cfg.extrapolation = methods[pick(rng)];
    cfg.optimal_value = 0.0;
    cfg.asha.min_early_stopping_rate = pick(rng) % 2;

    auto negated = cohort;
    for (auto& t : negated) {
      for (auto& s : t.steps) s.metric = -s.metric;
    }
    auto flipped = cfg;
    flipped.direction = flip(cfg.direction);
    flipped.threshold = -*cfg.threshold;
    flipped.optimal_value = -cfg.optimal_value;

    const auto a = replay_events(cohort, cfg);
    const auto b = replay_events(negated, flipped);
    for (std::size_t i = 0; i < a.size(); ++i) {
      mismatches += !(a[i] == b[i]);
      prunes += a[i].layer.has_value();
    }
    trials += static_cast<int>(cohort.size());
  }
  return {mismatches == 0, std::to_string(trials) + " trials (" + std::to_string(prunes) + " pruned), " +
                               std::to_string(mismatches) + " decision mismatches"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"C1 reference benchmark: >= 40% fewer models than ASHA, best preserved, < 60 s", criterion_reference_benchmark},
      {"C2 false-prune ordering across extrapolation methods", criterion_false_prune_ordering},
      {"C3 threshold decision vs brute-force oracle (10,000 cases)", criterion_threshold_oracle},
      {"C4 ASHA rung survivors vs brute-force oracle (1,000 populations)", criterion_asha_oracle},
      {"C5 trimmed mean / median vs brute force within 1 ulp (10,000 series)", criterion_robust_statistics},
      {"C6 activation window discipline", criterion_window_discipline},
      {"C7 semantic immediacy", criterion_semantic_immediacy},
      {"C8 gen/replay/bench byte-identical across runs", criterion_cli_determinism},
      {"C9 direction symmetry (1,000 trials)", criterion_direction_symmetry},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::cout << (v.pass ? "[PASS] " : "[FAIL] ") << name << " -- " << v.detail << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
