#include "nestprune/cli.hpp"

#include <fmt/format.h>

#include <CLI11.hpp>
#include <algorithm>
#include <fstream>
#include <ostream>

#include "nestprune/bench.hpp"
#include "nestprune/cv_engine.hpp"
#include "nestprune/errors.hpp"
#include "nestprune/json_io.hpp"
#include "nestprune/trace.hpp"

namespace nestprune {

namespace {

// Flags shared by gen and bench. Bound straight into a TraceGenConfig so the
// struct defaults are the flag defaults.
void add_generation_flags(CLI::App& cmd, TraceGenConfig& gen) {
  cmd.add_option("--outer", gen.shape.outer_folds, "Outer folds")->capture_default_str();
  cmd.add_option("--inner", gen.shape.inner_folds, "Inner folds")->capture_default_str();
  cmd.add_option("--noise-sd", gen.noise_sd, "Per-step Gaussian noise sd")->capture_default_str();
  cmd.add_option("--outlier-prob", gen.outlier_prob, "Per-step outlier probability")->capture_default_str();
  cmd.add_option("--outlier-mag", gen.outlier_magnitude, "Outlier magnitude")->capture_default_str();
  cmd.add_option("--zero-feature-prob", gen.zero_feature_prob, "Probability a trial selects no features")
      ->capture_default_str();
  cmd.add_option("--base-min", gen.base_min, "Lower bound of per-trial base metric")->capture_default_str();
  cmd.add_option("--base-max", gen.base_max, "Upper bound of per-trial base metric")->capture_default_str();
  cmd.add_flag("--symmetric-outliers", gen.symmetric_outliers, "Draw outlier sign at random");
}

struct PrunerFlags {
  PrunerConfig config;
  std::string direction = "min";
  std::string extrapolation{to_string(PrunerConfig{}.extrapolation)};
  double threshold = 0.0;
  CLI::Option* threshold_opt = nullptr;

  PrunerConfig resolve() {
    config.direction = parse_direction(direction);
    config.extrapolation = parse_extrapolation(extrapolation);
    if (threshold_opt->count() > 0) config.threshold = threshold;
    return config;
  }
};

void add_pruner_flags(CLI::App& cmd, PrunerFlags& f, bool direction_required) {
  auto* dir = cmd.add_option("--direction", f.direction, "Optimization direction: min|max")->capture_default_str();
  if (direction_required) dir->required();
  f.threshold_opt = cmd.add_option("--threshold", f.threshold, "Minimum acceptable metric");
  cmd.add_option("--extrapolation", f.extrapolation, "none|optimal|max-dev|mean-dev")->capture_default_str();
  cmd.add_option("--optimal", f.config.optimal_value, "Best attainable metric value")->capture_default_str();
  cmd.add_option("--trim", f.config.trim_fraction, "Trim fraction per tail")->capture_default_str();
  cmd.add_option("--window-fraction", f.config.threshold_window_fraction,
                 "Fraction of outer iterations the threshold layer is active")
      ->capture_default_str();
  cmd.add_option("--min-threshold-steps", f.config.min_threshold_steps, "Earliest threshold step (>= 4)")
      ->capture_default_str();
  cmd.add_option("--min-resource", f.config.asha.min_resource, "ASHA min resource (completed inner loops)")
      ->capture_default_str();
  cmd.add_option("--reduction-factor", f.config.asha.reduction_factor, "ASHA reduction factor")
      ->capture_default_str();
  cmd.add_option("--min-early-stopping-rate", f.config.asha.min_early_stopping_rate, "ASHA min early stopping rate")
      ->capture_default_str();
  cmd.add_option("--bootstrap-count", f.config.asha.bootstrap_count, "ASHA bootstrap count")->capture_default_str();
}

std::string format_optional(const std::optional<double>& v) { return v ? fmt::format("{:.6f}", *v) : "-"; }

void print_study(const StudyReport& r, std::ostream& out) {
  out << fmt::format("{:<12} {:<10} {:<11} {:>8} {:>12}\n", "trial", "status", "layer", "models", "value");
  for (const auto& o : r.outcomes) {
    out << fmt::format("{:<12} {:<10} {:<11} {:>8} {:>12}\n", o.trial_id, to_string(o.status),
                       o.layer ? to_string(*o.layer) : "-", o.models_trained, format_optional(o.reported_value));
  }
  out << fmt::format("trials {}  models {}  completed {}  semantic {}  threshold {}  comparison {}  workers {}\n",
                     r.outcomes.size(), r.total_models, r.completed, r.pruned_semantic, r.pruned_threshold,
                     r.pruned_comparison, r.workers);
  out << fmt::format("best {} {}\n", r.best_trial.value_or("-"), format_optional(r.best_value));
}

void print_bench(const BenchReport& r, std::ostream& out) {
  out << fmt::format("{} repetitions x {} trials, shape {}x{}, baseline '{}'\n", r.repetitions, r.trials_per_rep,
                     r.shape.outer_folds, r.shape.inner_folds, r.baseline);
  out << fmt::format("{:<16} {:>10} {:>12} {:>10} {:>9} {:>9} {:>9} {:>8} {:>6}\n", "variant", "models", "mean+-sd",
                     "saved%", "semantic", "thresh", "compar", "false", "best");
  for (const auto& v : r.variants) {
    out << fmt::format("{:<16} {:>10} {:>12} {:>10.2f} {:>9} {:>9} {:>9} {:>8} {:>6}\n", v.name, v.total_models,
                       fmt::format("{:.0f}+-{:.0f}", v.mean_models, v.stddev_models), v.percent_saved,
                       v.pruned_semantic, v.pruned_threshold, v.pruned_comparison, v.falsely_pruned,
                       v.best_preserved_all ? "yes" : "NO");
  }
}

void write_text_file(const std::string& path, const auto& writer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  writer(out);
  out.flush();
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Three-layer pruning engine and trace-driven benchmark for nested-CV hyperparameter optimization",
               "nestprune"};
  app.require_subcommand(1);

  // gen
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic cohort trace file");
  TraceGenConfig gen;
  std::string gen_out;
  std::string gen_direction = "min";
  bool gen_per_trial = false;
  gen_cmd->add_option("--trials", gen.trials, "Number of trials")->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "Random seed")->capture_default_str();
  gen_cmd->add_option("--out", gen_out, "Output CSV file (or directory with --per-trial)")->required();
  gen_cmd->add_option("--direction", gen_direction, "Metric direction: min|max")->capture_default_str();
  gen_cmd->add_flag("--per-trial", gen_per_trial, "Write one file per trial into the --out directory");
  add_generation_flags(*gen_cmd, gen);

  // replay
  auto* replay_cmd = app.add_subcommand("replay", "Replay traces through a pruner");
  PrunerFlags replay_flags;
  std::string replay_traces;
  std::string replay_pruner;
  std::string replay_out;
  int replay_workers = 1;
  replay_cmd->add_option("--traces", replay_traces, "Trace CSV file or directory")->required();
  replay_cmd->add_option("--pruner", replay_pruner, "none|asha|semantic|threshold|three-layer")->required();
  replay_cmd->add_option("--workers", replay_workers, "Concurrent trial workers")->capture_default_str();
  replay_cmd->add_option("--out", replay_out, "Write the study report as JSON");
  add_pruner_flags(*replay_cmd, replay_flags, false);

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "Compare pruner variants over repeated studies");
  BenchConfig bench;
  PrunerFlags bench_flags;
  std::string bench_traces;
  std::string bench_variants;
  std::string bench_out;
  std::string bench_format = "json";
  bool require_best = false;
  bench_cmd->add_option("--reps", bench.repetitions, "Repetitions")->capture_default_str();
  bench_cmd->add_option("--trials", bench.trials_per_rep, "Trials per repetition")->capture_default_str();
  bench_cmd->add_option("--seed", bench.base_seed, "Base seed; repetition r uses seed + r")->capture_default_str();
  bench_cmd->add_option("--traces", bench_traces, "Replay this cohort in every repetition instead of generating");
  bench_cmd->add_option("--baseline", bench.baseline, "Variant that percent-saved is measured against")
      ->capture_default_str();
  bench_cmd->add_option("--variants", bench_variants, "JSON variant file (default: asha and three-layer)");
  bench_cmd->add_option("--out", bench_out, "Report output path");
  bench_cmd->add_option("--format", bench_format, "Report format: json|csv")->capture_default_str();
  bench_cmd->add_option("--workers", bench.workers, "Workers inside each study")->capture_default_str();
  bench_cmd->add_option("--threads", bench.threads, "Threads across repetitions (0 = all)")->capture_default_str();
  bench_cmd->add_flag("--require-best-preserved", require_best,
                      "Exit 2 if a non-baseline variant loses the best trial in any repetition");
  add_generation_flags(*bench_cmd, bench.gen);
  add_pruner_flags(*bench_cmd, bench_flags, false);

  // report
  auto* report_cmd = app.add_subcommand("report", "Convert a bench report between formats");
  std::string report_in;
  std::string report_out;
  std::string report_format = "csv";
  report_cmd->add_option("--in", report_in, "Input report JSON")->required();
  report_cmd->add_option("--format", report_format, "Output format: json|csv")->capture_default_str();
  report_cmd->add_option("--out", report_out, "Output path")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (*gen_cmd) {
      gen.direction = parse_direction(gen_direction);
      const auto cohort = generate_cohort(gen);
      if (gen_per_trial) {
        write_traces_per_trial(cohort, gen_out);
      } else {
        write_traces(cohort, std::filesystem::path(gen_out));
      }
      out << fmt::format("wrote {} trials ({}x{}) to {}\n", cohort.size(), gen.shape.outer_folds,
                         gen.shape.inner_folds, gen_out);
      return kExitOk;
    }

    if (*replay_cmd) {
      const auto config = preset_config(replay_pruner, replay_flags.resolve());
      config.validate();
      if (replay_workers < 1) throw ValidationError("--workers must be >= 1");
      const auto cohort = read_traces(std::filesystem::path(replay_traces));
      const auto report = run_study(cohort, config, replay_workers);
      print_study(report, out);
      if (!replay_out.empty()) {
        write_text_file(replay_out, [&](std::ostream& o) { write_study_report_json(report, o); });
      }
      return kExitOk;
    }

    if (*bench_cmd) {
      const auto base = bench_flags.resolve();
      const auto format = parse_report_format(bench_format);
      bench.gen.direction = base.direction;
      if (bench_variants.empty()) {
        bench.variants = {{"asha", preset_config("asha", base)}, {"three-layer", preset_config("three-layer", base)}};
      } else {
        bench.variants = read_variants(bench_variants, base);
      }
      if (!bench_traces.empty()) bench.fixed_cohort = read_traces(std::filesystem::path(bench_traces));
      bench.validate();
      const auto report = compare_pruners(bench);
      print_bench(report, out);
      if (!bench_out.empty()) emit_report(report, format, bench_out);
      if (require_best) {
        for (const auto& v : report.variants) {
          if (v.name != report.baseline && !v.best_preserved_all) {
            err << "variant '" << v.name << "' pruned the best trial in at least one repetition\n";
            return kExitBestNotPreserved;
          }
        }
      }
      return kExitOk;
    }

    if (*report_cmd) {
      const auto format = parse_report_format(report_format);
      const auto report = read_report_json(std::filesystem::path(report_in));
      emit_report(report, format, report_out);
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}

}  // namespace nestprune
