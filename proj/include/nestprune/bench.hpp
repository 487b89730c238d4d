#pragma once

// Repeated-study evaluation harness: every repetition draws one cohort and runs
// it under every pruner variant, so variants compare on identical data.
//
// compare_pruners() runs repetitions in parallel with OpenMP;
// compare_pruners_serial() is the reference loop it must agree with exactly.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nestprune/cv_engine.hpp"
#include "nestprune/trace.hpp"

namespace nestprune {

struct PrunerVariant {
  std::string name;
  PrunerConfig config;

  friend bool operator==(const PrunerVariant&, const PrunerVariant&) = default;
};

struct BenchConfig {
  int repetitions = 30;
  int trials_per_rep = 40;
  std::vector<PrunerVariant> variants;
  // Name of the variant percent-saved is measured against.
  std::string baseline = "asha";
  // Synthetic source; `seed` is replaced by base_seed + rep and `trials` by
  // trials_per_rep.
  TraceGenConfig gen;
  // When set, every repetition replays this cohort instead of generating one.
  std::optional<Cohort> fixed_cohort;
  std::uint64_t base_seed = 42;
  // Workers inside each study; acceptance runs use 1.
  int workers = 1;
  // OpenMP threads across repetitions (0 = runtime default).
  int threads = 0;

  void validate() const;
  [[nodiscard]] CvShape shape() const;
};

struct FalsePruneRecord {
  int rep = 0;
  TrialId trial_id;
  double full_objective = 0.0;
  double threshold = 0.0;
  double margin = 0.0;

  friend bool operator==(const FalsePruneRecord&, const FalsePruneRecord&) = default;
};

struct RepetitionResult {
  int rep = 0;
  std::int64_t models_trained = 0;
  std::int64_t completed = 0;
  std::int64_t pruned_semantic = 0;
  std::int64_t pruned_threshold = 0;
  std::int64_t pruned_comparison = 0;
  std::int64_t falsely_pruned = 0;
  // Largest margin among this repetition's false prunes.
  std::optional<double> max_margin;
  // Whether the trial with the best full objective ran to completion.
  bool best_preserved = false;
  TrialId true_best;

  friend bool operator==(const RepetitionResult&, const RepetitionResult&) = default;
};

struct VariantReport {
  std::string name;
  PrunerConfig config;
  std::vector<RepetitionResult> reps;
  std::vector<FalsePruneRecord> false_prunes;
  std::int64_t total_models = 0;
  std::int64_t completed = 0;
  std::int64_t pruned_semantic = 0;
  std::int64_t pruned_threshold = 0;
  std::int64_t pruned_comparison = 0;
  std::int64_t falsely_pruned = 0;
  double mean_models = 0.0;
  // Sample standard deviation of per-repetition models_trained (0 for one rep).
  double stddev_models = 0.0;
  // 100 * (1 - total_models / baseline total_models).
  double percent_saved = 0.0;
  bool best_preserved_all = false;

  friend bool operator==(const VariantReport&, const VariantReport&) = default;
};

struct BenchReport {
  int repetitions = 0;
  int trials_per_rep = 0;
  CvShape shape;
  std::uint64_t base_seed = 0;
  std::string baseline;
  int workers = 1;
  // "synthetic" or "traces".
  std::string source;
  std::vector<VariantReport> variants;

  [[nodiscard]] const VariantReport& variant(const std::string& name) const;

  friend bool operator==(const BenchReport&, const BenchReport&) = default;
};

// Threshold-layer prunes whose full objective beats the variant's threshold.
std::vector<FalsePruneRecord> classify_false_prunes(const std::vector<TrialOutcome>& outcomes, const Cohort& cohort,
                                                    const PrunerConfig& config, int rep = 0);

BenchReport compare_pruners(const BenchConfig& bench);
BenchReport compare_pruners_serial(const BenchConfig& bench);

enum class ReportFormat { json, csv };

ReportFormat parse_report_format(std::string_view text);

void write_report_json(const BenchReport& report, std::ostream& out);
void write_report_csv(const BenchReport& report, std::ostream& out);
BenchReport read_report_json(std::istream& in);
BenchReport read_report_json(const std::filesystem::path& path);
// Throws IoError if `path` cannot be written.
void emit_report(const BenchReport& report, ReportFormat format, const std::filesystem::path& path);

}  // namespace nestprune
