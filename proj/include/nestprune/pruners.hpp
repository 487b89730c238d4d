#pragma once

// The three pruning layers (semantic, extrapolating threshold, asynchronous
// successive halving) as standalone decision functions. StudyState in
// cv_engine.hpp combines them per step.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "nestprune/metrics.hpp"
#include "nestprune/types.hpp"

namespace nestprune {

enum class PruneLayer { semantic, threshold, comparison };

std::string_view to_string(PruneLayer layer) noexcept;

struct AshaConfig {
  // Completed inner loops needed before rung 0 (scaled by the stopping-rate delay).
  std::int64_t min_resource = 1;
  int reduction_factor = 3;
  int min_early_stopping_rate = 2;
  int bootstrap_count = 0;

  void validate() const;
  friend bool operator==(const AshaConfig&, const AshaConfig&) = default;
};

struct PrunerConfig {
  Direction direction = Direction::minimize;
  // Minimum acceptable metric. Required when the threshold layer is enabled.
  std::optional<double> threshold;
  ExtrapolationMethod extrapolation = ExtrapolationMethod::mean_deviation;
  // Best attainable metric, used by ExtrapolationMethod::optimal_metric (0 for logloss).
  double optimal_value = 0.0;
  double trim_fraction = 0.2;
  int min_threshold_steps = 4;
  // Threshold layer stays active while completed outer iterations are below
  // ceil(threshold_window_fraction * outer_folds).
  double threshold_window_fraction = 1.0 / 3.0;
  AshaConfig asha;
  bool semantic_enabled = true;
  bool threshold_enabled = true;
  bool comparison_enabled = true;

  void validate() const;
  friend bool operator==(const PrunerConfig&, const PrunerConfig&) = default;
};

// Layer presets used by the CLI and bench variants:
// none | asha | semantic | threshold | three-layer.
PrunerConfig preset_config(std::string_view name, PrunerConfig base = {});

class Decision {
 public:
  static Decision keep() noexcept { return Decision{}; }
  static Decision pruned(PruneLayer layer, std::optional<double> reported_value);

  [[nodiscard]] bool is_pruned() const noexcept { return layer_.has_value(); }
  // Only meaningful when is_pruned().
  [[nodiscard]] PruneLayer layer() const { return layer_.value(); }
  [[nodiscard]] std::optional<double> reported_value() const noexcept { return reported_; }

  friend bool operator==(const Decision&, const Decision&) = default;

 private:
  std::optional<PruneLayer> layer_;
  std::optional<double> reported_;
};

// Per-rung record of intermediate values. Append-only; each trial appears at
// most once per rung. Not synchronised; StudyState guards it.
class RungTable {
 public:
  // Throws InvariantError if the trial already holds a value at `rung`.
  void record(int rung, const TrialId& trial, double value);
  [[nodiscard]] bool contains(int rung, const TrialId& trial) const;
  // Recorded values at `rung` (any order). Empty for untouched rungs.
  [[nodiscard]] std::vector<double> values(int rung) const;
  [[nodiscard]] std::size_t size(int rung) const;
  [[nodiscard]] const std::map<int, std::map<TrialId, double>>& rungs() const noexcept { return rungs_; }

 private:
  std::map<int, std::map<TrialId, double>> rungs_;
};

Decision semantic_decide(const StepRecord& step);

// Whether the threshold layer may act after `steps_observed` models with
// `completed_outer` finished outer iterations.
bool threshold_window_active(std::int64_t steps_observed, std::int64_t completed_outer, const CvShape& shape,
                             const PrunerConfig& config);

// Weighted completion estimate (median * s + e * m) / (s + m).
double composite_estimate(double median_value, double extrapolated, std::int64_t observed_steps,
                          std::int64_t missing_steps);

// Threshold test over all metrics observed so far; `missing_steps`
// counts the steps left in the current inner loop.
Decision threshold_decide(std::span<const double> observed, std::int64_t missing_steps,
                          const PrunerConfig& config);

// Trimmed mean over the pooled metrics of completed inner loops; nullopt if none.
std::optional<double> intermediate_value(std::span<const double> completed_loop_metrics, double trim_fraction);

// Completed inner loops required to reach `rung`.
std::int64_t asha_rung_resource(int rung, const AshaConfig& config);

// Records `value` at every newly reached rung and prunes at the first rung the
// trial fails to survive.
Decision asha_record_and_decide(RungTable& rungs, const TrialId& trial, std::int64_t resource, double value,
                                Direction direction, const AshaConfig& config);

// Objective handed back when a trial is pruned: trimmed mean for >= 5
// observations, median below that.
double reported_value_on_prune(std::span<const double> observed, double trim_fraction);

}  // namespace nestprune
