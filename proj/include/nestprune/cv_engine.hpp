#pragma once

// Drives trials through the nested-CV step grid. StudyState is the shared
// object that trial workers report into; report() is the combined three-layer
// decision for one step.

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string_view>
#include <vector>

#include "nestprune/pruners.hpp"
#include "nestprune/trace.hpp"

namespace nestprune {

enum class TrialStatus { running, completed, pruned };

std::string_view to_string(TrialStatus status) noexcept;

struct TrialRuntimeState {
  std::int64_t steps_observed = 0;
  std::int64_t completed_inner_loops = 0;
  std::vector<double> observed_metrics;
  TrialStatus status = TrialStatus::running;
  // Final decision once the trial left the running state.
  Decision decision;

  [[nodiscard]] std::int64_t models_trained() const noexcept { return steps_observed; }
};

// Thread-safe as long as each trial is reported by a single worker in step
// order. Rung recording and ranking happen under one lock, so every ASHA
// decision sees a consistent snapshot.
class StudyState {
 public:
  StudyState(CvShape shape, PrunerConfig config);

  StudyState(const StudyState&) = delete;
  StudyState& operator=(const StudyState&) = delete;

  [[nodiscard]] const CvShape& shape() const noexcept { return shape_; }
  [[nodiscard]] const PrunerConfig& config() const noexcept { return config_; }

  // Throws InvalidStateError if the id is already registered.
  void begin_trial(const TrialId& id);

  // Consumes the trial's next step and returns the combined decision.
  // Throws InvalidStateError for unknown or finished trials and for steps out
  // of nested-CV order.
  Decision report(const StepRecord& step);

  // Latest decision for the trial: Continue while running, the frozen prune
  // decision afterwards.
  [[nodiscard]] Decision decision(const TrialId& id) const;
  // Copy of the trial's runtime state.
  [[nodiscard]] TrialRuntimeState trial_state(const TrialId& id) const;
  // Copy of the rung table.
  [[nodiscard]] RungTable rungs() const;

 private:
  TrialRuntimeState& find_trial(const TrialId& id);
  const TrialRuntimeState& find_trial(const TrialId& id) const;

  CvShape shape_;
  PrunerConfig config_;
  mutable std::mutex trials_mutex_;
  std::map<TrialId, TrialRuntimeState> trials_;
  mutable std::mutex rungs_mutex_;
  RungTable rungs_;
};

// Free-function spelling of StudyState::report.
Decision combined_decide(StudyState& study, const StepRecord& step);

struct TrialOutcome {
  TrialId trial_id;
  TrialStatus status = TrialStatus::running;
  std::optional<PruneLayer> layer;
  std::int64_t models_trained = 0;
  // Trimmed mean of the full run for completed trials, the prune report
  // otherwise (absent for semantic prunes).
  std::optional<double> reported_value;

  friend bool operator==(const TrialOutcome&, const TrialOutcome&) = default;
};

struct StudyReport {
  CvShape shape;
  int workers = 1;
  std::vector<TrialOutcome> outcomes;  // cohort order
  std::int64_t total_models = 0;
  std::int64_t completed = 0;
  std::int64_t pruned_semantic = 0;
  std::int64_t pruned_threshold = 0;
  std::int64_t pruned_comparison = 0;
  // Best completed trial by final value in the study direction.
  std::optional<TrialId> best_trial;
  std::optional<double> best_value;

  friend bool operator==(const StudyReport&, const StudyReport&) = default;
};

// Replays one trace through the study. Throws FormatError on a malformed trace.
TrialOutcome run_trial(StudyState& study, const TrialTrace& trace);

// Runs the cohort through one shared StudyState. workers == 1 replays in
// cohort order and is fully deterministic; workers > 1 runs trials
// concurrently, so ASHA outcomes may depend on arrival order.
StudyReport run_study(const Cohort& cohort, const PrunerConfig& config, int workers = 1);

// Trimmed mean over every metric of a complete trace.
double full_objective(const TrialTrace& trace, double trim_fraction);

}  // namespace nestprune
