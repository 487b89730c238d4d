#include "nestprune/cv_engine.hpp"

#include <fmt/format.h>

#include <cmath>
#include <exception>

#include "nestprune/errors.hpp"

namespace nestprune {

std::string_view to_string(TrialStatus status) noexcept {
  switch (status) {
    case TrialStatus::running:
      return "running";
    case TrialStatus::completed:
      return "completed";
    case TrialStatus::pruned:
      return "pruned";
  }
  return "running";
}

StudyState::StudyState(CvShape shape, PrunerConfig config) : shape_(shape), config_(std::move(config)) {
  shape_.validate();
  config_.validate();
}

void StudyState::begin_trial(const TrialId& id) {
  std::lock_guard lock(trials_mutex_);
  if (!trials_.try_emplace(id).second) throw InvalidStateError("trial '" + id + "' already in study");
}

TrialRuntimeState& StudyState::find_trial(const TrialId& id) {
  std::lock_guard lock(trials_mutex_);
  const auto it = trials_.find(id);
  if (it == trials_.end()) throw InvalidStateError("unknown trial '" + id + "'");
  return it->second;
}

const TrialRuntimeState& StudyState::find_trial(const TrialId& id) const {
  std::lock_guard lock(trials_mutex_);
  const auto it = trials_.find(id);
  if (it == trials_.end()) throw InvalidStateError("unknown trial '" + id + "'");
  return it->second;
}

Decision StudyState::report(const StepRecord& step) {
  // Map nodes are stable; only this trial's worker touches the state.
  auto& trial = find_trial(step.trial_id);
  if (trial.status != TrialStatus::running) {
    throw InvalidStateError(fmt::format("trial '{}' is already {}", step.trial_id, to_string(trial.status)));
  }
  const auto inner = static_cast<std::int64_t>(shape_.inner_folds);
  const auto expected_outer = trial.steps_observed / inner;
  const auto expected_inner = trial.steps_observed % inner;
  if (step.outer_idx != expected_outer || step.inner_idx != expected_inner) {
    throw InvalidStateError(fmt::format("trial '{}': got step ({}, {}), next expected is ({}, {})", step.trial_id,
                                        step.outer_idx, step.inner_idx, expected_outer, expected_inner));
  }
  if (!std::isfinite(step.metric)) throw PreconditionError("trial '" + step.trial_id + "': non-finite metric");

  trial.observed_metrics.push_back(step.metric);
  ++trial.steps_observed;
  trial.completed_inner_loops = trial.steps_observed / inner;

  auto finish_pruned = [&](const Decision& d) {
    trial.status = TrialStatus::pruned;
    trial.decision = d;
    return d;
  };

  if (trial.steps_observed == shape_.total_steps()) {
    trial.status = TrialStatus::completed;
    return trial.decision;
  }

  if (config_.semantic_enabled) {
    if (auto d = semantic_decide(step); d.is_pruned()) return finish_pruned(d);
  }
  if (config_.threshold_enabled &&
      threshold_window_active(trial.steps_observed, trial.completed_inner_loops, shape_, config_)) {
    const auto missing = (inner - trial.steps_observed % inner) % inner;
    if (auto d = threshold_decide(trial.observed_metrics, missing, config_); d.is_pruned()) return finish_pruned(d);
  }
  if (config_.comparison_enabled && trial.steps_observed % inner == 0) {
    const auto value = intermediate_value(trial.observed_metrics, config_.trim_fraction);
    Decision d;
    {
      std::lock_guard lock(rungs_mutex_);
      d = asha_record_and_decide(rungs_, step.trial_id, trial.completed_inner_loops, value.value(),
                                 config_.direction, config_.asha);
    }
    if (d.is_pruned()) return finish_pruned(d);
  }
  return Decision::keep();
}

Decision StudyState::decision(const TrialId& id) const { return find_trial(id).decision; }

TrialRuntimeState StudyState::trial_state(const TrialId& id) const { return find_trial(id); }

RungTable StudyState::rungs() const {
  std::lock_guard lock(rungs_mutex_);
  return rungs_;
}

Decision combined_decide(StudyState& study, const StepRecord& step) { return study.report(step); }

TrialOutcome run_trial(StudyState& study, const TrialTrace& trace) {
  trace.validate();
  if (!(trace.shape == study.shape())) {
    throw FormatError(fmt::format("trial '{}' has shape {}x{}, study uses {}x{}", trace.trial_id,
                                  trace.shape.outer_folds, trace.shape.inner_folds, study.shape().outer_folds,
                                  study.shape().inner_folds));
  }
  study.begin_trial(trace.trial_id);

  TrialOutcome outcome;
  outcome.trial_id = trace.trial_id;
  for (const auto& step : trace.steps) {
    const auto d = study.report(step);
    if (d.is_pruned()) {
      outcome.status = TrialStatus::pruned;
      outcome.layer = d.layer();
      outcome.reported_value = d.reported_value();
      break;
    }
  }
  const auto state = study.trial_state(trace.trial_id);
  outcome.models_trained = state.models_trained();
  if (state.status == TrialStatus::completed) {
    outcome.status = TrialStatus::completed;
    outcome.reported_value = trimmed_mean(state.observed_metrics, study.config().trim_fraction);
  }
  return outcome;
}

StudyReport run_study(const Cohort& cohort, const PrunerConfig& config, int workers) {
  if (workers < 1) throw ValidationError("workers must be >= 1");
  validate_cohort(cohort);

  StudyState study(cohort.front().shape, config);
  StudyReport report;
  report.shape = cohort.front().shape;
  report.workers = workers;
  report.outcomes.resize(cohort.size());

  if (workers == 1) {
    for (std::size_t i = 0; i < cohort.size(); ++i) report.outcomes[i] = run_trial(study, cohort[i]);
  } else {
    std::exception_ptr failure;
    const auto n = static_cast<std::ptrdiff_t>(cohort.size());
#pragma omp parallel for num_threads(workers) schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      try {
        report.outcomes[static_cast<std::size_t>(i)] = run_trial(study, cohort[static_cast<std::size_t>(i)]);
      } catch (...) {
#pragma omp critical(nestprune_study_failure)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  }

  for (const auto& o : report.outcomes) {
    report.total_models += o.models_trained;
    if (o.status == TrialStatus::completed) {
      ++report.completed;
      if (!report.best_value || strictly_better(*o.reported_value, *report.best_value, config.direction)) {
        report.best_trial = o.trial_id;
        report.best_value = o.reported_value;
      }
    } else if (o.layer) {
      switch (*o.layer) {
        case PruneLayer::semantic:
          ++report.pruned_semantic;
          break;
        case PruneLayer::threshold:
          ++report.pruned_threshold;
          break;
        case PruneLayer::comparison:
          ++report.pruned_comparison;
          break;
      }
    }
  }
  return report;
}

double full_objective(const TrialTrace& trace, double trim_fraction) {
  trace.validate();
  return trimmed_mean(trace.metrics(), trim_fraction);
}

}  // namespace nestprune
