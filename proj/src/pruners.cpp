#include "nestprune/pruners.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "nestprune/errors.hpp"

namespace nestprune {

namespace {

std::optional<std::int64_t> checked_rung_resource(int rung, const AshaConfig& config) {
  std::int64_t out = config.min_resource;
  const int exponent = config.min_early_stopping_rate + rung;
  for (int i = 0; i < exponent; ++i) {
    if (__builtin_mul_overflow(out, static_cast<std::int64_t>(config.reduction_factor), &out)) {
      return std::nullopt;
    }
  }
  return out;
}

// ceil(fraction * n) with slack for fractions like 1/3 that are not exact in binary.
std::int64_t fractional_ceil(double fraction, int n) {
  return static_cast<std::int64_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
}

}  // namespace

void CvShape::validate() const {
  if (outer_folds < 2) throw ValidationError("outer folds must be >= 2, got " + std::to_string(outer_folds));
  if (inner_folds < 2) throw ValidationError("inner folds must be >= 2, got " + std::to_string(inner_folds));
}

std::string_view to_string(PruneLayer layer) noexcept {
  switch (layer) {
    case PruneLayer::semantic:
      return "semantic";
    case PruneLayer::threshold:
      return "threshold";
    case PruneLayer::comparison:
      return "comparison";
  }
  return "semantic";
}

void AshaConfig::validate() const {
  if (min_resource < 1) throw ValidationError("min_resource must be >= 1");
  if (reduction_factor < 2) throw ValidationError("reduction_factor must be >= 2");
  if (min_early_stopping_rate < 0) throw ValidationError("min_early_stopping_rate must be >= 0");
  if (bootstrap_count < 0) throw ValidationError("bootstrap_count must be >= 0");
}

void PrunerConfig::validate() const {
  if (!(trim_fraction >= 0.0 && trim_fraction < 0.5)) {
    throw ValidationError("trim fraction must lie in [0, 0.5)");
  }
  if (min_threshold_steps < 4) throw ValidationError("min_threshold_steps must be >= 4");
  if (!(threshold_window_fraction > 0.0 && threshold_window_fraction <= 1.0)) {
    throw ValidationError("threshold window fraction must lie in (0, 1]");
  }
  if (!std::isfinite(optimal_value)) throw ValidationError("optimal value must be finite");
  if (threshold && !std::isfinite(*threshold)) throw ValidationError("threshold must be finite");
  if (threshold_enabled && !threshold) {
    throw ValidationError("threshold layer enabled but no threshold given");
  }
  asha.validate();
}

PrunerConfig preset_config(std::string_view name, PrunerConfig base) {
  auto set = [&](bool semantic, bool threshold, bool comparison) {
    base.semantic_enabled = semantic;
    base.threshold_enabled = threshold;
    base.comparison_enabled = comparison;
    return base;
  };
  if (name == "none") return set(false, false, false);
  if (name == "asha") return set(false, false, true);
  if (name == "semantic") return set(true, false, false);
  if (name == "threshold") return set(false, true, false);
  if (name == "three-layer") return set(true, true, true);
  throw ValidationError("unknown pruner '" + std::string(name) +
                        "' (expected none|asha|semantic|threshold|three-layer)");
}

Decision Decision::pruned(PruneLayer layer, std::optional<double> reported_value) {
  if ((layer == PruneLayer::semantic) == reported_value.has_value()) {
    throw InvariantError("semantic prunes carry no reported value; other layers must carry one");
  }
  Decision d;
  d.layer_ = layer;
  d.reported_ = reported_value;
  return d;
}

void RungTable::record(int rung, const TrialId& trial, double value) {
  auto& at_rung = rungs_[rung];
  if (!at_rung.emplace(trial, value).second) {
    throw InvariantError("trial '" + trial + "' already recorded at rung " + std::to_string(rung));
  }
}

bool RungTable::contains(int rung, const TrialId& trial) const {
  const auto it = rungs_.find(rung);
  return it != rungs_.end() && it->second.contains(trial);
}

std::vector<double> RungTable::values(int rung) const {
  std::vector<double> out;
  if (const auto it = rungs_.find(rung); it != rungs_.end()) {
    out.reserve(it->second.size());
    for (const auto& [id, v] : it->second) out.push_back(v);
  }
  return out;
}

std::size_t RungTable::size(int rung) const {
  const auto it = rungs_.find(rung);
  return it == rungs_.end() ? 0 : it->second.size();
}

Decision semantic_decide(const StepRecord& step) {
  if (step.selected_feature_count < 0) {
    throw PreconditionError("selected feature count must be >= 0");
  }
  return step.selected_feature_count == 0 ? Decision::pruned(PruneLayer::semantic, std::nullopt)
                                          : Decision::keep();
}

bool threshold_window_active(std::int64_t steps_observed, std::int64_t completed_outer, const CvShape& shape,
                             const PrunerConfig& config) {
  const std::int64_t half_inner = (shape.inner_folds + 1) / 2;
  const std::int64_t first_step = std::max<std::int64_t>(config.min_threshold_steps, half_inner);
  return steps_observed >= first_step &&
         completed_outer < fractional_ceil(config.threshold_window_fraction, shape.outer_folds);
}

double composite_estimate(double median_value, double extrapolated, std::int64_t observed_steps,
                          std::int64_t missing_steps) {
  if (observed_steps < 1 || missing_steps < 0) {
    throw PreconditionError("composite estimate needs s >= 1 and m >= 0");
  }
  const auto s = static_cast<double>(observed_steps);
  const auto m = static_cast<double>(missing_steps);
  return (median_value * s + extrapolated * m) / (s + m);
}

Decision threshold_decide(std::span<const double> observed, std::int64_t missing_steps,
                          const PrunerConfig& config) {
  if (!config.threshold) throw PreconditionError("threshold_decide requires a threshold");
  const double centre = median(observed);
  const double e = extrapolate(observed, config.direction, config.extrapolation, config.optimal_value);
  const double c = composite_estimate(centre, e, static_cast<std::int64_t>(observed.size()), missing_steps);
  if (strictly_better(*config.threshold, c, config.direction)) {
    return Decision::pruned(PruneLayer::threshold, reported_value_on_prune(observed, config.trim_fraction));
  }
  return Decision::keep();
}

std::optional<double> intermediate_value(std::span<const double> completed_loop_metrics, double trim_fraction) {
  if (completed_loop_metrics.empty()) return std::nullopt;
  return trimmed_mean(completed_loop_metrics, trim_fraction);
}

std::int64_t asha_rung_resource(int rung, const AshaConfig& config) {
  if (rung < 0) throw PreconditionError("rung index must be >= 0");
  const auto out = checked_rung_resource(rung, config);
  if (!out) throw ValidationError("rung " + std::to_string(rung) + " resource overflows a 64-bit integer");
  return *out;
}

Decision asha_record_and_decide(RungTable& rungs, const TrialId& trial, std::int64_t resource, double value,
                                Direction direction, const AshaConfig& config) {
  for (int rung = 0;; ++rung) {
    const auto needed = checked_rung_resource(rung, config);
    if (!needed || *needed > resource) break;
    if (rungs.contains(rung, trial)) continue;

    rungs.record(rung, trial, value);
    auto competing = rungs.values(rung);
    const auto n = competing.size();
    if (n < static_cast<std::size_t>(config.bootstrap_count)) return Decision::keep();

    const auto keep = (n + config.reduction_factor - 1) / static_cast<std::size_t>(config.reduction_factor);
    const auto cutoff = competing.begin() + static_cast<std::ptrdiff_t>(keep - 1);
    if (direction == Direction::minimize) {
      std::nth_element(competing.begin(), cutoff, competing.end());
    } else {
      std::nth_element(competing.begin(), cutoff, competing.end(), std::greater<>{});
    }
    if (strictly_better(*cutoff, value, direction)) {
      return Decision::pruned(PruneLayer::comparison, value);
    }
  }
  return Decision::keep();
}

double reported_value_on_prune(std::span<const double> observed, double trim_fraction) {
  if (observed.empty()) throw PreconditionError("reported value needs at least one observation");
  return observed.size() >= 5 ? trimmed_mean(observed, trim_fraction) : median(observed);
}

}  // namespace nestprune
