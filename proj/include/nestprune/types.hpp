#pragma once

#include <cstdint>
#include <string>

namespace nestprune {

using TrialId = std::string;

// Geometry of a nested cross-validation: one trained model per (outer, inner) cell.
struct CvShape {
  int outer_folds = 0;
  int inner_folds = 0;

  [[nodiscard]] std::int64_t total_steps() const noexcept {
    return static_cast<std::int64_t>(outer_folds) * inner_folds;
  }
  // Throws ValidationError unless both fold counts are >= 2.
  void validate() const;

  friend bool operator==(const CvShape&, const CvShape&) = default;
};

// Validation outcome of one trained model.
struct StepRecord {
  TrialId trial_id;
  int outer_idx = 0;
  int inner_idx = 0;
  double metric = 0.0;
  int selected_feature_count = 0;

  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

}  // namespace nestprune
