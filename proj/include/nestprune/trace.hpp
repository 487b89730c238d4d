#pragma once

// Synthetic metric traces and the trace CSV format:
//
//   trial_id,outer_fold,inner_fold,metric,n_selected_features
//
// One row per trained model, LF line endings, rows of one trial contiguous and
// in row-major (outer-major, inner-minor) order. Additional trailing columns
// are accepted on read and ignored.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "nestprune/metrics.hpp"
#include "nestprune/types.hpp"

namespace nestprune {

struct TrialTrace {
  TrialId trial_id;
  CvShape shape;
  std::vector<StepRecord> steps;

  [[nodiscard]] std::vector<double> metrics() const;
  // Throws FormatError unless steps cover the full grid in row-major order.
  void validate() const;

  friend bool operator==(const TrialTrace&, const TrialTrace&) = default;
};

using Cohort = std::vector<TrialTrace>;

struct TraceGenConfig {
  int trials = 40;
  CvShape shape{30, 10};
  std::uint64_t seed = 42;
  double base_min = 0.2;
  double base_max = 0.9;
  double noise_sd = 0.15;
  double outlier_prob = 0.05;
  double outlier_magnitude = 1.0;
  double zero_feature_prob = 0.10;
  Direction direction = Direction::minimize;
  // Outliers point in the pessimistic direction unless this is set, in which
  // case their sign is drawn at random.
  bool symmetric_outliers = false;

  void validate() const;
};

// Deterministic in `config`. Trial ids are "t0000", "t0001", ...
Cohort generate_cohort(const TraceGenConfig& config);

void write_traces(const Cohort& cohort, std::ostream& out);
// Writes one combined file.
void write_traces(const Cohort& cohort, const std::filesystem::path& path);
// Writes <dir>/<trial_id>.csv for every trial.
void write_traces_per_trial(const Cohort& cohort, const std::filesystem::path& dir);

// `source_name` is used in error messages.
Cohort read_traces(std::istream& in, const std::string& source_name = "<stream>");
// Accepts a combined file or a directory of per-trial *.csv files (read in
// lexicographic filename order).
Cohort read_traces(const std::filesystem::path& path);

// Checks that ids are unique and all trials share one shape.
void validate_cohort(const Cohort& cohort);

}  // namespace nestprune
