#pragma once

// Robust statistics and extrapolation primitives over per-step validation
// metrics. All functions are pure and safe to call concurrently.

#include <span>
#include <string_view>
#include <vector>

namespace nestprune {

enum class Direction { minimize, maximize };

enum class ExtrapolationMethod { none, optimal_metric, max_deviation, mean_deviation };

constexpr Direction flip(Direction d) noexcept {
  return d == Direction::minimize ? Direction::maximize : Direction::minimize;
}

// True iff `a` is strictly better than `b` under `d`.
constexpr bool strictly_better(double a, double b, Direction d) noexcept {
  return d == Direction::minimize ? a < b : a > b;
}

std::string_view to_string(Direction d) noexcept;
std::string_view to_string(ExtrapolationMethod m) noexcept;
// Accepts "min"/"minimize" and "max"/"maximize".
Direction parse_direction(std::string_view text);
// Accepts the CLI spellings none|optimal|max-dev|mean-dev.
ExtrapolationMethod parse_extrapolation(std::string_view text);

// Exactly rounded sum of a finite sequence (Shewchuk partials). The result does
// not depend on element order.
double exact_sum(std::span<const double> values);

// Arithmetic mean via exact_sum. Requires a non-empty input.
double mean(std::span<const double> values);

// Sorts a copy, drops floor(trim_fraction * n) values from each tail and
// averages the rest. trim_fraction must lie in [0, 0.5).
double trimmed_mean(std::span<const double> values, double trim_fraction);

// Sample median; even lengths return the midpoint of the central pair.
double median(std::span<const double> values);

// One-sided deviations from the median in the optimizing direction, in input
// order. Minimize: {m - v : v < m}; maximize: {v - m : v > m}.
std::vector<double> deviations_toward_optimum(std::span<const double> values, Direction direction);

// Optimistic per-step estimate for the missing steps of the current inner loop.
// `optimal_value` is only read by ExtrapolationMethod::optimal_metric.
double extrapolate(std::span<const double> values, Direction direction, ExtrapolationMethod method,
                   double optimal_value);

}  // namespace nestprune
