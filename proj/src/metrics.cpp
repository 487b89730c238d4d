#include "nestprune/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nestprune/errors.hpp"

namespace nestprune {

namespace {

void require_finite_nonempty(std::span<const double> values, const char* what) {
  if (values.empty()) {
    throw PreconditionError(std::string(what) + ": empty metric series");
  }
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw PreconditionError(std::string(what) + ": non-finite metric value");
    }
  }
}

}  // namespace

std::string_view to_string(Direction d) noexcept {
  return d == Direction::minimize ? "minimize" : "maximize";
}

std::string_view to_string(ExtrapolationMethod m) noexcept {
  switch (m) {
    case ExtrapolationMethod::none:
      return "none";
    case ExtrapolationMethod::optimal_metric:
      return "optimal";
    case ExtrapolationMethod::max_deviation:
      return "max-dev";
    case ExtrapolationMethod::mean_deviation:
      return "mean-dev";
  }
  return "none";
}

Direction parse_direction(std::string_view text) {
  if (text == "min" || text == "minimize") return Direction::minimize;
  if (text == "max" || text == "maximize") return Direction::maximize;
  throw ValidationError("unknown direction '" + std::string(text) + "' (expected min|max)");
}

ExtrapolationMethod parse_extrapolation(std::string_view text) {
  if (text == "none") return ExtrapolationMethod::none;
  if (text == "optimal") return ExtrapolationMethod::optimal_metric;
  if (text == "max-dev") return ExtrapolationMethod::max_deviation;
  if (text == "mean-dev") return ExtrapolationMethod::mean_deviation;
  throw ValidationError("unknown extrapolation method '" + std::string(text) +
                        "' (expected none|optimal|max-dev|mean-dev)");
}

double exact_sum(std::span<const double> values) {
  // Non-overlapping partials, smallest magnitude first.
  std::vector<double> partials;
  for (double x : values) {
    std::size_t kept = 0;
    for (double y : partials) {
      if (std::fabs(x) < std::fabs(y)) std::swap(x, y);
      const double hi = x + y;
      const double lo = y - (hi - x);
      if (lo != 0.0) partials[kept++] = lo;
      x = hi;
    }
    partials.resize(kept);
    partials.push_back(x);
  }
  if (partials.empty()) return 0.0;

  std::size_t n = partials.size();
  double hi = partials[--n];
  double lo = 0.0;
  while (n > 0) {
    const double x = hi;
    const double y = partials[--n];
    hi = x + y;
    lo = y - (hi - x);
    if (lo != 0.0) break;
  }
  // Round half to even across the remaining partials.
  if (n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0))) {
    const double y = lo * 2.0;
    const double x = hi + y;
    if (y == x - hi) hi = x;
  }
  return hi;
}

double mean(std::span<const double> values) {
  require_finite_nonempty(values, "mean");
  return exact_sum(values) / static_cast<double>(values.size());
}

double trimmed_mean(std::span<const double> values, double trim_fraction) {
  require_finite_nonempty(values, "trimmed_mean");
  if (!(trim_fraction >= 0.0 && trim_fraction < 0.5)) {
    throw PreconditionError("trimmed_mean: trim fraction must lie in [0, 0.5)");
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = sorted.size();
  const auto k = static_cast<std::size_t>(std::floor(trim_fraction * static_cast<double>(n)));
  const std::span<const double> kept(sorted.data() + k, n - 2 * k);
  return exact_sum(kept) / static_cast<double>(kept.size());
}

double median(std::span<const double> values) {
  require_finite_nonempty(values, "median");
  std::vector<double> work(values.begin(), values.end());
  const auto n = work.size();
  const auto upper = work.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(work.begin(), upper, work.end());
  if (n % 2 == 1) return *upper;
  const double below = *std::max_element(work.begin(), upper);
  return (below + *upper) / 2.0;
}

std::vector<double> deviations_toward_optimum(std::span<const double> values, Direction direction) {
  const double centre = median(values);
  std::vector<double> out;
  for (double v : values) {
    if (direction == Direction::minimize && v < centre) {
      out.push_back(centre - v);
    } else if (direction == Direction::maximize && v > centre) {
      out.push_back(v - centre);
    }
  }
  return out;
}

double extrapolate(std::span<const double> values, Direction direction, ExtrapolationMethod method,
                   double optimal_value) {
  const double centre = median(values);
  if (method == ExtrapolationMethod::optimal_metric) return optimal_value;
  if (method == ExtrapolationMethod::none) return centre;

  const auto deviations = deviations_toward_optimum(values, direction);
  if (deviations.empty()) return centre;
  const double step = method == ExtrapolationMethod::max_deviation
                          ? *std::max_element(deviations.begin(), deviations.end())
                          : exact_sum(deviations) / static_cast<double>(deviations.size());
  return direction == Direction::minimize ? centre - step : centre + step;
}

}  // namespace nestprune
