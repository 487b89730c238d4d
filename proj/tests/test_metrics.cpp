#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "nestprune/errors.hpp"
#include "nestprune/metrics.hpp"
#include "oracles.hpp"

namespace nestprune {
namespace {

using V = std::vector<double>;
const V kFour{0.6, 0.5, 0.7, 0.55};

TEST(TrimmedMean, ConstantSeries) { EXPECT_EQ(trimmed_mean(V(10, 0.5), 0.2), 0.5); }

TEST(TrimmedMean, DropsOnePerTailOfFive) {
  const V v{1, 2, 3, 4, 100};
  EXPECT_EQ(oracle::trimmed_mean(v, 0.2), 3.0);
  EXPECT_EQ(trimmed_mean(v, 0.2), 3.0);
}

TEST(TrimmedMean, ShortSeriesDegradesToMean) {
  const V v{0.7, 0.1, 0.4};
  EXPECT_DOUBLE_EQ(oracle::wide_mean(v), 0.4);
  EXPECT_DOUBLE_EQ(trimmed_mean(v, 0.2), 0.4);
}

TEST(TrimmedMean, Errors) {
  EXPECT_THROW(trimmed_mean(V{}, 0.2), PreconditionError);
  EXPECT_THROW(trimmed_mean(V{1.0}, 0.5), PreconditionError);
  EXPECT_THROW(trimmed_mean(V{1.0}, -0.1), PreconditionError);
  EXPECT_THROW(trimmed_mean(V{1.0, std::nan("")}, 0.2), PreconditionError);
}

TEST(Median, Examples) {
  EXPECT_EQ(median(V{0.5}), 0.5);
  EXPECT_EQ(median(V{1, 2, 3}), 2.0);
  EXPECT_EQ(median(kFour), oracle::median(kFour));
  EXPECT_DOUBLE_EQ(median(kFour), 0.575);
  EXPECT_THROW(median(V{}), PreconditionError);
}

TEST(Deviations, Examples) {
  const auto down = deviations_toward_optimum(kFour, Direction::minimize);
  ASSERT_EQ(down.size(), 2u);
  EXPECT_EQ(down, oracle::deviations(kFour, Direction::minimize));
  EXPECT_NEAR(down[0], 0.075, 1e-12);
  EXPECT_NEAR(down[1], 0.025, 1e-12);

  EXPECT_TRUE(deviations_toward_optimum(V{0.5, 0.5, 0.5}, Direction::minimize).empty());

  auto up = deviations_toward_optimum(kFour, Direction::maximize);
  std::sort(up.begin(), up.end(), std::greater<>{});
  ASSERT_EQ(up.size(), 2u);
  EXPECT_NEAR(up[0], 0.125, 1e-12);
  EXPECT_NEAR(up[1], 0.025, 1e-12);
}

TEST(Extrapolate, Examples) {
  EXPECT_EQ(extrapolate(kFour, Direction::minimize, ExtrapolationMethod::optimal_metric, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(extrapolate(kFour, Direction::minimize, ExtrapolationMethod::max_deviation, 0.0), 0.5);
  EXPECT_DOUBLE_EQ(extrapolate(kFour, Direction::minimize, ExtrapolationMethod::mean_deviation, 0.0), 0.525);
  EXPECT_EQ(extrapolate(V{0.5, 0.5}, Direction::minimize, ExtrapolationMethod::mean_deviation, 0.0), 0.5);
  EXPECT_EQ(extrapolate(kFour, Direction::minimize, ExtrapolationMethod::none, 0.0), median(kFour));
  for (auto m : {ExtrapolationMethod::none, ExtrapolationMethod::optimal_metric, ExtrapolationMethod::max_deviation,
                 ExtrapolationMethod::mean_deviation}) {
    EXPECT_DOUBLE_EQ(extrapolate(kFour, Direction::minimize, m, 0.0),
                     oracle::extrapolate(kFour, Direction::minimize, m, 0.0));
  }
}

TEST(ExactSum, HandlesCancellation) {
  EXPECT_EQ(exact_sum(V{1e100, 1.0, -1e100}), 1.0);
  EXPECT_EQ(exact_sum(V{0.1, 0.2, 0.3}), static_cast<double>(oracle::Wide(0.1) + oracle::Wide(0.2) + oracle::Wide(0.3)));
  EXPECT_EQ(exact_sum(V{}), 0.0);
}

TEST(Parsing, DirectionAndMethod) {
  EXPECT_EQ(parse_direction("min"), Direction::minimize);
  EXPECT_EQ(parse_direction("maximize"), Direction::maximize);
  EXPECT_THROW(parse_direction("up"), ValidationError);
  for (auto m : {ExtrapolationMethod::none, ExtrapolationMethod::optimal_metric, ExtrapolationMethod::max_deviation,
                 ExtrapolationMethod::mean_deviation}) {
    EXPECT_EQ(parse_extrapolation(to_string(m)), m);
  }
  EXPECT_THROW(parse_extrapolation("linear"), ValidationError);
}

// Properties over random series.

class MetricsProperty : public ::testing::Test {
 protected:
  std::mt19937_64 rng{20240601};
};

TEST_F(MetricsProperty, ZeroTrimIsMean) {
  for (int i = 0; i < 500; ++i) {
    const auto v = oracle::random_series(rng, 1, 200);
    EXPECT_EQ(trimmed_mean(v, 0.0), mean(v));
  }
}

TEST_F(MetricsProperty, TrimmedMeanBoundedAndPermutationInvariant) {
  std::uniform_real_distribution<double> frac(0.0, 0.499);
  for (int i = 0; i < 500; ++i) {
    auto v = oracle::random_series(rng, 1, 200);
    const double f = frac(rng);
    const double t = trimmed_mean(v, f);
    const double md = median(v);
    EXPECT_GE(t, *std::min_element(v.begin(), v.end()));
    EXPECT_LE(t, *std::max_element(v.begin(), v.end()));
    std::shuffle(v.begin(), v.end(), rng);
    EXPECT_EQ(trimmed_mean(v, f), t);
    EXPECT_EQ(median(v), md);
  }
}

TEST_F(MetricsProperty, ExtrapolationOrdering) {
  for (int i = 0; i < 1000; ++i) {
    const auto v = oracle::random_series(rng, 1, 60, 0.0, 3.0);
    const double lowest = *std::min_element(v.begin(), v.end());
    {
      const auto d = Direction::minimize;
      const double opt = extrapolate(v, d, ExtrapolationMethod::optimal_metric, lowest - 0.1);
      const double mx = extrapolate(v, d, ExtrapolationMethod::max_deviation, 0);
      const double mn = extrapolate(v, d, ExtrapolationMethod::mean_deviation, 0);
      const double none = extrapolate(v, d, ExtrapolationMethod::none, 0);
      EXPECT_LE(opt, mx);
      EXPECT_LE(mx, mn);
      EXPECT_LE(mn, none);
      EXPECT_EQ(none, median(v));
    }
    {
      const auto d = Direction::maximize;
      const double highest = *std::max_element(v.begin(), v.end());
      const double opt = extrapolate(v, d, ExtrapolationMethod::optimal_metric, highest + 0.1);
      const double mx = extrapolate(v, d, ExtrapolationMethod::max_deviation, 0);
      const double mn = extrapolate(v, d, ExtrapolationMethod::mean_deviation, 0);
      const double none = extrapolate(v, d, ExtrapolationMethod::none, 0);
      EXPECT_GE(opt, mx);
      EXPECT_GE(mx, mn);
      EXPECT_GE(mn, none);
    }
  }
}

TEST_F(MetricsProperty, NegationSymmetry) {
  std::uniform_real_distribution<double> any(-2.0, 2.0);
  for (int i = 0; i < 1000; ++i) {
    const auto v = oracle::random_series(rng, 1, 80);
    V neg(v.size());
    std::transform(v.begin(), v.end(), neg.begin(), [](double x) { return -x; });
    EXPECT_EQ(median(neg), -median(v));
    EXPECT_EQ(trimmed_mean(neg, 0.2), -trimmed_mean(v, 0.2));
    const double opt = any(rng);
    for (auto m : {ExtrapolationMethod::none, ExtrapolationMethod::optimal_metric, ExtrapolationMethod::max_deviation,
                   ExtrapolationMethod::mean_deviation}) {
      for (auto d : {Direction::minimize, Direction::maximize}) {
        EXPECT_EQ(extrapolate(neg, flip(d), m, -opt), -extrapolate(v, d, m, opt));
      }
    }
  }
}

}  // namespace
}  // namespace nestprune
