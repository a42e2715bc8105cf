#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "reclab/bowen.hpp"
#include "reclab/errors.hpp"

using namespace reclab;

namespace {

const MetricSystem kDoubling(MapKind::doubling);
const MetricSystem kTent(MapKind::tent);
const MetricSystem kGauss(MapKind::gauss);

Rational pow2(int k) { return Rational(BigInt(1) << k); }

}  // namespace

TEST(BowenBall, Contains) {
  const BowenBall ball(kDoubling, 0.0, 0.1, 3);
  EXPECT_TRUE(contains(ball, 0.01));
  EXPECT_FALSE(contains(ball, 0.03));
  EXPECT_TRUE(contains(ball, 0.0));
  EXPECT_TRUE(contains(ball, 0.99));
  EXPECT_THROW(contains(ball, 1.0), DomainError);
  EXPECT_THROW(contains(BowenBall(kGauss, 0.5, 0.1, 2), 0.0), DomainError);
  EXPECT_THROW(BowenBall(kDoubling, 0.2, 0.0, 3), ValidationError);
  EXPECT_THROW(BowenBall(kDoubling, 0.2, 0.1, 0), ValidationError);
  EXPECT_THROW(BowenBall(kDoubling, 0.2, 0.1, 49), ValidationError);
}

TEST(BowenBall, CenterIsContained) {
  SplitMix64 rng(20);
  for (const auto& sys : {kDoubling, kTent, kGauss}) {
    for (int rep = 0; rep < 50; ++rep) {
      const double x = sys.sample(rng);
      const BowenBall ball(sys, x, 0.05, 10);
      EXPECT_TRUE(contains(ball, x));
    }
  }
}

TEST(BowenBall, Nesting) {
  SplitMix64 rng(21);
  for (const auto& sys : {kDoubling, kTent}) {
    for (int rep = 0; rep < 200; ++rep) {
      const double x = sys.sample(rng);
      double y = x + (2.0 * rng.uniform_open() - 1.0) * 0.01;
      y = sys.kind() == MapKind::doubling ? y - std::floor(y) : std::clamp(y, 0.0, 1.0);
      const int n = 1 + static_cast<int>(rng.next() % 12);
      const double eps = 0.02 + 0.2 * rng.uniform_open();
      const bool in_long = contains(BowenBall(sys, x, eps, n + 1), y);
      const bool in_ball = contains(BowenBall(sys, x, eps, n), y);
      const bool in_wide = contains(BowenBall(sys, x, eps * 1.5, n), y);
      if (in_long) EXPECT_TRUE(in_ball);
      if (in_ball) EXPECT_TRUE(in_wide);
    }
  }
}

TEST(BallMeasure, ExactExamples) {
  for (double x : {0.0, 0.3, 0.77}) {
    const auto m = ball_measure(BowenBall(kDoubling, x, 0.1, 1), ExactDoubling{});
    EXPECT_EQ(*m.exact, 2 * exact_rational(0.1));
    EXPECT_DOUBLE_EQ(m.estimate, 0.2);
    EXPECT_EQ(m.standard_error, 0.0);
  }
  const auto m = ball_measure(BowenBall(kDoubling, 0.3, 0.1, 10), ExactDoubling{});
  EXPECT_DOUBLE_EQ(m.estimate, 3.90625e-4);
}

TEST(BallMeasure, MatchesDenseGrid) {
  for (int n : {4, 10}) {
    const BowenBall ball(kDoubling, 0.3, 0.1, n);
    const double step = 1e-7;
    std::uint64_t hits = 0;
    for (double y = 0.27; y < 0.33; y += step) hits += contains(ball, y);
    EXPECT_NEAR(hits * step, ball_measure(ball, ExactDoubling{}).estimate, 3 * step);
  }
}

TEST(BallMeasure, NoWrapFormula) {
  SplitMix64 rng(22);
  for (double eps : {0.05, 0.1, 0.2}) {
    for (int n = 1; n <= 30; n += 3) {
      const double x = rng.uniform_open();
      const auto m = ball_measure(BowenBall(kDoubling, x, eps, n), ExactDoubling{});
      EXPECT_EQ(*m.exact, 2 * exact_rational(eps) / pow2(n - 1));
    }
  }
}

TEST(BallMeasure, MonteCarloWithinFourSigma) {
  const BowenBall ball(kDoubling, 0.3, 0.1, 6);
  const auto mc = ball_measure(ball, MonteCarlo{1'000'000, 5, 1});
  EXPECT_EQ(mc.samples, 1'000'000u);
  EXPECT_LT(std::fabs(mc.estimate - 0.2 / 32), 4 * std::sqrt(0.00625 * (1 - 0.00625) / 1e6));
  const auto mc2 = ball_measure(ball, MonteCarlo{1'000'000, 5, 3});
  EXPECT_EQ(mc.hits, mc2.hits);
}

TEST(BallMeasure, ExactVersusMonteCarloGrid) {
  std::uint64_t seed = 30;
  for (double eps : {0.05, 0.1}) {
    for (int n : {4, 8, 12}) {
      const BowenBall ball(kDoubling, 0.61, eps, n);
      const double exact = ball_measure(ball, ExactDoubling{}).estimate;
      const auto mc = ball_measure(ball, MonteCarlo{1'000'000, seed++, 2});
      const double sigma = std::sqrt(exact * (1 - exact) / 1e6);
      EXPECT_LT(std::fabs(mc.estimate - exact), 4 * sigma) << "eps=" << eps << " n=" << n;
    }
  }
}

TEST(BallMeasure, Errors) {
  EXPECT_THROW(ball_measure(BowenBall(kDoubling, 0.3, 0.3, 2), ExactDoubling{}), DomainError);
  EXPECT_THROW(ball_measure(BowenBall(kGauss, 0.3, 0.1, 2), ExactDoubling{}), ValidationError);
  EXPECT_THROW(ball_measure(BowenBall(kDoubling, 0.3, 0.1, 2), MonteCarlo{0, 1, 1}), ValidationError);
}

TEST(BallMeasure, GaussMonteCarlo) {
  const auto mc = ball_measure(BowenBall(kGauss, 0.4, 0.1, 2), MonteCarlo{200'000, 3, 1});
  EXPECT_GT(mc.estimate, 0.0);
  EXPECT_LT(mc.estimate, 0.2 / std::log(2.0));
  EXPECT_GT(mc.standard_error, 0.0);
}

TEST(Recurrence, PeriodicPoint) {
  for (int n : {1, 5, 20}) {
    const auto r = recurrence_time(kDoubling, 1.0 / 3.0, 0.01, n, 100);
    ASSERT_TRUE(r.has_value());
    EXPECT_EQ(*r, 2u);
  }
}

TEST(Recurrence, MatchesNaiveRescan) {
  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    const BinaryExpansion x(seed);
    const auto r = recurrence_time(kDoubling, x, 0.05, 12, std::uint64_t{1} << 20);
    const auto naive = oracle::naive_recurrence(x, 0.05, 12, std::uint64_t{1} << 20);
    EXPECT_EQ(r.value_or(0), naive) << "seed " << seed;
  }
}

TEST(Recurrence, Overflow) {
  const BinaryExpansion x(9);
  const auto full = recurrence_time(kDoubling, x, 0.05, 12, std::uint64_t{1} << 22);
  ASSERT_TRUE(full.has_value());
  ASSERT_GT(*full, 1u);
  EXPECT_FALSE(recurrence_time(kDoubling, x, 0.05, 12, *full - 1).has_value());
  EXPECT_THROW(recurrence_time(kDoubling, x, 0.05, 12, 0), ValidationError);
}

TEST(Period, Examples) {
  const auto p = ball_period(BowenBall(kDoubling, 1.0 / 3.0, 0.01, 8), ExactDoubling{});
  EXPECT_EQ(p.lower, 2u);
  EXPECT_EQ(*p.upper, 2u);
  EXPECT_TRUE(p.certified);
  SplitMix64 rng(23);
  for (int rep = 0; rep < 50; ++rep) {
    const auto q = ball_period(BowenBall(kDoubling, rng.uniform_open(), 0.1, 10), ExactDoubling{});
    EXPECT_LE(*q.upper, 12u);
  }
  EXPECT_EQ(*ball_period(BowenBall(kDoubling, 0.0, 0.4, 1), ExactDoubling{}).upper, 1u);
}

TEST(Period, MatchesArcOracle) {
  SplitMix64 rng(24);
  for (int rep = 0; rep < 200; ++rep) {
    const double x = rng.uniform_open();
    const double eps = rep % 2 ? 0.05 : 0.1;
    const int n = 1 + static_cast<int>(rng.next() % 30);
    const BowenBall ball(kDoubling, x, eps, n);
    const int expected = oracle::arc_period(exact_rational(x), exact_rational(eps) / pow2(n - 1));
    EXPECT_EQ(*ball_period(ball, ExactDoubling{}).upper, static_cast<std::uint64_t>(expected)) << x << " " << n;
  }
}

TEST(Period, SampledIsUncertified) {
  const BowenBall ball(kDoubling, 0.3, 0.1, 6);
  const auto exact = ball_period(ball, ExactDoubling{});
  const auto sampled = ball_period(ball, SampledPeriod{4096, 1, 0});
  EXPECT_EQ(sampled.lower, 1u);
  EXPECT_FALSE(sampled.certified);
  ASSERT_TRUE(sampled.upper.has_value());
  EXPECT_GE(*sampled.upper, *exact.upper);
  const auto gauss = ball_period(BowenBall(kGauss, 0.4, 0.1, 3), SampledPeriod{2048, 2, 0});
  EXPECT_FALSE(gauss.certified);
}

TEST(Period, RecurrenceIsAtLeastPeriod) {
  for (std::uint64_t seed = 100; seed < 130; ++seed) {
    const BinaryExpansion x(seed);
    const BowenBall ball(kDoubling, x, 0.1, 8);
    const auto r = recurrence_time(kDoubling, x, 0.1, 8, std::uint64_t{1} << 20);
    ASSERT_TRUE(r.has_value());
    EXPECT_GE(*r, *ball_period(ball, ExactDoubling{}).upper);
  }
}

TEST(Period, MedianRatioAtLengthTwentyFour) {
  const MetricSystem sys(MapKind::doubling);
  std::vector<double> ratio;
  for (std::uint64_t i = 0; i < 100; ++i) {
    const BowenBall ball(sys, sys.sample_point(derive_seed(77, i)), 0.05, 24);
    ratio.push_back(static_cast<double>(*ball_period(ball, ExactDoubling{}).upper) / 24.0);
  }
  std::sort(ratio.begin(), ratio.end());
  const double median = 0.5 * (ratio[49] + ratio[50]);
  EXPECT_GE(median, 0.9);
  EXPECT_LE(median, 1.4);
  EXPECT_LE(ratio.back(), (24.0 + 5.0) / 24.0);
}

TEST(Entropy, Examples) {
  const auto e16 = entropy_estimates(kDoubling, 0.3, 0.1, 16, ExactDoubling{}, 1 << 20);
  EXPECT_NEAR(e16.brin_katok, (15 * std::log(2.0) + std::log(5.0)) / 16, 1e-12);
  EXPECT_NEAR(e16.brin_katok, 0.7504, 1e-4);
  const auto e32 = entropy_estimates(kDoubling, 0.3, 0.1, 32, ExactDoubling{}, 1);
  EXPECT_NEAR(e32.brin_katok, 0.7218, 1e-4);
  EXPECT_LT(std::fabs(e32.brin_katok - std::log(2.0)), std::fabs(e16.brin_katok - std::log(2.0)));
  EXPECT_FALSE(e32.varandas.has_value());
  const auto periodic = entropy_estimates(kDoubling, 1.0 / 3.0, 0.1, 16, ExactDoubling{}, 100);
  EXPECT_NEAR(*periodic.varandas, std::log(2.0) / 16, 1e-15);
}

TEST(Approximation, Examples) {
  const BowenBall ball(kDoubling, 0.3, 0.1, 6);
  const auto a = cylinder_approximation(ball, 12);
  EXPECT_NEAR(to_double(a.mu_ball), 0.00625, 1e-15);
  EXPECT_EQ(a.boundary.size(), 2u);
  EXPECT_EQ(a.mu_boundary, Rational(2) / pow2(12));
  EXPECT_DOUBLE_EQ(a.theta_hat(), 0.078125);
  EXPECT_DOUBLE_EQ(a.gap_bound(1.0), 0.15625);
  const auto b = cylinder_approximation(ball, 16);
  EXPECT_DOUBLE_EQ(b.theta_hat(), a.theta_hat() / 16);

  const auto aligned = cylinder_approximation(BowenBall(kDoubling, 0.5, 0.125, 1), 8);
  EXPECT_EQ(aligned.mu_boundary, 0);
  EXPECT_EQ(aligned.mu_inner, aligned.mu_ball);
  EXPECT_THROW(cylinder_approximation(ball, 5), ValidationError);
  EXPECT_THROW(cylinder_approximation(ball, 49), ValidationError);
}

TEST(Approximation, SandwichAndPartition) {
  SplitMix64 rng(25);
  for (int rep = 0; rep < 100; ++rep) {
    const double eps = 0.01 + 0.2 * rng.uniform_open();
    const int n = 1 + static_cast<int>(rng.next() % 10);
    const int depth = n + static_cast<int>(rng.next() % 12);
    const auto a = cylinder_approximation(BowenBall(kDoubling, rng.uniform_open(), eps, n), depth);
    EXPECT_LE(a.mu_inner, a.mu_ball);
    EXPECT_LE(a.mu_ball, a.mu_inner + a.mu_boundary);
    EXPECT_EQ(a.outer_count(), a.inner_count() + a.boundary.size());
    for (std::uint64_t j : a.boundary) {
      for (const auto& r : a.inner) EXPECT_FALSE(j >= r.first && j < r.first + r.count);
    }
    EXPECT_LE(a.boundary.size(), 2u);
  }
}

TEST(Approximation, DyadicWord) {
  EXPECT_EQ(dyadic_word(5, 4), parse_word("0101"));
  EXPECT_EQ(dyadic_word(0, 2), parse_word("00"));
}

TEST(ClusterCount, Examples) {
  for (double x : {0.3, 0.123, 0.9}) {
    const auto c = count_intersecting_cylinders(BowenBall(kDoubling, x, 0.1, 10), 10);
    EXPECT_GE(c, 1u);
    EXPECT_LE(c, 2u);
  }
  EXPECT_EQ(count_intersecting_cylinders(BowenBall(kDoubling, 0.0, 0.4, 1), 1), 2u);
  SplitMix64 rng(26);
  for (int n = 10; n <= 40; ++n) {
    const auto c = count_intersecting_cylinders(BowenBall(kDoubling, rng.uniform_open(), 0.1, n), n);
    EXPECT_LE(static_cast<double>(c), std::exp(0.1 * n));
  }
  EXPECT_THROW(count_intersecting_cylinders(BowenBall(kDoubling, 0.3, 0.1, 3), 63), ValidationError);
}

TEST(Annulus, RatioIsLinear) {
  SplitMix64 rng(27);
  for (int rep = 0; rep < 20; ++rep) {
    const double x = rng.uniform_open();
    EXPECT_NEAR(annulus_ratio(x, 0.1, 0.01), 0.2, 1e-12);
    EXPECT_NEAR(annulus_ratio(x, 0.25, 0.05), 0.4, 1e-12);
  }
  EXPECT_THROW(annulus_ratio(0.3, 0.1, 0.2), ValidationError);
  EXPECT_THROW(annulus_ratio(0.3, 0.45, 0.1), ValidationError);
}
