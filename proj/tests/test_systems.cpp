#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "reclab/errors.hpp"
#include "reclab/random.hpp"
#include "reclab/systems.hpp"

using namespace reclab;

namespace {

// Kolmogorov-Smirnov statistic of a sample against a CDF.
template <class Cdf>
double ks_statistic(std::vector<double> xs, Cdf cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double F = cdf(xs[i]);
    d = std::max({d, F - i / n, (i + 1) / n - F});
  }
  return d;
}

// 1% critical value of the one-sample KS test for large n.
double ks_critical(std::size_t n) { return 1.628 / std::sqrt(static_cast<double>(n)); }

}  // namespace

TEST(Words, ParseAndFormat) {
  EXPECT_EQ(parse_word("abc"), (Word{0, 1, 2}));
  EXPECT_EQ(parse_word("0110"), (Word{0, 1, 1, 0}));
  EXPECT_EQ(format_word(Word{0, 1, 1}), "011");
  EXPECT_EQ(format_word(Word{0, 12}), "am");
  EXPECT_THROW(parse_word("0a"), ValidationError);
  EXPECT_THROW(parse_word(""), ValidationError);
  EXPECT_THROW(parse_word("A"), ValidationError);
}

TEST(Iterate, Doubling) {
  const MetricSystem d(MapKind::doubling);
  EXPECT_EQ(iterate(d, 0.3, 1), 0.6);
  EXPECT_NEAR(iterate(d, 1.0 / 3.0, 2), 1.0 / 3.0, 1e-15);
  EXPECT_EQ(iterate(d, 0.3, 0), 0.3);
  EXPECT_THROW(iterate(d, 1.0, 1), DomainError);
  EXPECT_THROW(iterate(d, -0.1, 1), DomainError);
}

TEST(Iterate, ShiftDropsSymbols) {
  const MarkovShift s = MarkovShift::full_shift(3);
  EXPECT_EQ(iterate(s, parse_word("abc"), 1), parse_word("bc"));
  EXPECT_EQ(iterate(s, parse_word("abc"), 3), Word{});
  EXPECT_THROW(iterate(s, parse_word("abc"), 4), DomainError);
  EXPECT_THROW(iterate(s, parse_word("ad"), 1), DomainError);
}

TEST(Orbit, Examples) {
  const MetricSystem d(MapKind::doubling);
  const auto o = orbit(d, 1.0 / 3.0, 3);
  ASSERT_EQ(o.size(), 3u);
  EXPECT_NEAR(o[0], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(o[1], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(o[2], 1.0 / 3.0, 1e-15);
  const auto p = orbit(d, 0.1, 3);
  EXPECT_NEAR(p[1], 0.2, 1e-15);
  EXPECT_NEAR(p[2], 0.4, 1e-15);
  const auto q = orbit(MetricSystem(MapKind::tent), 0.75, 2);
  EXPECT_EQ(q[0], 0.75);
  EXPECT_EQ(q[1], 0.5);
  EXPECT_THROW(orbit(d, 0.5, 0), ValidationError);
  const auto w = orbit(MarkovShift::full_shift(2), parse_word("0110"), 3);
  EXPECT_EQ(w[2], parse_word("10"));
}

TEST(Gauss, ZeroIsOutsideTheDomain) {
  const MetricSystem g(MapKind::gauss);
  EXPECT_THROW(g.map(0.0), DomainError);
  EXPECT_NEAR(g.map(0.3), 1.0 / 0.3 - 3.0, 1e-12);
  SplitMix64 rng(5);
  for (int i = 0; i < 100000; ++i) {
    const double x = g.sample(rng);
    ASSERT_GT(x, 0.0);
    ASSERT_LT(x, 1.0);
  }
}

TEST(Gauss, SamplerMatchesGaussMeasure) {
  const MetricSystem g(MapKind::gauss);
  SplitMix64 rng(11);
  std::vector<double> xs(100000);
  for (auto& x : xs) x = g.sample(rng);
  EXPECT_LT(ks_statistic(xs, [](double x) { return std::log2(1.0 + x); }), ks_critical(xs.size()));
}

TEST(Doubling, InvarianceOfLebesgue) {
  const MetricSystem d(MapKind::doubling);
  SplitMix64 rng(3);
  std::vector<double> xs(100000);
  for (auto& x : xs) x = d.map(d.sample(rng));
  EXPECT_LT(ks_statistic(xs, [](double x) { return x; }), ks_critical(xs.size()));
}

TEST(MetricSystem, MapStaysInDomain) {
  SplitMix64 rng(17);
  for (MapKind k : {MapKind::doubling, MapKind::tent, MapKind::gauss}) {
    const MetricSystem s(k);
    for (int i = 0; i < 20000; ++i) {
      const double x = s.sample(rng);
      ASSERT_TRUE(s.in_domain(x));
      const double y = s.map(x);
      if (k == MapKind::gauss && y == 0.0) continue;  // 1/x landed on an integer
      ASSERT_TRUE(s.in_domain(y)) << to_string(k) << " x=" << x;
    }
  }
  EXPECT_TRUE(MetricSystem(MapKind::tent).in_domain(1.0));
  EXPECT_EQ(MetricSystem(MapKind::tent).map(1.0), 0.0);
}

TEST(MetricSystem, CircleDistance) {
  const MetricSystem d(MapKind::doubling);
  EXPECT_NEAR(d.distance(0.05, 0.95), 0.1, 1e-15);
  EXPECT_NEAR(MetricSystem(MapKind::tent).distance(0.05, 0.95), 0.9, 1e-15);
}

TEST(Iterate, CompositionProperty) {
  SplitMix64 rng(23);
  for (MapKind k : {MapKind::doubling, MapKind::tent}) {
    const MetricSystem s(k);
    for (int trial = 0; trial < 200; ++trial) {
      const double x = s.sample(rng);
      const auto a = static_cast<std::uint64_t>(rng.next() % 21);
      const auto b = static_cast<std::uint64_t>(rng.next() % 20);
      EXPECT_NEAR(iterate(s, x, a + b), iterate(s, iterate(s, x, a), b), 1e-9);
    }
  }
  const MarkovShift sh = MarkovShift::golden_mean();
  for (int trial = 0; trial < 50; ++trial) {
    const Word w = sample_stationary(sh, rng.next(), 40);
    const auto a = rng.next() % 15, b = rng.next() % 15;
    EXPECT_EQ(iterate(sh, w, a + b), iterate(sh, iterate(sh, w, a), b));
  }
}

TEST(BinaryExpansion, OrbitsMatchDoubleIteration) {
  const MetricSystem d(MapKind::doubling);
  const MetricSystem t(MapKind::tent);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const BinaryExpansion b(seed);
    double x = b.value(0);
    double y = x;
    for (std::uint64_t k = 0; k < 20; ++k) {
      EXPECT_NEAR(d.binary_orbit_value(b, k), x, 1e-9);
      EXPECT_NEAR(t.binary_orbit_value(b, k), y, 1e-9);
      x = d.map(x);
      y = t.map(y);
    }
  }
  const BinaryExpansion h = BinaryExpansion::from_double(0.375);
  EXPECT_TRUE(!h.bit(1) && h.bit(2) && h.bit(3) && !h.bit(4));
  EXPECT_EQ(h.value(0), 0.375);
  EXPECT_EQ(h.value(1), 0.75);
}

TEST(BinaryExpansion, OrbitCursorReadsExactOrbit) {
  const MetricSystem d(MapKind::doubling);
  const BinaryExpansion b(99);
  OrbitCursor c(d, b);
  for (int k = 0; k < 500; ++k) {
    ASSERT_EQ(c.value(), b.value(static_cast<std::uint64_t>(k)));
    c.advance();
  }
}

TEST(Stationary, Examples) {
  const auto p = stationary_distribution(Matrix{{0.5, 0.5}, {0.5, 0.5}});
  EXPECT_NEAR(p[0], 0.5, 1e-15);
  const auto q = stationary_distribution(Matrix{{0.7, 0.3}, {0.6, 0.4}});
  EXPECT_NEAR(q[0], 2.0 / 3.0, 1e-14);
  EXPECT_NEAR(q[1], 1.0 / 3.0, 1e-14);
  EXPECT_LT(std::fabs(q[0] * 0.7 + q[1] * 0.6 - q[0]), 1e-12);
  EXPECT_THROW(stationary_distribution(Matrix{{1.0, 0.0}, {0.0, 1.0}}), ValidationError);
  EXPECT_THROW(stationary_distribution(Matrix{{0.5, 0.4}, {0.5, 0.5}}), ValidationError);
  EXPECT_THROW(stationary_distribution(Matrix{{1.5, -0.5}, {0.5, 0.5}}), ValidationError);

  const auto r = stationary_distribution(RationalMatrix{{Rational(7, 10), Rational(3, 10)}, {Rational(3, 5), Rational(2, 5)}});
  EXPECT_EQ(r[0], Rational(2, 3));
  EXPECT_EQ(r[1], Rational(1, 3));
}

TEST(MarkovShift, PrimitivityAndAdmissibility) {
  EXPECT_EQ(MarkovShift::full_shift(2).primitivity_index(), 1);
  const MarkovShift g = MarkovShift::golden_mean();
  EXPECT_EQ(g.primitivity_index(), 2);
  EXPECT_TRUE(g.is_admissible(parse_word("0100")));
  EXPECT_FALSE(g.is_admissible(parse_word("0110")));
  EXPECT_THROW(g.check_admissible(parse_word("11")), DomainError);
  EXPECT_THROW(MarkovShift::from_matrix(Matrix{{0.0, 1.0}, {1.0, 0.0}}), ValidationError);  // periodic
  EXPECT_EQ(g.pi_exact(0), Rational(2, 3));
}

TEST(SampleStationary, Deterministic) {
  const MarkovShift s = MarkovShift::from_matrix(Matrix{{0.7, 0.3}, {0.6, 0.4}});
  EXPECT_EQ(sample_stationary(s, 42, 1000), sample_stationary(s, 42, 1000));
  EXPECT_NE(sample_stationary(s, 42, 1000), sample_stationary(s, 43, 1000));
}

TEST(SampleStationary, SymbolFrequencyGates) {
  const std::size_t N = 100000;
  {
    const MarkovShift s = MarkovShift::full_shift(2);
    const Word w = sample_stationary(s, 1, N);
    const double f = static_cast<double>(std::count(w.begin(), w.end(), 0)) / N;
    EXPECT_LT(std::fabs(f - 0.5), 3.0 * std::sqrt(0.25 / N));
  }
  {
    // Symmetric two-state chain with p = q = 0.3.
    const MarkovShift s = MarkovShift::from_matrix(Matrix{{0.7, 0.3}, {0.3, 0.7}});
    const Word w = sample_stationary(s, 2, N);
    const double f = static_cast<double>(std::count(w.begin(), w.end(), 0)) / N;
    // Integrated autocorrelation (1 + λ)/(1 - λ) with λ = 0.4.
    EXPECT_LT(std::fabs(f - 0.5), 3.0 * std::sqrt(0.25 * (1.4 / 0.6) / N));
  }
  {
    const MarkovShift s = MarkovShift::from_matrix(Matrix{{0.7, 0.3}, {0.6, 0.4}});
    const Word w = sample_stationary(s, 3, N);
    const double f = static_cast<double>(std::count(w.begin(), w.end(), 0)) / N;
    const double p = s.pi(0);
    // λ = 0.1 for this chain.
    EXPECT_LT(std::fabs(f - p), 3.0 * std::sqrt(p * (1 - p) * (1.1 / 0.9) / N));
  }
}

TEST(SampleStationary, ShiftInvariance) {
  const MarkovShift s = MarkovShift::from_matrix(Matrix{{0.7, 0.3}, {0.6, 0.4}});
  const int N = 40000;
  int at0 = 0, at50 = 0;
  for (int i = 0; i < N; ++i) {
    const Word w = sample_stationary(s, derive_seed(9, static_cast<std::uint64_t>(i)), 51);
    at0 += w[0] == 0;
    at50 += w[50] == 0;
  }
  const double p = s.pi(0);
  const double sigma = std::sqrt(2.0 * p * (1 - p) / N);
  EXPECT_LT(std::fabs(static_cast<double>(at0 - at50) / N), 4.0 * sigma);
}

TEST(Random, UniformOpenStaysInside) {
  SplitMix64 rng(0);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform_open();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
}
