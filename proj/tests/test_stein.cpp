#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "reclab/errors.hpp"
#include "reclab/random.hpp"
#include "reclab/stein.hpp"

using namespace reclab;

namespace {

std::vector<std::size_t> random_set(SplitMix64& rng, std::size_t max_elem) {
  std::vector<std::size_t> e;
  for (std::size_t k = 0; k <= max_elem; ++k) {
    if (rng.next() & 1u) e.push_back(k);
  }
  return e;
}

CountDistribution random_law(SplitMix64& rng, std::size_t cap) {
  CountDistribution d(cap);
  double total = 0.0;
  for (std::size_t k = 0; k < d.cell_count(); ++k) {
    d[k] = rng.uniform_open();
    total += d[k];
  }
  for (std::size_t k = 0; k < d.cell_count(); ++k) d[k] /= total;
  return d;
}

}  // namespace

TEST(Poisson, Pmf) {
  EXPECT_NEAR(poisson_pmf(1.0, 0), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(poisson_pmf(2.0, 2), 2.0 * std::exp(-2.0), 1e-15);
  EXPECT_EQ(poisson_pmf(0.0, 0), 1.0);
  EXPECT_EQ(poisson_pmf(0.0, 3), 0.0);
  EXPECT_THROW(poisson_pmf(-1.0, 0), ValidationError);
}

TEST(Poisson, LawIsNormalized) {
  for (double t : {0.1, 1.0, 5.0, 20.0}) {
    const auto d = poisson_law(t, static_cast<std::size_t>(8.0 * t) + 32);
    EXPECT_NEAR(d.total(), 1.0, 1e-12);
  }
  const auto d = poisson_law(1.0, 2);
  EXPECT_NEAR(d.overflow(), 1.0 - 2.5 * std::exp(-1.0), 1e-15);
}

TEST(Stein, Examples) {
  const auto s = stein_solve(1.0, {0}, 32);
  EXPECT_EQ(s.f[0], 0.0);
  EXPECT_NEAR(s.f[1], 1.0 - std::exp(-1.0), 1e-12);
  EXPECT_NEAR(s.f[2], 0.264241, 1e-6);
  EXPECT_NEAR(s.f[2], s.f[1] - std::exp(-1.0), 1e-12);
  const auto empty = stein_solve(3.0, {}, 40);
  for (double v : empty.f) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(stein_solve(0.0, {0}, 10), ValidationError);
  EXPECT_THROW(stein_solve(1.0, {11}, 10), ValidationError);
}

TEST(Stein, ResidualAndClosedForm) {
  SplitMix64 rng(11);
  for (double t : {0.5, 1.0, 2.0, 5.0, 12.5}) {
    for (int rep = 0; rep < 10; ++rep) {
      const auto E = random_set(rng, 50);
      const auto s = stein_solve(t, E, 200);
      EXPECT_LT(s.max_residual(), 1e-10);
      for (std::size_t k : {1, 2, 5, 10, 30}) {
        EXPECT_NEAR(s.f[k], static_cast<double>(oracle::stein_closed_form(t, s.in_set, k)), 1e-9) << "t=" << t << " k=" << k;
      }
    }
  }
}

TEST(Stein, LogsumBounds) {
  SplitMix64 rng(12);
  for (double t : {0.5, 1.0, 2.0, 5.0}) {
    for (int rep = 0; rep < 10; ++rep) {
      const auto s = stein_solve(t, random_set(rng, 60), 10'000);
      double partial = 0.0;
      for (std::size_t k = 1; k <= 10'000; ++k) {
        const double fk = std::fabs(s.f[k]);
        const double kk = static_cast<double>(k);
        if (kk <= t) {
          EXPECT_LE(fk, 1.0);
        } else {
          EXPECT_LE(fk, (2.0 + t) / kk);
        }
        partial += fk;
        if (kk <= t) {
          EXPECT_LE(partial, kk);
        } else {
          EXPECT_LE(partial, t + (2.0 + t) * std::log(kk / t));
        }
      }
    }
  }
}

TEST(Stein, ForwardAndTailAgreeNearSeam) {
  SplitMix64 rng(13);
  for (double t : {0.5, 1.0, 2.0, 5.0, 9.3}) {
    const auto s = stein_solve(t, random_set(rng, 30), 100);
    const auto seam = static_cast<std::size_t>(std::ceil(t));
    const auto fwd = stein_forward(t, s.in_set, s.nu, seam + 3);
    for (std::size_t k = std::max<std::size_t>(1, seam > 2 ? seam - 2 : 1); k <= seam + 2; ++k) {
      EXPECT_NEAR(fwd[k], stein_tail(t, s.in_set, s.nu, k), 1e-10) << "t=" << t << " k=" << k;
    }
    EXPECT_LT(s.seam_mismatch, 1e-10);
  }
}

// Σ_k ν_t(k)(t f(k+1) - k f(k)) = 0 for any bounded f.
TEST(Stein, PoissonCharacterization) {
  SplitMix64 rng(14);
  for (double t : {0.5, 1.0, 2.0, 5.0}) {
    for (int rep = 0; rep < 50; ++rep) {
      std::vector<double> f(202, 0.0);
      for (std::size_t k = 1; k <= 200; ++k) f[k] = 2.0 * rng.uniform_open() - 1.0;
      long double sum = 0.0L;
      for (std::size_t k = 0; k <= 200; ++k) sum += poisson_pmf(t, k) * (t * f[k + 1] - static_cast<double>(k) * f[k]);
      EXPECT_LT(std::fabs(static_cast<double>(sum)), 1e-8);
    }
  }
}

TEST(TotalVariation, Examples) {
  SplitMix64 rng(15);
  const auto d = random_law(rng, 5);
  EXPECT_EQ(tv_distance(d, d), 0.0);
  EXPECT_EQ(tv_distance(point_mass(0, 4), point_mass(1, 4)), 1.0);
  CountDistribution half(3);
  half[0] = 0.5;
  half[1] = 0.5;
  EXPECT_EQ(tv_distance(half, point_mass(0, 3)), 0.5);
  EXPECT_THROW(tv_distance(point_mass(0, 3), point_mass(0, 4)), ValidationError);
  CountDistribution bad(3);
  bad[0] = 0.7;
  EXPECT_THROW(tv_distance(bad, point_mass(0, 3)), ValidationError);
  ExactCountDistribution a(2), b(2);
  a[0] = Rational(1, 3);
  a[1] = Rational(2, 3);
  b[1] = 1;
  EXPECT_EQ(tv_distance(a, b), Rational(1, 3));
}

TEST(TotalVariation, EqualsSupOverEvents) {
  SplitMix64 rng(16);
  for (std::size_t cap = 0; cap <= 10; ++cap) {
    for (int rep = 0; rep < 3; ++rep) {
      const auto p = random_law(rng, cap);
      const auto q = random_law(rng, cap);
      const std::size_t cells = cap + 2;
      double best = 0.0;
      for (std::uint32_t mask = 0; mask < (1u << cells); ++mask) {
        double diff = 0.0;
        for (std::size_t k = 0; k < cells; ++k) {
          if (mask >> k & 1u) diff += p[k] - q[k];
        }
        best = std::max(best, std::fabs(diff));
      }
      EXPECT_NEAR(tv_distance(p, q), best, 1e-14);
      EXPECT_EQ(tv_distance(p, q), tv_distance(q, p));
    }
  }
}

TEST(ChenStein, ZeroAlphaExample) {
  const auto zero = [](std::uint64_t) { return 0.0; };
  const auto b = chen_stein_bound(0.01, 2, zero, zero, 100);
  EXPECT_EQ(b.delta, 3u);
  EXPECT_NEAR(b.value, 0.03 * (1.0 + std::log(100.0)), 1e-12);
  EXPECT_NEAR(b.value, 0.1682, 1e-4);
  EXPECT_EQ(b.scanned, 97u);
  EXPECT_THROW(chen_stein_bound(0.01, 2, zero, zero, 3), ValidationError);
  EXPECT_THROW(chen_stein_bound(0.0, 2, zero, zero, 100), ValidationError);
}

TEST(ChenStein, MatchesBruteForce) {
  const auto alpha = [](std::uint64_t d) { return std::pow(4.0, -static_cast<double>(d)); };
  const auto zero = [](std::uint64_t) { return 0.0; };
  const auto b = chen_stein_bound(0.01, 1, alpha, zero, 100);
  double best = 1e300;
  std::uint64_t arg = 0;
  for (std::uint64_t d = 2; d <= 99; ++d) {
    const double v = (alpha(d) / 0.01 + 0.01 * static_cast<double>(d)) * (1.0 + std::log(100.0));
    if (v < best) {
      best = v;
      arg = d;
    }
  }
  EXPECT_EQ(b.delta, arg);
  EXPECT_NEAR(b.value, best, 1e-12);
  EXPECT_NEAR(b.value, (b.alpha_term + b.delta_term + b.short_return_term) * b.log_factor, 1e-15);
}

TEST(ChenStein, MonotoneInAlpha) {
  SplitMix64 rng(17);
  for (int rep = 0; rep < 20; ++rep) {
    const double mu = 0.001 + 0.05 * rng.uniform_open();
    const double rate = 0.2 + 0.7 * rng.uniform_open();
    const double scale = rng.uniform_open();
    const double sr = 0.3 * rng.uniform_open();
    const auto big = [&](std::uint64_t d) { return std::pow(rate, static_cast<double>(d)); };
    const auto small = [&](std::uint64_t d) { return scale * std::pow(rate, static_cast<double>(d)); };
    const auto ret = [&](std::uint64_t d) { return std::min(1.0, sr * (1.0 - std::pow(0.5, static_cast<double>(d)))); };
    const std::uint64_t tau = 1 + rng.next() % 5;
    const std::uint64_t m = tau + 2 + rng.next() % 2000;
    EXPECT_LE(chen_stein_bound(mu, tau, small, ret, m).value, chen_stein_bound(mu, tau, big, ret, m).value);
  }
}

TEST(ChenStein, EarlyExitKeepsMinimizer) {
  const auto alpha = [](std::uint64_t d) { return std::pow(0.9, static_cast<double>(d)); };
  const auto ret = [](std::uint64_t d) { return 0.1 * (1.0 - std::pow(0.5, static_cast<double>(d))); };
  const double mu = 1e-6;
  const auto b = chen_stein_bound(mu, 3, alpha, ret, 2'000'000);
  EXPECT_LT(b.scanned, 2'000'000u - 4);
  double best = 1e300;
  std::uint64_t arg = 0;
  for (std::uint64_t d = 4; d < 2'000'000; ++d) {
    const double v = alpha(d) / mu + static_cast<double>(d) * mu + ret(d);
    if (v < best) {
      best = v;
      arg = d;
    }
  }
  EXPECT_EQ(b.delta, arg);
}
