#include <gtest/gtest.h>

#include <cmath>

#include "reclab/errors.hpp"
#include "reclab/harness.hpp"
#include "reclab/io.hpp"

using namespace reclab;

namespace {

ExperimentConfig coin_config(const char* word, std::uint64_t trials, std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.system = MarkovShift::full_shift(2);
  cfg.target = CylinderTarget{CylinderSet({parse_word(word)})};
  cfg.t = 1.0;
  cfg.trials = trials;
  cfg.seed = seed;
  return cfg;
}

Word nonoverlapping(int n) {
  Word w(static_cast<std::size_t>(n - 1), 0);
  w.push_back(1);
  return w;
}

}  // namespace

TEST(CountVisits, Examples) {
  const MetricSystem doubling(MapKind::doubling);
  const double third = 1.0 / 3.0;
  const auto near_third = [&](double y) { return doubling.distance(y, third) < 0.01; };
  EXPECT_EQ(count_visits(doubling, third, near_third, 4), 2u);
  EXPECT_EQ(count_visits(doubling, third, near_third, 0), 0u);

  const Word x = parse_word("011011011");
  const CylinderSet ones({parse_word("1")});
  EXPECT_EQ(count_visits(x, ones, 5), 4u);
  EXPECT_EQ(count_visits(x, ones, 0), 0u);
  EXPECT_THROW(count_visits(x, ones, 9), ValidationError);

  const BowenBall ball(doubling, third, 0.01, 3);
  EXPECT_EQ(count_ball_visits(ball, third, 6), 3u);
}

TEST(CountVisits, BallVisitsAgreeWithMembership) {
  const MetricSystem doubling(MapKind::doubling);
  const BowenBall ball(doubling, 0.3, 0.1, 3);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const MetricPoint x = doubling.sample_point(seed);
    const auto direct = count_visits(doubling, x, [&](double y) { return contains(ball, y); }, 200);
    EXPECT_EQ(count_ball_visits(ball, x, 200), direct);
  }
}

TEST(KacLength, Rounding) {
  EXPECT_EQ(kac_length(1.0, 1.0 / 16), 16u);
  EXPECT_EQ(kac_length(1.0, 0.3), 3u);
  EXPECT_THROW(kac_length(1.0, 0.0), DomainError);
  EXPECT_THROW(kac_length(0.1, 0.9), ValidationError);
  EXPECT_EQ(default_cap(1.0), 32u);
  EXPECT_EQ(default_cap(10.0), 80u);
}

TEST(RunExperiment, CoinWordMatchesOracle) {
  const auto r = run_experiment(coin_config("0110", 100'000, 7));
  EXPECT_EQ(r.m, 16u);
  EXPECT_EQ(*r.period, 3);
  ASSERT_TRUE(r.tv_emp_exact.has_value());
  EXPECT_LT(*r.tv_emp_exact, 0.01);
  EXPECT_LT(*r.tv_emp_exact, 3.0 * std::sqrt(static_cast<double>(r.cap) / 1e5));
  EXPECT_LT(std::fabs(r.mean_z), 4.0);
  EXPECT_EQ(r.expected_mean, 1.0);
  double total = 0.0;
  for (double v : r.empirical.cells()) total += v;
  EXPECT_NEAR(total, 1.0, 1e-12);
  std::uint64_t count_total = 0;
  for (auto c : r.counts) count_total += c;
  EXPECT_EQ(count_total, 100'000u);
}

TEST(RunExperiment, DeterministicAcrossWorkers) {
  auto cfg = coin_config("0001", 20'000, 3);
  cfg.chen_stein = true;
  const std::string base = report_to_json(run_experiment(cfg)).dump();
  for (unsigned w : {2u, 8u}) {
    cfg.workers = w;
    EXPECT_EQ(report_to_json(run_experiment(cfg)).dump(), base);
  }

  ExperimentConfig ball;
  ball.system = MetricSystem(MapKind::doubling);
  ball.target = BallTarget{0.1, 6, std::nullopt};
  ball.trials = 2'000;
  ball.seed = 11;
  const std::string ball_base = report_to_json(run_experiment(ball)).dump();
  ball.workers = 8;
  EXPECT_EQ(report_to_json(run_experiment(ball)).dump(), ball_base);
}

TEST(RunExperiment, MeanAndOracleGates) {
  const MarkovShift chain = MarkovShift::from_rational({{Rational(7, 10), Rational(3, 10)}, {Rational(3, 5), Rational(2, 5)}});
  for (const char* w : {"01", "110", "0101"}) {
    ExperimentConfig cfg;
    cfg.system = chain;
    cfg.target = CylinderTarget{CylinderSet({parse_word(w)})};
    cfg.t = 2.0;
    cfg.trials = 20'000;
    cfg.seed = 99;
    const auto r = run_experiment(cfg);
    EXPECT_LT(std::fabs(r.mean_z), 4.0) << w;
    EXPECT_LT(*r.tv_emp_exact, 3.0 * std::sqrt(static_cast<double>(r.cap) / 2e4)) << w;
  }
}

TEST(RunExperiment, PoissonTrendInWordLength) {
  double tv4 = 0.0, tv10 = 0.0;
  for (int n : {4, 10}) {
    ExperimentConfig cfg;
    cfg.system = MarkovShift::full_shift(2);
    cfg.target = CylinderTarget{CylinderSet({nonoverlapping(n)})};
    cfg.trials = 1'000;
    cfg.seed = 5;
    (n == 4 ? tv4 : tv10) = *run_experiment(cfg).tv_exact_poisson;
  }
  EXPECT_LT(tv10, tv4);
}

TEST(RunExperiment, BallTargets) {
  ExperimentConfig cfg;
  cfg.system = MetricSystem(MapKind::doubling);
  cfg.target = BallTarget{0.1, 6, 0.3};
  cfg.trials = 20'000;
  cfg.seed = 4;
  const auto r = run_experiment(cfg);
  EXPECT_EQ(r.m, 160u);
  EXPECT_TRUE(r.mu_exact.has_value());
  EXPECT_LT(std::fabs(r.mean_z), 4.0);
  EXPECT_FALSE(r.exact.has_value());

  cfg.target = BallTarget{0.1, 6, std::nullopt};
  const auto q = run_experiment(cfg);
  ASSERT_TRUE(q.centers.has_value());
  EXPECT_EQ(q.centers->m_min, 160.0);
  EXPECT_EQ(q.centers->m_max, 160.0);
  EXPECT_LT(std::fabs(q.mean_z), 4.0);

  cfg.system = MetricSystem(MapKind::gauss);
  cfg.target = BallTarget{0.1, 3, 0.4};
  cfg.trials = 2'000;
  cfg.measure_samples = 100'000;
  const auto g = run_experiment(cfg);
  EXPECT_GT(g.m, 1u);
  EXPECT_FALSE(g.mu_exact.has_value());
}

// A periodic center clusters its visits; the report is produced but nothing
// about its shape is asserted beyond being a valid law.
TEST(RunExperiment, PeriodicCenterControl) {
  ExperimentConfig cfg;
  cfg.system = MetricSystem(MapKind::doubling);
  cfg.target = BallTarget{0.1, 8, 1.0 / 3.0};
  cfg.trials = 5'000;
  cfg.seed = 2;
  const auto r = run_experiment(cfg);
  EXPECT_GE(r.tv_emp_poisson, 0.0);
  EXPECT_LE(r.tv_emp_poisson, 1.0);
  std::cout << "periodic center: tv_emp_poisson = " << r.tv_emp_poisson << "\n";
}

TEST(RunExperiment, Errors) {
  auto cfg = coin_config("01", 10, 1);
  cfg.t = 0.0;
  EXPECT_THROW(run_experiment(cfg), ValidationError);
  cfg = coin_config("01", 0, 1);
  EXPECT_THROW(run_experiment(cfg), ValidationError);
  cfg = coin_config("01", 10, 1);
  cfg.system = MetricSystem(MapKind::doubling);
  EXPECT_THROW(run_experiment(cfg), ValidationError);
  cfg = coin_config("11", 10, 1);
  cfg.system = MarkovShift::golden_mean();
  EXPECT_THROW(run_experiment(cfg), DomainError);
  cfg = coin_config("0110", 10, 1);
  cfg.oracle_options.budget = 10;
  EXPECT_THROW(run_experiment(cfg), BudgetExceeded);
}

TEST(ComparePoisson, SyntheticExact) {
  auto r = run_experiment(coin_config("0001", 1'000, 1));
  r.exact = r.poisson;
  r.tv_exact_poisson = 0.0;
  const auto row = compare_to_poisson(r);
  EXPECT_EQ(*row.tv_exact_poisson, 0.0);
  EXPECT_EQ(row.n, 4u);
  EXPECT_EQ(row.m, 16u);
}

TEST(ComparePoisson, WithoutOracle) {
  auto cfg = coin_config("0001", 1'000, 1);
  cfg.exact_oracle = false;
  const auto r = run_experiment(cfg);
  const auto row = compare_to_poisson(r);
  EXPECT_FALSE(row.tv_exact_poisson.has_value());
  EXPECT_FALSE(row.chen_stein_value.has_value());
  EXPECT_GT(row.tv_emp_poisson, 0.0);
  const Json j = report_to_json(r);
  EXPECT_TRUE(j["exact"].is_null());
  EXPECT_TRUE(j["tv_exact_poisson"].is_null());
}

TEST(ComparePoisson, Bootstrap) {
  const auto law = exact_hit_distribution(MarkovShift::full_shift(2), CylinderSet({parse_word("0110")}), 16);
  std::vector<double> cdf;
  double acc = 0.0;
  for (double p : law.cells()) cdf.push_back(acc += p);
  SplitMix64 rng(8);
  const std::uint64_t N = 10'000;
  int below = 0;
  for (int rep = 0; rep < 100; ++rep) {
    CountDistribution emp(law.cap());
    for (std::uint64_t i = 0; i < N; ++i) {
      const double u = rng.uniform_open() * acc;
      const auto k = static_cast<std::size_t>(std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
      emp[std::min(k, emp.cell_count() - 1)] += 1.0 / static_cast<double>(N);
    }
    double max_z = 0.0;
    for (double z : cell_z_scores(emp, law, N)) max_z = std::max(max_z, std::fabs(z));
    below += max_z < 4.0;
  }
  EXPECT_GE(below, 99);
}

TEST(ChenSteinHarness, CylinderBound) {
  const auto b = cylinder_chen_stein(MarkovShift::full_shift(2), CylinderSet({parse_word("0001")}), 16);
  EXPECT_EQ(b.tau, 4u);
  EXPECT_EQ(b.alpha_term, 0.0);
  EXPECT_GT(b.delta, 4u);
  EXPECT_LT(b.delta, 16u);
  EXPECT_NEAR(b.value, (b.alpha_term + b.delta_term + b.short_return_term) * b.log_factor, 1e-15);
  EXPECT_THROW(cylinder_chen_stein(MarkovShift::full_shift(2), CylinderSet({parse_word("0001")}), 5), ValidationError);
}
