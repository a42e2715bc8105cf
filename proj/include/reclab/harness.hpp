#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "reclab/bowen.hpp"
#include "reclab/count_distribution.hpp"
#include "reclab/stein.hpp"
#include "reclab/symbolic.hpp"
#include "reclab/systems.hpp"

namespace reclab {

using SystemSpec = std::variant<MetricSystem, MarkovShift>;

struct CylinderTarget {
  CylinderSet cylinders;
};

// Bowen ball B_{ε,n}(x); without a center, x is drawn from μ afresh for every
// trial and μ̂, m are recomputed per center.
struct BallTarget {
  double eps = 0.1;
  int n = 8;
  std::optional<double> center;
};

using TargetSpec = std::variant<CylinderTarget, BallTarget>;

// max(32, ⌈8t⌉).
std::size_t default_cap(double t);

struct ExperimentConfig {
  SystemSpec system = MetricSystem(MapKind::doubling);
  TargetSpec target = BallTarget{};
  double t = 1.0;
  std::uint64_t trials = 10'000;
  std::uint64_t seed = 0;
  std::optional<std::size_t> cap;  // default_cap(t) when unset
  unsigned workers = 1;
  // Monte Carlo sample count for ball measures without an exact backend.
  std::uint64_t measure_samples = 1'000'000;
  // Attach the transfer-DP law for cylinder targets.
  bool exact_oracle = true;
  HitDistributionOptions oracle_options{};
  // Evaluate the Chen–Stein bound for cylinder targets.
  bool chen_stein = false;
};

struct CenterSummary {
  double m_min = 0.0;
  double m_median = 0.0;
  double m_max = 0.0;
  double mu_mean = 0.0;
};

struct ExperimentReport {
  std::size_t n = 0;
  double t = 0.0;
  std::uint64_t m = 0;  // median over centers for per-trial centers
  double mu_hat = 0.0;
  std::optional<Rational> mu_exact;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  std::size_t cap = 0;

  std::vector<std::uint64_t> counts;  // per cell, overflow last
  CountDistribution empirical;
  std::optional<CountDistribution> exact;
  CountDistribution poisson;

  double tv_emp_poisson = 0.0;
  std::optional<double> tv_exact_poisson;
  std::optional<double> tv_emp_exact;

  // Per cell against the reference law (exact when present, Poisson otherwise):
  // σ_k = sqrt(max(p_k(1 - p_k), 1/trials) / trials) and z_k = (emp_k - p_k)/σ_k.
  std::vector<double> standard_error;
  std::vector<double> z;
  double max_abs_z = 0.0;

  double mean_w = 0.0;
  double var_w = 0.0;
  double expected_mean = 0.0;  // average of m·μ over trials
  double mean_z = 0.0;          // (mean_w - expected_mean) / sqrt(var_w / trials)

  std::optional<int> period;
  std::optional<ChenSteinBound> chen_stein;
  std::optional<CenterSummary> centers;
};

// Σ_{j=1}^m χ(T^j x): the sum starts at j = 1.
std::uint64_t count_visits(const MetricSystem& system, const MetricPoint& x, const std::function<bool(double)>& member,
                           std::uint64_t m);

// Visits of the shifted word: positions j = 1..m with x[j, j+n) ∈ A. The word
// must hold at least m + n symbols.
std::uint64_t count_visits(std::span<const Symbol> x, const CylinderSet& cyl, std::uint64_t m);

// Visits T^j x ∈ B for j = 1..m, comparing the whole n-step window.
std::uint64_t count_ball_visits(const BowenBall& ball, const MetricPoint& x, std::uint64_t m);

// m = round(t/μ), at least 1.
std::uint64_t kac_length(double t, double mu);

// Trial i draws its point from derive_seed(seed, 2i) and, for per-trial ball
// centers, its center from derive_seed(seed, 2i+1); the report does not depend
// on `workers`.
ExperimentReport run_experiment(const ExperimentConfig& config);

struct SummaryRow {
  std::size_t n = 0;
  std::uint64_t m = 0;
  double mu_hat = 0.0;
  double t = 0.0;
  double tv_emp_poisson = 0.0;
  std::optional<double> tv_exact_poisson;
  double max_z = 0.0;
  std::optional<double> chen_stein_value;
};

SummaryRow compare_to_poisson(const ExperimentReport& report);

// Per-cell z-scores of an empirical law against a reference law.
std::vector<double> cell_z_scores(const CountDistribution& empirical, const CountDistribution& reference,
                                  std::uint64_t trials);

// Chen–Stein bound for a cylinder target of a Markov shift: α from the one-cell
// mixing coefficient, ℙ_A(τ_A ≤ Δ) from the exact return curve.
ChenSteinBound cylinder_chen_stein(const MarkovShift& shift, const CylinderSet& cyl, std::uint64_t m);

}  // namespace reclab
