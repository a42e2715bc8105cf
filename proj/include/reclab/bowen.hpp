#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "reclab/arcs.hpp"
#include "reclab/rational.hpp"
#include "reclab/systems.hpp"

namespace reclab {

// Longest Bowen ball handled for the doubling map: the radius ε·2^{-(n-1)}
// must stay well above double resolution.
inline constexpr int kMaxDoublingLength = 48;

// B_{ε,n}(x) = {y : d(T^k x, T^k y) < ε for 0 ≤ k < n}.
class BowenBall {
 public:
  BowenBall(MetricSystem system, MetricPoint center, double eps, int n);

  const MetricSystem& system() const { return system_; }
  const MetricPoint& center() const { return center_; }
  double center_value() const { return center_orbit_.front(); }
  double eps() const { return eps_; }
  int length() const { return n_; }

  // T^k x for 0 ≤ k < n.
  const std::vector<double>& center_orbit() const { return center_orbit_; }

  // True iff d(T^k x, y_k) < ε for every k, given y_k = T^k y.
  bool contains_orbit(std::span<const double> y_orbit) const;

  // Exact rational center for the arc backend (doubling only).
  Rational exact_center() const;

 private:
  MetricSystem system_;
  MetricPoint center_;
  double eps_;
  int n_;
  std::vector<double> center_orbit_;
};

bool contains(const BowenBall& ball, double y);

// ---------------------------------------------------------------------------
// Exact doubling-map geometry
// ---------------------------------------------------------------------------

// The ball as a union of open arcs, built by intersecting the n preimage
// constraints. Requires the doubling map and ε < 1/2.
ArcSet doubling_ball_arcs(const BowenBall& ball);

struct ExactDoubling {};

struct MonteCarlo {
  std::uint64_t samples = 1'000'000;
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

using MeasureMethod = std::variant<ExactDoubling, MonteCarlo>;

struct MeasureEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
  std::optional<Rational> exact;  // set by the exact backend
  std::uint64_t hits = 0;         // Monte Carlo only
  std::uint64_t samples = 0;
};

// μ(B_{ε,n}(x)). The exact backend needs the doubling map with ε < 1/4, where
// the ball is a single arc of radius ε·2^{-(n-1)}; Monte Carlo returns the hit
// frequency of invariant-measure samples with its binomial standard error.
MeasureEstimate ball_measure(const BowenBall& ball, const MeasureMethod& method);

// R_{ε,n}(x) = min{j ≥ 1 : T^j x ∈ B_{ε,n}(x)}, or nullopt if no return by cap.
std::optional<std::uint64_t> recurrence_time(const MetricSystem& system, const MetricPoint& x, double eps, int n,
                                             std::uint64_t cap);

struct SampledPeriod {
  std::uint64_t samples = 4096;
  std::uint64_t seed = 0;
  std::uint64_t max_steps = 0;  // 0: 4n + 64
};

using PeriodMethod = std::variant<ExactDoubling, SampledPeriod>;

struct BallPeriod {
  std::uint64_t lower = 1;
  std::optional<std::uint64_t> upper;  // nullopt: no sampled point returned
  bool certified = false;
};

// τ(B) = min{k ≥ 1 : T^{-k}B ∩ B ≠ ∅}. Exact for the doubling map by pushing
// the ball's arcs forward; sampled mode only certifies an upper bound.
BallPeriod ball_period(const BowenBall& ball, const PeriodMethod& method);

struct EntropyEstimate {
  double brin_katok = 0.0;
  std::optional<double> varandas;  // nullopt when the recurrence overflowed
  std::optional<std::uint64_t> recurrence;
  double measure = 0.0;
};

// (1/n)|log μ(B_{ε,n}(x))| and (1/n) log R_{ε,n}(x), natural logarithms.
EntropyEstimate entropy_estimates(const MetricSystem& system, const MetricPoint& x, double eps, int n,
                                  const MeasureMethod& measure_method, std::uint64_t cap);

// ---------------------------------------------------------------------------
// Cylinder approximations for the doubling map with the dyadic partition
// ---------------------------------------------------------------------------

// Contiguous run of depth-N dyadic cylinders [j 2^-N, (j+1) 2^-N).
struct IndexRange {
  std::uint64_t first = 0;
  std::uint64_t count = 0;

  friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

struct CylinderApproximation {
  int n = 0;
  int depth = 0;  // N
  std::vector<IndexRange> inner;     // cylinders inside the ball
  std::vector<std::uint64_t> boundary;  // cylinders meeting the ball but not inside it
  std::vector<IndexRange> outer;     // every cylinder meeting the ball

  Rational mu_ball;
  Rational mu_inner;
  Rational mu_boundary;

  // μ(boundary) / μ(ball).
  double theta_hat() const;
  // 2t·θ̂, the bound on |Θ_{B,m}(k) − Θ_{B̃,m̃}(k)|.
  double gap_bound(double t) const;

  std::uint64_t inner_count() const;
  std::uint64_t outer_count() const;
};

// The depth-N word of cylinder j: its N binary digits.
Word dyadic_word(std::uint64_t index, int depth);

CylinderApproximation cylinder_approximation(const BowenBall& ball, int depth);

// Number of depth-n dyadic cylinders that meet the ball.
std::uint64_t count_intersecting_cylinders(const BowenBall& ball, int depth);

// ψ(ε, δ, x) = (μ B(x, ε+δ) − μ B(x, ε−δ)) / μ B(x, ε) for metric balls of the
// doubling map.
double annulus_ratio(double x, double eps, double delta);

}  // namespace reclab
