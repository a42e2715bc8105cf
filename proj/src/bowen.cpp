#include "reclab/bowen.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <string>

#include "reclab/errors.hpp"
#include "reclab/parallel.hpp"
#include "reclab/random.hpp"

namespace reclab {

namespace {

void require_doubling(const MetricSystem& system, const char* what) {
  if (system.kind() != MapKind::doubling) {
    throw ValidationError(std::string(what) + " needs the exact doubling-map backend");
  }
}

Rational pow2(int k) { return Rational(BigInt(1) << k); }

}  // namespace

// ---------------------------------------------------------------------------
// Balls
// ---------------------------------------------------------------------------

BowenBall::BowenBall(MetricSystem system, MetricPoint center, double eps, int n)
    : system_(system), center_(std::move(center)), eps_(eps), n_(n) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw ValidationError("ball radius must be positive");
  if (n < 1) throw ValidationError("ball length must be at least 1");
  if (system_.kind() == MapKind::doubling && n > kMaxDoublingLength) {
    throw ValidationError("doubling-map balls are limited to n <= " + std::to_string(kMaxDoublingLength));
  }
  OrbitCursor cursor(system_, center_);
  center_orbit_.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    if (k > 0) cursor.advance();
    center_orbit_.push_back(cursor.value());
  }
}

bool BowenBall::contains_orbit(std::span<const double> y_orbit) const {
  if (y_orbit.size() < center_orbit_.size()) throw ValidationError("orbit segment shorter than the ball length");
  for (std::size_t k = 0; k < center_orbit_.size(); ++k) {
    if (!(system_.distance(center_orbit_[k], y_orbit[k]) < eps_)) return false;
  }
  return true;
}

Rational BowenBall::exact_center() const {
  require_doubling(system_, "an exact center");
  if (const double* x = std::get_if<double>(&center_)) return exact_rational(*x);
  const auto& b = std::get<BinaryExpansion>(center_);
  const int bits = n_ + 64;
  BigInt num = 0;
  for (int i = 1; i <= bits; ++i) num = (num << 1) + (b.bit(static_cast<std::uint64_t>(i)) ? 1 : 0);
  return Rational(num) / pow2(bits);
}

bool contains(const BowenBall& ball, double y) {
  const MetricSystem& sys = ball.system();
  if (!sys.in_domain(y)) {
    throw DomainError("point " + std::to_string(y) + " outside the domain of the " + std::string(sys.name()) + " map");
  }
  const auto& c = ball.center_orbit();
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (k > 0) y = sys.map(y);
    if (!(sys.distance(c[k], y) < ball.eps())) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Exact arcs
// ---------------------------------------------------------------------------

ArcSet doubling_ball_arcs(const BowenBall& ball) {
  require_doubling(ball.system(), "exact ball geometry");
  if (!(ball.eps() < 0.5)) throw DomainError("eps too large for the exact arc backend (needs eps < 1/2)");
  const Rational c = ball.exact_center();
  const Rational eps = exact_rational(ball.eps());
  ArcSet arcs = ArcSet::ball(c, eps);
  for (int k = 1; k < ball.length(); ++k) {
    arcs = arcs.intersect_preimage(k, frac(c * pow2(k)), eps);
  }
  return arcs;
}

MeasureEstimate ball_measure(const BowenBall& ball, const MeasureMethod& method) {
  MeasureEstimate out;
  if (std::holds_alternative<ExactDoubling>(method)) {
    require_doubling(ball.system(), "exact ball measure");
    if (!(ball.eps() < 0.25)) throw DomainError("eps too large for the exact measure backend (needs eps < 1/4)");
    out.exact = doubling_ball_arcs(ball).measure();
    out.estimate = to_double(*out.exact);
    return out;
  }

  const auto& mc = std::get<MonteCarlo>(method);
  if (mc.samples == 0) throw ValidationError("Monte Carlo needs at least one sample");
  const MetricSystem& sys = ball.system();
  const int n = ball.length();
  auto partial = parallel_ranges(mc.samples, mc.workers, [&](std::uint64_t begin, std::uint64_t end) {
    std::uint64_t hits = 0;
    std::vector<double> y(static_cast<std::size_t>(n));
    for (std::uint64_t i = begin; i < end; ++i) {
      const MetricPoint p = sys.sample_point(derive_seed(mc.seed, i));
      bool inside = true;
      if (const auto* b = std::get_if<BinaryExpansion>(&p)) {
        for (int k = 0; k < n && inside; ++k) {
          inside = sys.distance(ball.center_orbit()[static_cast<std::size_t>(k)],
                                sys.binary_orbit_value(*b, static_cast<std::uint64_t>(k))) < ball.eps();
        }
      } else {
        inside = contains(ball, std::get<double>(p));
      }
      hits += inside;
    }
    return hits;
  });
  for (auto h : partial) out.hits += h;
  out.samples = mc.samples;
  const double p = static_cast<double>(out.hits) / static_cast<double>(mc.samples);
  out.estimate = p;
  out.standard_error = std::sqrt(p * (1.0 - p) / static_cast<double>(mc.samples));
  return out;
}

// ---------------------------------------------------------------------------
// Recurrence and period
// ---------------------------------------------------------------------------

std::optional<std::uint64_t> recurrence_time(const MetricSystem& system, const MetricPoint& x, double eps, int n,
                                             std::uint64_t cap) {
  if (cap < 1) throw ValidationError("recurrence cap must be at least 1");
  const BowenBall ball(system, x, eps, n);
  const auto& c = ball.center_orbit();
  OrbitCursor cursor(system, x);
  // window holds T^j x, ..., T^{j+n-1} x.
  std::deque<double> window;
  for (int k = 0; k < n; ++k) {
    cursor.advance();
    window.push_back(cursor.value());
  }
  for (std::uint64_t j = 1; j <= cap; ++j) {
    bool inside = true;
    for (std::size_t k = 0; k < c.size() && inside; ++k) inside = system.distance(c[k], window[k]) < eps;
    if (inside) return j;
    window.pop_front();
    cursor.advance();
    window.push_back(cursor.value());
  }
  return std::nullopt;
}

BallPeriod ball_period(const BowenBall& ball, const PeriodMethod& method) {
  BallPeriod out;
  if (std::holds_alternative<ExactDoubling>(method)) {
    const ArcSet arcs = doubling_ball_arcs(ball);
    if (arcs.empty()) throw DomainError("empty ball has no period");
    ArcSet image = arcs;
    for (std::uint64_t k = 1;; ++k) {
      image = image.doubled();
      if (image.intersects(arcs)) {
        out.lower = k;
        out.upper = k;
        out.certified = true;
        return out;
      }
    }
  }

  const auto& sp = std::get<SampledPeriod>(method);
  if (sp.samples == 0) throw ValidationError("sampled period needs at least one sample");
  const MetricSystem& sys = ball.system();
  const int n = ball.length();
  const std::uint64_t steps = sp.max_steps ? sp.max_steps : static_cast<std::uint64_t>(4 * n + 64);
  const double x = ball.center_value();
  SplitMix64 rng(sp.seed);

  // Shrink a proposal window around the center until a fair share of pilot
  // points lands in the ball.
  auto propose = [&](double half_width) {
    double y = x + (2.0 * rng.uniform() - 1.0) * half_width;
    if (sys.kind() == MapKind::doubling) {
      y -= std::floor(y);
    } else {
      y = std::clamp(y, std::nextafter(0.0, 1.0), sys.kind() == MapKind::gauss ? std::nextafter(1.0, 0.0) : 1.0);
    }
    return y;
  };
  double width = ball.eps();
  while (width > 1e-15) {
    int inside = 0;
    for (int i = 0; i < 64; ++i) inside += contains(ball, propose(width));
    if (inside >= 8) break;
    width *= 0.5;
  }

  std::vector<double> orbit_buf(static_cast<std::size_t>(n));
  for (std::uint64_t i = 0; i < sp.samples; ++i) {
    const double y = propose(width);
    if (!contains(ball, y)) continue;
    std::deque<double> window;
    double cur = y;
    try {
      for (int k = 0; k < n; ++k) {
        cur = sys.map(cur);
        window.push_back(cur);
      }
      const std::uint64_t limit = out.upper ? std::min(*out.upper - 1, steps) : steps;
      for (std::uint64_t k = 1; k <= limit; ++k) {
        std::copy(window.begin(), window.end(), orbit_buf.begin());
        if (ball.contains_orbit(orbit_buf)) {
          out.upper = k;
          break;
        }
        window.pop_front();
        cur = sys.map(cur);
        window.push_back(cur);
      }
    } catch (const DomainError&) {
      // Orbit hit a point where the map is undefined; drop the sample.
    }
  }
  out.lower = 1;
  out.certified = false;
  return out;
}

EntropyEstimate entropy_estimates(const MetricSystem& system, const MetricPoint& x, double eps, int n,
                                  const MeasureMethod& measure_method, std::uint64_t cap) {
  const BowenBall ball(system, x, eps, n);
  const MeasureEstimate mu = ball_measure(ball, measure_method);
  if (!(mu.estimate > 0.0)) throw DomainError("ball measure estimate is zero; increase the sample count");
  EntropyEstimate out;
  out.measure = mu.estimate;
  out.brin_katok = std::fabs(std::log(mu.estimate)) / n;
  out.recurrence = recurrence_time(system, x, eps, n, cap);
  if (out.recurrence) out.varandas = std::log(static_cast<double>(*out.recurrence)) / n;
  return out;
}

// ---------------------------------------------------------------------------
// Dyadic cylinder approximations
// ---------------------------------------------------------------------------

Word dyadic_word(std::uint64_t index, int depth) {
  Word w(static_cast<std::size_t>(depth));
  for (int i = 0; i < depth; ++i) w[static_cast<std::size_t>(i)] = (index >> (depth - 1 - i)) & 1u;
  return w;
}

namespace {

struct DyadicCover {
  std::vector<IndexRange> inner;
  std::vector<IndexRange> outer;
  std::vector<std::uint64_t> boundary;
};

// Adds the lifted index range [lo, hi] (inclusive, may leave [0, 2^N)) as
// ranges reduced modulo 2^N.
void add_range(std::vector<IndexRange>& out, const BigInt& lo, const BigInt& hi, const BigInt& modulus) {
  if (hi < lo) return;
  BigInt count = hi - lo + 1;
  if (count >= modulus) {
    out.push_back({0, modulus.convert_to<std::uint64_t>()});
    return;
  }
  BigInt start = lo % modulus;
  if (start < 0) start += modulus;
  const BigInt first_part = std::min<BigInt>(count, modulus - start);
  out.push_back({start.convert_to<std::uint64_t>(), first_part.convert_to<std::uint64_t>()});
  if (first_part < count) out.push_back({0, (count - first_part).convert_to<std::uint64_t>()});
}

std::vector<IndexRange> merge_ranges(std::vector<IndexRange> r) {
  std::sort(r.begin(), r.end(), [](const IndexRange& a, const IndexRange& b) { return a.first < b.first; });
  std::vector<IndexRange> out;
  for (const auto& x : r) {
    if (x.count == 0) continue;
    if (!out.empty() && x.first <= out.back().first + out.back().count) {
      const std::uint64_t end = std::max(out.back().first + out.back().count, x.first + x.count);
      out.back().count = end - out.back().first;
    } else {
      out.push_back(x);
    }
  }
  return out;
}

bool in_ranges(const std::vector<IndexRange>& r, std::uint64_t j) {
  for (const auto& x : r) {
    if (j >= x.first && j < x.first + x.count) return true;
  }
  return false;
}

std::uint64_t total_count(const std::vector<IndexRange>& r) {
  std::uint64_t n = 0;
  for (const auto& x : r) n += x.count;
  return n;
}

DyadicCover dyadic_cover(const ArcSet& arcs, int depth) {
  const BigInt modulus = BigInt(1) << depth;
  const Rational scale(modulus);
  DyadicCover cover;
  std::set<std::uint64_t> boundary;
  for (const Arc& a : arcs.arcs()) {
    if (a.full()) {
      cover.inner.push_back({0, modulus.convert_to<std::uint64_t>()});
      cover.outer.push_back({0, modulus.convert_to<std::uint64_t>()});
      continue;
    }
    const Rational lo = a.start * scale;
    const Rational hi = (a.start + a.length) * scale;
    const BigInt meet_lo = floor_int(lo);
    const BigInt meet_hi = ceil_int(hi) - 1;
    const BigInt in_lo = ceil_int(lo);
    const BigInt in_hi = floor_int(hi) - 1;
    add_range(cover.outer, meet_lo, meet_hi, modulus);
    add_range(cover.inner, in_lo, in_hi, modulus);
    for (BigInt j = meet_lo; j <= meet_hi; ++j) {
      if (j >= in_lo && j <= in_hi) {
        j = in_hi;  // skip the interior run
        continue;
      }
      BigInt r = j % modulus;
      if (r < 0) r += modulus;
      boundary.insert(r.convert_to<std::uint64_t>());
    }
  }
  cover.inner = merge_ranges(std::move(cover.inner));
  cover.outer = merge_ranges(std::move(cover.outer));
  for (std::uint64_t j : boundary) {
    if (!in_ranges(cover.inner, j)) cover.boundary.push_back(j);
  }
  return cover;
}

}  // namespace

double CylinderApproximation::theta_hat() const { return to_double(mu_boundary / mu_ball); }

double CylinderApproximation::gap_bound(double t) const { return 2.0 * t * theta_hat(); }

std::uint64_t CylinderApproximation::inner_count() const { return total_count(inner); }

std::uint64_t CylinderApproximation::outer_count() const { return total_count(outer); }

CylinderApproximation cylinder_approximation(const BowenBall& ball, int depth) {
  require_doubling(ball.system(), "cylinder approximation");
  if (depth < ball.length()) throw ValidationError("approximation depth N must be at least n");
  if (depth > kMaxDoublingLength) {
    throw ValidationError("approximation depth N is limited to " + std::to_string(kMaxDoublingLength));
  }
  const ArcSet arcs = doubling_ball_arcs(ball);
  DyadicCover cover = dyadic_cover(arcs, depth);
  CylinderApproximation out;
  out.n = ball.length();
  out.depth = depth;
  const Rational cell = Rational(1) / pow2(depth);
  out.mu_ball = arcs.measure();
  out.mu_inner = Rational(total_count(cover.inner)) * cell;
  out.mu_boundary = Rational(cover.boundary.size()) * cell;
  out.inner = std::move(cover.inner);
  out.outer = std::move(cover.outer);
  out.boundary = std::move(cover.boundary);
  return out;
}

std::uint64_t count_intersecting_cylinders(const BowenBall& ball, int depth) {
  require_doubling(ball.system(), "cylinder counting");
  if (depth < 1 || depth > 62) throw ValidationError("cylinder depth must lie in [1, 62]");
  return total_count(dyadic_cover(doubling_ball_arcs(ball), depth).outer);
}

double annulus_ratio(double x, double eps, double delta) {
  if (!(delta > 0.0 && delta < eps && eps + delta <= 0.5)) {
    throw ValidationError("annulus ratio needs 0 < delta < eps and eps + delta <= 1/2");
  }
  const Rational c = exact_rational(x);
  const Rational outer = ArcSet::ball(c, exact_rational(eps + delta)).measure();
  const Rational inner = ArcSet::ball(c, exact_rational(eps - delta)).measure();
  const Rational mid = ArcSet::ball(c, exact_rational(eps)).measure();
  return to_double((outer - inner) / mid);
}

}  // namespace reclab
