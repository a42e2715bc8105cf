#include "reclab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "reclab/errors.hpp"
#include "reclab/parallel.hpp"
#include "reclab/random.hpp"

namespace reclab {

std::size_t default_cap(double t) {
  return std::max<std::size_t>(32, static_cast<std::size_t>(std::ceil(8.0 * t)));
}

std::uint64_t kac_length(double t, double mu) {
  if (!(mu > 0.0)) throw DomainError("target measure is zero; m = t/mu is undefined");
  const double m = std::round(t / mu);
  if (!(m >= 1.0)) throw ValidationError("m = round(t/mu) must be at least 1; increase t or shrink the target");
  if (m > 9.0e18) throw BudgetExceeded("m = round(t/mu) does not fit in 64 bits");
  return static_cast<std::uint64_t>(m);
}

std::uint64_t count_visits(const MetricSystem& system, const MetricPoint& x, const std::function<bool(double)>& member,
                           std::uint64_t m) {
  OrbitCursor cursor(system, x);
  std::uint64_t hits = 0;
  for (std::uint64_t j = 1; j <= m; ++j) {
    cursor.advance();
    hits += member(cursor.value());
  }
  return hits;
}

std::uint64_t count_visits(std::span<const Symbol> x, const CylinderSet& cyl, std::uint64_t m) {
  const std::size_t n = cyl.length();
  if (x.size() < m + n) throw ValidationError("word too short: need at least m + n symbols");
  std::uint64_t hits = 0;
  for (std::uint64_t j = 1; j <= m; ++j) hits += cyl.contains(x.subspan(j, n));
  return hits;
}

std::uint64_t count_ball_visits(const BowenBall& ball, const MetricPoint& x, std::uint64_t m) {
  const MetricSystem& sys = ball.system();
  const auto& c = ball.center_orbit();
  const std::size_t n = c.size();
  const double eps = ball.eps();
  std::uint64_t hits = 0;

  if (const auto* b = std::get_if<BinaryExpansion>(&x)) {
    if (!sys.has_exact_orbits()) throw ValidationError("binary expansions need the doubling or tent map");
    for (std::uint64_t j = 1; j <= m; ++j) {
      bool inside = true;
      for (std::size_t k = 0; k < n && inside; ++k) inside = sys.distance(c[k], sys.binary_orbit_value(*b, j + k)) < eps;
      hits += inside;
    }
    return hits;
  }

  // Ring buffer holding T^j x, ..., T^{j+n-1} x.
  OrbitCursor cursor(sys, x);
  std::vector<double> ring(n);
  for (std::size_t k = 0; k < n; ++k) {
    cursor.advance();
    ring[k] = cursor.value();
  }
  std::size_t head = 0;
  for (std::uint64_t j = 1; j <= m; ++j) {
    bool inside = true;
    for (std::size_t k = 0; k < n && inside; ++k) inside = sys.distance(c[k], ring[(head + k) % n]) < eps;
    hits += inside;
    cursor.advance();
    ring[head] = cursor.value();
    head = (head + 1) % n;
  }
  return hits;
}

std::vector<double> cell_z_scores(const CountDistribution& empirical, const CountDistribution& reference,
                                  std::uint64_t trials) {
  if (empirical.cap() != reference.cap()) throw ValidationError("distributions have different caps");
  const double N = static_cast<double>(trials);
  std::vector<double> z(empirical.cell_count());
  for (std::size_t k = 0; k < z.size(); ++k) {
    const double p = reference[k];
    const double sigma = std::sqrt(std::max(p * (1.0 - p), 1.0 / N) / N);
    z[k] = (empirical[k] - p) / sigma;
  }
  return z;
}

ChenSteinBound cylinder_chen_stein(const MarkovShift& shift, const CylinderSet& cyl, std::uint64_t m) {
  const double mu = shift.has_exact() ? to_double(cylinder_measure_exact(shift, cyl)) : cylinder_measure(shift, cyl);
  const auto tau = static_cast<std::uint64_t>(period(shift, cyl));
  if (m <= tau + 1) {
    throw ValidationError("empty Delta range: need m > tau(A) + 1 (m = " + std::to_string(m) +
                          ", tau = " + std::to_string(tau) + ")");
  }
  const std::vector<double> curve = short_return_curve(shift, cyl, m - 1);
  std::map<std::uint64_t, double> alpha_cache;
  auto alpha = [&](std::uint64_t gap) {
    auto it = alpha_cache.find(gap);
    if (it != alpha_cache.end()) return it->second;
    const double a = mixing_coefficient(shift, 1, 1, static_cast<int>(std::min<std::uint64_t>(gap, 1u << 30)),
                                        MixingKind::alpha)
                         .upper;
    alpha_cache.emplace(gap, a);
    return a;
  };
  auto short_return = [&](std::uint64_t gap) { return curve[gap]; };
  return chen_stein_bound(mu, tau, alpha, short_return, m);
}

namespace {

struct Partial {
  std::vector<std::uint64_t> counts;
  std::uint64_t sum = 0;
  unsigned __int128 sum_sq = 0;
};

Partial merge(std::vector<Partial>& parts, std::size_t cells) {
  Partial total;
  total.counts.assign(cells, 0);
  for (const auto& p : parts) {
    for (std::size_t k = 0; k < cells; ++k) total.counts[k] += p.counts[k];
    total.sum += p.sum;
    total.sum_sq += p.sum_sq;
  }
  return total;
}

void record(Partial& p, std::uint64_t w, std::size_t cap) {
  ++p.counts[w > cap ? cap + 1 : w];
  p.sum += w;
  p.sum_sq += static_cast<unsigned __int128>(w) * w;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

MeasureMethod ball_method(const MetricSystem& sys, double eps, std::uint64_t samples, std::uint64_t seed,
                          unsigned workers) {
  if (sys.kind() == MapKind::doubling && eps < 0.25) return ExactDoubling{};
  return MonteCarlo{samples, seed, workers};
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  if (!(cfg.t > 0.0) || !std::isfinite(cfg.t)) throw ValidationError("t must be positive");
  if (cfg.trials < 1) throw ValidationError("trials must be at least 1");
  const unsigned workers = std::max(1u, cfg.workers);
  const std::size_t K = cfg.cap.value_or(default_cap(cfg.t));

  ExperimentReport r;
  r.t = cfg.t;
  r.trials = cfg.trials;
  r.seed = cfg.seed;
  r.cap = K;

  Partial total;
  std::vector<double> expected(cfg.trials, 0.0);  // m·μ per trial

  if (const auto* cyl_target = std::get_if<CylinderTarget>(&cfg.target)) {
    const auto* shift_ptr = std::get_if<MarkovShift>(&cfg.system);
    if (!shift_ptr) throw ValidationError("cylinder targets need a symbolic system");
    const MarkovShift& shift = *shift_ptr;
    const CylinderSet& cyl = cyl_target->cylinders;
    cyl.check_admissible(shift);
    const std::size_t n = cyl.length();
    const int s = shift.alphabet_size();
    if (std::pow(static_cast<double>(s), static_cast<double>(n)) > 0x1.0p62) {
      throw ValidationError("word length too large for the rolling word code");
    }
    r.n = n;
    if (shift.has_exact()) {
      r.mu_exact = cylinder_measure_exact(shift, cyl);
      r.mu_hat = to_double(*r.mu_exact);
    } else {
      r.mu_hat = cylinder_measure(shift, cyl);
    }
    r.m = kac_length(cfg.t, r.mu_hat);
    const std::uint64_t m = r.m;
    const WordIndex index(cyl, s);
    std::uint64_t modulus = 1;
    for (std::size_t i = 0; i < n; ++i) modulus *= static_cast<std::uint64_t>(s);

    auto parts = parallel_ranges(cfg.trials, workers, [&](std::uint64_t begin, std::uint64_t end) {
      Partial p;
      p.counts.assign(K + 2, 0);
      Word buf;
      for (std::uint64_t i = begin; i < end; ++i) {
        SplitMix64 rng(derive_seed(cfg.seed, 2 * i));
        sample_stationary(shift, rng, m + n, buf);
        std::uint64_t code = word_code(std::span<const Symbol>(buf.data(), n), s);
        std::uint64_t w = 0;
        for (std::uint64_t j = 1; j <= m; ++j) {
          code = (code * static_cast<std::uint64_t>(s) + buf[j + n - 1]) % modulus;
          w += index.contains(code);
        }
        record(p, w, K);
      }
      return p;
    });
    total = merge(parts, K + 2);
    std::fill(expected.begin(), expected.end(), static_cast<double>(m) * r.mu_hat);

    if (cfg.exact_oracle) {
      HitDistributionOptions opts = cfg.oracle_options;
      opts.cap = K;
      r.exact = exact_hit_distribution(shift, cyl, m, opts);
    }
    r.period = period(shift, cyl);
    if (cfg.chen_stein && m > static_cast<std::uint64_t>(*r.period) + 1) {
      r.chen_stein = cylinder_chen_stein(shift, cyl, m);
    }
  } else {
    const auto& ball_target = std::get<BallTarget>(cfg.target);
    const auto* sys_ptr = std::get_if<MetricSystem>(&cfg.system);
    if (!sys_ptr) throw ValidationError("Bowen-ball targets need an interval or circle map");
    const MetricSystem& sys = *sys_ptr;
    r.n = static_cast<std::size_t>(ball_target.n);
    const std::uint64_t measure_seed = derive_seed(cfg.seed, ~std::uint64_t{0});

    if (ball_target.center) {
      const BowenBall ball(sys, *ball_target.center, ball_target.eps, ball_target.n);
      const MeasureEstimate mu =
          ball_measure(ball, ball_method(sys, ball_target.eps, cfg.measure_samples, measure_seed, workers));
      r.mu_hat = mu.estimate;
      r.mu_exact = mu.exact;
      r.m = kac_length(cfg.t, r.mu_hat);
      const std::uint64_t m = r.m;
      auto parts = parallel_ranges(cfg.trials, workers, [&](std::uint64_t begin, std::uint64_t end) {
        Partial p;
        p.counts.assign(K + 2, 0);
        for (std::uint64_t i = begin; i < end; ++i) {
          record(p, count_ball_visits(ball, sys.sample_point(derive_seed(cfg.seed, 2 * i)), m), K);
        }
        return p;
      });
      total = merge(parts, K + 2);
      std::fill(expected.begin(), expected.end(), static_cast<double>(m) * r.mu_hat);
    } else {
      std::vector<double> m_of(cfg.trials), mu_of(cfg.trials);
      auto parts = parallel_ranges(cfg.trials, workers, [&](std::uint64_t begin, std::uint64_t end) {
        Partial p;
        p.counts.assign(K + 2, 0);
        for (std::uint64_t i = begin; i < end; ++i) {
          const std::uint64_t center_seed = derive_seed(cfg.seed, 2 * i + 1);
          const BowenBall ball(sys, sys.sample_point(center_seed), ball_target.eps, ball_target.n);
          const MeasureEstimate mu = ball_measure(
              ball, ball_method(sys, ball_target.eps, cfg.measure_samples, derive_seed(measure_seed, i), 1));
          const std::uint64_t m = kac_length(cfg.t, mu.estimate);
          m_of[i] = static_cast<double>(m);
          mu_of[i] = mu.estimate;
          expected[i] = static_cast<double>(m) * mu.estimate;
          record(p, count_ball_visits(ball, sys.sample_point(derive_seed(cfg.seed, 2 * i)), m), K);
        }
        return p;
      });
      total = merge(parts, K + 2);
      CenterSummary cs;
      cs.m_min = *std::min_element(m_of.begin(), m_of.end());
      cs.m_max = *std::max_element(m_of.begin(), m_of.end());
      cs.m_median = median(m_of);
      long double acc = 0.0L;
      for (double v : mu_of) acc += v;
      cs.mu_mean = static_cast<double>(acc / static_cast<long double>(cfg.trials));
      r.centers = cs;
      r.m = static_cast<std::uint64_t>(std::llround(cs.m_median));
      r.mu_hat = cs.mu_mean;
    }
  }

  const double N = static_cast<double>(cfg.trials);
  r.counts = total.counts;
  r.empirical = CountDistribution(K);
  for (std::size_t k = 0; k < K + 2; ++k) r.empirical[k] = static_cast<double>(total.counts[k]) / N;
  r.poisson = poisson_law(cfg.t, K);
  r.tv_emp_poisson = tv_distance(r.empirical, r.poisson);
  if (r.exact) {
    r.tv_exact_poisson = tv_distance(*r.exact, r.poisson);
    r.tv_emp_exact = tv_distance(r.empirical, *r.exact);
  }
  r.z = cell_z_scores(r.empirical, r.exact ? *r.exact : r.poisson, cfg.trials);
  r.standard_error.resize(r.z.size());
  const CountDistribution& ref = r.exact ? *r.exact : r.poisson;
  for (std::size_t k = 0; k < r.z.size(); ++k) {
    r.standard_error[k] = std::sqrt(std::max(ref[k] * (1.0 - ref[k]), 1.0 / N) / N);
    r.max_abs_z = std::max(r.max_abs_z, std::fabs(r.z[k]));
  }

  const long double mean = static_cast<long double>(total.sum) / N;
  r.mean_w = static_cast<double>(mean);
  if (cfg.trials > 1) {
    const long double ss = static_cast<long double>(total.sum_sq) - mean * static_cast<long double>(total.sum);
    r.var_w = std::max(0.0, static_cast<double>(ss / (N - 1)));
  }
  long double exp_sum = 0.0L;
  for (double e : expected) exp_sum += e;
  r.expected_mean = static_cast<double>(exp_sum / N);
  r.mean_z = (r.mean_w - r.expected_mean) / std::sqrt(std::max(r.var_w, 1.0 / N) / N);
  return r;
}

SummaryRow compare_to_poisson(const ExperimentReport& report) {
  SummaryRow row;
  row.n = report.n;
  row.m = report.m;
  row.mu_hat = report.mu_hat;
  row.t = report.t;
  row.tv_emp_poisson = report.tv_emp_poisson;
  row.tv_exact_poisson = report.tv_exact_poisson;
  row.max_z = report.max_abs_z;
  if (report.chen_stein) row.chen_stein_value = report.chen_stein->value;
  return row;
}

}  // namespace reclab
