#include "reclab/stein.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "reclab/errors.hpp"

namespace reclab {

double poisson_pmf(double t, std::size_t k) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw ValidationError("Poisson parameter must be finite and non-negative");
  if (t == 0.0) return k == 0 ? 1.0 : 0.0;
  const double kk = static_cast<double>(k);
  return std::exp(-t + kk * std::log(t) - std::lgamma(kk + 1.0));
}

CountDistribution poisson_law(double t, std::size_t cap) {
  CountDistribution d(cap);
  for (std::size_t k = 0; k <= cap; ++k) d[k] = poisson_pmf(t, k);
  double tail = 0.0;
  double term = poisson_pmf(t, cap + 1);
  for (std::size_t k = cap + 1; term > 0.0; ++k) {
    tail += term;
    if (term < tail * 1e-18) break;
    term *= t / static_cast<double>(k + 1);
  }
  d.overflow() = tail;
  return d;
}

double SteinSolution::residual(std::size_t k) const {
  return t * f[k + 1] - static_cast<double>(k) * f[k] - (h(k) - nu);
}

double SteinSolution::max_residual() const {
  double worst = 0.0;
  for (std::size_t k = 0; k <= cap(); ++k) worst = std::max(worst, std::fabs(residual(k)));
  return worst;
}

std::vector<double> stein_forward(double t, const std::vector<bool>& in_set, double nu, std::size_t upto) {
  std::vector<double> f(upto + 1, 0.0);
  for (std::size_t k = 0; k < upto; ++k) {
    const double h = k < in_set.size() && in_set[k] ? 1.0 : 0.0;
    f[k + 1] = (static_cast<double>(k) * f[k] + h - nu) / t;
  }
  return f;
}

double stein_tail(double t, const std::vector<bool>& in_set, double nu, std::size_t k) {
  if (k == 0) throw ValidationError("tail series starts at k >= 1");
  // w_i = (k-1)! t^{i-k} / i!
  double w = 1.0 / static_cast<double>(k);
  long double sum = 0.0L;
  for (std::size_t i = k;; ++i) {
    const double h = i < in_set.size() && in_set[i] ? 1.0 : 0.0;
    sum += static_cast<long double>(h - nu) * w;
    w *= t / static_cast<double>(i + 1);
    if (i >= in_set.size() && (w == 0.0 || w < 1e-20 * std::fabs(static_cast<double>(sum)) || w < 1e-300)) break;
  }
  return -static_cast<double>(sum);
}

SteinSolution stein_solve(double t, const std::vector<std::size_t>& E, std::size_t cap) {
  if (!(t > 0.0) || !std::isfinite(t)) throw ValidationError("t must be positive");
  SteinSolution s;
  s.t = t;
  s.in_set.assign(cap + 1, false);
  for (std::size_t e : E) {
    if (e > cap) throw ValidationError("set element " + std::to_string(e) + " exceeds the cap " + std::to_string(cap));
    s.in_set[e] = true;
  }
  for (std::size_t k = 0; k <= cap; ++k) {
    if (s.in_set[k]) s.nu += poisson_pmf(t, k);
  }

  const std::size_t seam = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(t)));
  if (seam >= cap + 1) {
    s.f = stein_forward(t, s.in_set, s.nu, cap + 1);
    return s;
  }
  s.f = stein_forward(t, s.in_set, s.nu, seam);
  s.f.resize(cap + 2);
  s.f[cap + 1] = stein_tail(t, s.in_set, s.nu, cap + 1);
  for (std::size_t k = cap; k > seam; --k) {
    s.f[k] = (t * s.f[k + 1] - s.h(k) + s.nu) / static_cast<double>(k);
  }
  const double backward_at_seam = (t * s.f[seam + 1] - s.h(seam) + s.nu) / static_cast<double>(seam);
  s.seam_mismatch = std::fabs(backward_at_seam - s.f[seam]);
  if (!(s.seam_mismatch < 1e-10)) {
    throw DomainError("Stein recursion seam mismatch " + std::to_string(s.seam_mismatch) + " exceeds 1e-10");
  }
  return s;
}

double tv_distance(const CountDistribution& p, const CountDistribution& q) {
  if (p.cap() != q.cap()) throw ValidationError("distributions have different caps");
  check_normalized(p);
  check_normalized(q);
  long double sum = 0.0L;
  for (std::size_t k = 0; k < p.cell_count(); ++k) sum += std::fabs(p[k] - q[k]);
  return std::min(1.0, static_cast<double>(sum / 2));
}

Rational tv_distance(const ExactCountDistribution& p, const ExactCountDistribution& q) {
  if (p.cap() != q.cap()) throw ValidationError("distributions have different caps");
  if (p.total() != 1 || q.total() != 1) throw ValidationError("distribution is not normalized");
  Rational sum = 0;
  for (std::size_t k = 0; k < p.cell_count(); ++k) sum += abs(p[k] - q[k]);
  return sum / 2;
}

ChenSteinBound chen_stein_bound(double mu, std::uint64_t tau, const std::function<double(std::uint64_t)>& alpha_fn,
                                const std::function<double(std::uint64_t)>& short_return_fn, std::uint64_t m) {
  if (!(mu > 0.0 && mu < 1.0)) throw ValidationError("mu(A) must lie in (0, 1)");
  if (tau < 1) throw ValidationError("period must be at least 1");
  if (m <= tau + 1) {
    throw ValidationError("empty Delta range: need m > tau(A) + 1 (m = " + std::to_string(m) +
                          ", tau = " + std::to_string(tau) + ")");
  }
  ChenSteinBound out;
  out.mu = mu;
  out.tau = tau;
  out.m = m;
  out.t = static_cast<double>(m) * mu;
  out.log_factor = out.t + std::log(static_cast<double>(m));
  const bool early_exit = m > 1'000'000;

  double best = 0.0;
  bool have = false;
  for (std::uint64_t d = tau + 1; d < m; ++d) {
    const double a = alpha_fn(d) / mu;
    const double b = static_cast<double>(d) * mu;
    const double c = short_return_fn(d);
    ++out.scanned;
    const double sum = a + b + c;
    if (!have || sum < best) {
      have = true;
      best = sum;
      out.delta = d;
      out.alpha_term = a;
      out.delta_term = b;
      out.short_return_term = c;
    }
    if (early_exit && b + c >= best) break;
  }
  out.value = best * out.log_factor;
  return out;
}

}  // namespace reclab
