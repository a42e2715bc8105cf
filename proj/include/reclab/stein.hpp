#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "reclab/count_distribution.hpp"

namespace reclab {

// e^{-t} t^k / k!. Throws ValidationError for t < 0.
double poisson_pmf(double t, std::size_t k);

// Poisson(t) on {0..K} with the tail above K in the overflow cell.
CountDistribution poisson_law(double t, std::size_t cap);

// Solution of t f(k+1) - k f(k) = χ_E(k) - ν_t(E) on {0..K}, with f(0) = 0.
struct SteinSolution {
  double t = 0.0;
  std::vector<bool> in_set;  // χ_E on {0..K}
  double nu = 0.0;           // ν_t(E)
  std::vector<double> f;     // f(0..K+1)
  double seam_mismatch = 0.0;

  std::size_t cap() const { return in_set.size() - 1; }
  double h(std::size_t k) const { return k < in_set.size() && in_set[k] ? 1.0 : 0.0; }
  // t f(k+1) - k f(k) - (χ_E(k) - ν_t(E)) for k ≤ K.
  double residual(std::size_t k) const;
  double max_residual() const;
};

// Forward recursion f(k+1) = (k f(k) + χ_E(k) - ν)/t up to the seam ⌈t⌉, tail
// series at K+1 and the stable backward recursion down to the seam. Throws
// ValidationError for t ≤ 0 or an element of E above K, and DomainError if the
// two halves disagree at the seam by 1e-10 or more.
SteinSolution stein_solve(double t, const std::vector<std::size_t>& E, std::size_t cap);

// f(1..upto) by the forward recursion alone.
std::vector<double> stein_forward(double t, const std::vector<bool>& in_set, double nu, std::size_t upto);

// f(k) = -((k-1)!/t^k) Σ_{i≥k} (χ_E(i) - ν) t^i/i!, for k ≥ 1.
double stein_tail(double t, const std::vector<bool>& in_set, double nu, std::size_t k);

// (1/2) Σ_k |p(k) - q(k)| over every cell including overflow. Throws
// ValidationError when the caps differ or either input is not normalized.
double tv_distance(const CountDistribution& p, const CountDistribution& q);
Rational tv_distance(const ExactCountDistribution& p, const ExactCountDistribution& q);

struct ChenSteinBound {
  double mu = 0.0;
  std::uint64_t tau = 0;
  std::uint64_t m = 0;
  double t = 0.0;
  std::uint64_t delta = 0;  // minimizing Δ*
  double alpha_term = 0.0;  // α(Δ*)/μ(A)
  double delta_term = 0.0;  // Δ* μ(A)
  double short_return_term = 0.0;  // ℙ_A(τ_A ≤ Δ*)
  double log_factor = 0.0;  // t + ln m
  double value = 0.0;       // (sum of the three terms)·(t + ln m), C₁ = 1
  std::uint64_t scanned = 0;
};

// min over integer τ(A) < Δ < m of (α(Δ)/μ(A) + Δ μ(A) + ℙ_A(τ_A ≤ Δ))(t + ln m)
// with t = m μ(A). The smallest minimizer wins ties. For m > 10^6 the scan stops
// once Δ μ(A) + ℙ_A(τ_A ≤ Δ) alone reaches the best value, which is exact when
// α is non-negative and the short-return curve non-decreasing.
ChenSteinBound chen_stein_bound(double mu, std::uint64_t tau, const std::function<double(std::uint64_t)>& alpha_fn,
                                const std::function<double(std::uint64_t)>& short_return_fn, std::uint64_t m);

}  // namespace reclab
