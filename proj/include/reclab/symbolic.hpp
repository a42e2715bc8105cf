#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "reclab/count_distribution.hpp"
#include "reclab/rational.hpp"
#include "reclab/systems.hpp"

namespace reclab {

// A union of n-cylinders, stored as a sorted set of distinct n-words.
class CylinderSet {
 public:
  CylinderSet() = default;
  // Throws ValidationError on an empty list, mixed lengths or duplicates.
  explicit CylinderSet(std::vector<Word> words);

  static CylinderSet parse(const std::vector<std::string>& words);

  std::size_t length() const { return n_; }
  std::size_t size() const { return words_.size(); }
  const std::vector<Word>& words() const { return words_; }

  bool contains(std::span<const Symbol> w) const;

  // Throws DomainError if some word is not admissible for the shift.
  void check_admissible(const MarkovShift& shift) const;

 private:
  std::size_t n_ = 0;
  std::vector<Word> words_;
};

// Base-s code of a word, most significant symbol first.
std::uint64_t word_code(std::span<const Symbol> w, int s);

// Membership table over word codes; a bitmap when s^n is small.
class WordIndex {
 public:
  WordIndex(const CylinderSet& cyl, int s);
  bool contains(std::uint64_t code) const;

 private:
  std::vector<bool> bitmap_;
  std::vector<std::uint64_t> sorted_;
};

// μ(A) = Σ_w π(w_0) Π P(w_i, w_{i+1}).
double cylinder_measure(const MarkovShift& shift, const CylinderSet& cyl);
Rational cylinder_measure_exact(const MarkovShift& shift, const CylinderSet& cyl);

// τ(A) = min{k ≥ 1 : T^{-k}A ∩ A ≠ ∅}.
int period(const MarkovShift& shift, const CylinderSet& cyl);

// Fraction of positions where the words differ.
double hamming_distance(const Word& a, const Word& b);

// Admissible words at Hamming distance strictly below beta from the center;
// the center itself always belongs to its cluster. More than `max_size` words
// throws BudgetExceeded.
CylinderSet hamming_cluster(const MarkovShift& shift, const Word& center, double beta,
                            std::size_t max_size = std::size_t{1} << 20);

// Σ_{m=0}^{⌊nβ⌋} s^m C(n,m). Throws BudgetExceeded if the sum overflows 64 bits.
std::uint64_t lambda_bound(int n, int s, double beta);

struct HitDistributionOptions {
  std::size_t cap = 32;
  // Upper limit on s^{max(n-1,1)} · m · (K+2) · s cell updates.
  double budget = 4.0e9;
};

// Exact law of W_{A,m}(x) = Σ_{j=1}^m χ_A(T^j x) for x ~ μ, by a transfer DP
// over (last max(n-1,1) symbols, running count). Counts above the cap are
// lumped into overflow.
CountDistribution exact_hit_distribution(const MarkovShift& shift, const CylinderSet& cyl, std::size_t m,
                                         const HitDistributionOptions& opts = {});
ExactCountDistribution exact_hit_distribution_exact(const MarkovShift& shift, const CylinderSet& cyl,
                                                    std::size_t m, const HitDistributionOptions& opts = {});

// curve[Δ] = ℙ_A(τ_A ≤ Δ) for Δ = 0..max_delta, where ℙ_A = μ(· | A).
std::vector<double> short_return_curve(const MarkovShift& shift, const CylinderSet& cyl, std::size_t max_delta);
std::vector<Rational> short_return_curve_exact(const MarkovShift& shift, const CylinderSet& cyl,
                                               std::size_t max_delta);

double short_return_prob(const MarkovShift& shift, const CylinderSet& cyl, std::size_t delta);
Rational short_return_prob_exact(const MarkovShift& shift, const CylinderSet& cyl, std::size_t delta);

enum class MixingKind { alpha, phi };

struct MixingBracket {
  double lower = 0.0;
  double upper = 0.0;
  bool exact = false;
};

// sup |μ(A ∩ T^{-n-k}B) − μ(A)μ(B)| (alpha) or the same divided by μ(B) (phi),
// with A over unions of n-cylinders and B over unions of L-cylinders. Exact by
// subset enumeration while both sides have at most `exact_cells` cells;
// otherwise a certified bracket with exact = false.
MixingBracket mixing_coefficient(const MarkovShift& shift, int n, int L, int k, MixingKind kind,
                                 std::size_t exact_cells = 12);

}  // namespace reclab
