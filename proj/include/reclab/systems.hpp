#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "reclab/random.hpp"
#include "reclab/rational.hpp"

namespace reclab {

// ---------------------------------------------------------------------------
// Words over a finite alphabet {0, ..., s-1}
// ---------------------------------------------------------------------------

using Symbol = std::uint8_t;
using Word = std::vector<Symbol>;

// Digits map to 0..9, lowercase letters to 0..25 ("abc" == {0,1,2}). A word may
// not mix the two notations.
Word parse_word(std::string_view text);

// Digits when every symbol is below 10, lowercase letters otherwise.
std::string format_word(const Word& w);

// ---------------------------------------------------------------------------
// Interval and circle maps
// ---------------------------------------------------------------------------

enum class MapKind { doubling, tent, gauss };

std::string_view to_string(MapKind kind);
MapKind parse_map_kind(std::string_view name);

// Infinite binary expansion x = 0.b1 b2 b3 ... with random access to every bit.
// Bits come from a counter-based SplitMix64 stream, so a seeded expansion is an
// exact sample of Lebesgue measure and the doubling/tent orbits of x can be read
// off at any time without accumulating rounding error.
class BinaryExpansion {
 public:
  explicit BinaryExpansion(std::uint64_t seed) : seed_(seed), random_tail_(true) {}

  // Bits of a double in [0,1), followed by zeros.
  static BinaryExpansion from_double(double x);

  // i >= 1; bit 0 reads as 0.
  bool bit(std::uint64_t i) const;

  // Bits offset+1 .. offset+64 packed most-significant first.
  std::uint64_t window(std::uint64_t offset) const;

  // 0.b_{offset+1} b_{offset+2} ... truncated to 53 bits.
  double value(std::uint64_t offset = 0) const;

  std::uint64_t seed() const { return seed_; }

 private:
  BinaryExpansion() = default;
  std::uint64_t word(std::uint64_t index) const;

  std::uint64_t seed_ = 0;
  bool random_tail_ = false;
  std::vector<std::uint64_t> prefix_;
};

using MetricPoint = std::variant<double, BinaryExpansion>;

class MetricSystem {
 public:
  explicit MetricSystem(MapKind kind) : kind_(kind) {}

  MapKind kind() const { return kind_; }
  std::string_view name() const { return to_string(kind_); }

  // doubling: [0,1) as the circle; tent: [0,1]; gauss: (0,1).
  bool in_domain(double x) const;

  // One application of T. Throws DomainError outside the domain.
  double map(double x) const;

  // Circle distance for the doubling map, |x - y| otherwise.
  double distance(double x, double y) const;

  // Lebesgue for doubling/tent; Gauss measure via x = 2^u - 1 for gauss.
  double sample(SplitMix64& rng) const;

  // Orbits of doubling and tent points can be read exactly from a binary
  // expansion; the Gauss map is iterated in double precision.
  bool has_exact_orbits() const { return kind_ != MapKind::gauss; }

  // Draws x ~ μ from the seed: a BinaryExpansion when exact orbits are
  // available, a double otherwise.
  MetricPoint sample_point(std::uint64_t seed) const;

  // T^offset(x) for a binary expansion (doubling or tent only).
  double binary_orbit_value(const BinaryExpansion& x, std::uint64_t offset) const;

  friend bool operator==(const MetricSystem&, const MetricSystem&) = default;

 private:
  MapKind kind_;
};

double point_value(const MetricPoint& p);

// Sequential walk along the orbit x, Tx, T²x, ...
class OrbitCursor {
 public:
  OrbitCursor(const MetricSystem& system, const MetricPoint& x);

  double value() const { return value_; }
  std::uint64_t time() const { return time_; }
  void advance();

 private:
  MetricSystem system_;
  std::optional<BinaryExpansion> binary_;
  double value_;
  std::uint64_t time_ = 0;
};

double iterate(const MetricSystem& system, double x, std::uint64_t k);
std::vector<double> orbit(const MetricSystem& system, double x, std::size_t n);

// ---------------------------------------------------------------------------
// Markov shifts
// ---------------------------------------------------------------------------

using Matrix = std::vector<std::vector<double>>;
using RationalMatrix = std::vector<std::vector<Rational>>;

// Stationary vector of an irreducible row-stochastic matrix, residual below
// 1e-12. Throws ValidationError for non-stochastic or reducible input.
std::vector<double> stationary_distribution(const Matrix& P);
std::vector<Rational> stationary_distribution(const RationalMatrix& P);

// Finite-alphabet shift with a stationary Markov measure. The allowed
// transitions are the support of P. When constructed from rationals the exact
// matrix and stationary vector are kept alongside the doubles.
class MarkovShift {
 public:
  static MarkovShift from_matrix(const Matrix& P);
  static MarkovShift from_rational(const RationalMatrix& P);
  // Uniform Bernoulli measure on s symbols.
  static MarkovShift full_shift(int s);
  static MarkovShift bernoulli(const std::vector<Rational>& probs);
  // Binary shift forbidding "11" with P = [[1/2, 1/2], [1, 0]].
  static MarkovShift golden_mean();

  int alphabet_size() const { return s_; }
  bool allowed(Symbol a, Symbol b) const { return P_[a][b] > 0.0; }
  double p(Symbol a, Symbol b) const { return P_[a][b]; }
  double pi(Symbol a) const { return pi_[a]; }
  const Matrix& matrix() const { return P_; }
  const std::vector<double>& stationary() const { return pi_; }

  bool has_exact() const { return exact_P_.has_value(); }
  const Rational& p_exact(Symbol a, Symbol b) const;
  const Rational& pi_exact(Symbol a) const;
  const RationalMatrix& exact_matrix() const;

  // Smallest k with every entry of P^k positive.
  int primitivity_index() const { return k0_; }

  bool is_admissible(const Word& w) const;
  // Throws DomainError naming the offending symbol or transition.
  void check_admissible(const Word& w) const;

 private:
  MarkovShift() = default;
  void finish();

  int s_ = 0;
  Matrix P_;
  std::vector<double> pi_;
  std::optional<RationalMatrix> exact_P_;
  std::optional<std::vector<Rational>> exact_pi_;
  int k0_ = 0;
};

// Left shift on finite words: drops the first k symbols.
Word iterate(const MarkovShift& shift, const Word& w, std::uint64_t k);
std::vector<Word> orbit(const MarkovShift& shift, const Word& w, std::size_t n);

// First symbol ~ π, successors ~ rows of P. Deterministic given the seed.
Word sample_stationary(const MarkovShift& shift, std::uint64_t seed, std::size_t length);

// Same law, drawing from an existing stream; `out` is resized to `length`.
void sample_stationary(const MarkovShift& shift, SplitMix64& rng, std::size_t length, Word& out);

}  // namespace reclab
