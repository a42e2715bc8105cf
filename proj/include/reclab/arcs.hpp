#pragma once

#include <cstdint>
#include <vector>

#include "reclab/rational.hpp"

namespace reclab {

// Open arc (start, start + length) on the circle R/Z with exact rational
// endpoints; start is kept in [0, 1). A length of 1 or more is the whole circle.
struct Arc {
  Rational start;
  Rational length;

  bool full() const { return length >= 1; }
};

// Finite union of pairwise disjoint open arcs.
class ArcSet {
 public:
  ArcSet() = default;
  explicit ArcSet(std::vector<Arc> arcs);

  static ArcSet full_circle();
  // Points at circle distance < radius from center.
  static ArcSet ball(const Rational& center, const Rational& radius);

  const std::vector<Arc>& arcs() const { return arcs_; }
  bool empty() const { return arcs_.empty(); }
  bool full() const;

  Rational measure() const;

  ArcSet intersect(const ArcSet& other) const;
  bool intersects(const ArcSet& other) const;

  // Image under x ↦ 2x mod 1: each arc doubles in length.
  ArcSet doubled() const;

  // Intersection with {y : d(2^k y, target) < radius}.
  ArcSet intersect_preimage(int k, const Rational& target, const Rational& radius) const;

 private:
  std::vector<Arc> arcs_;
};

// Fractional part in [0, 1).
Rational frac(const Rational& q);

// Floor and ceiling of a rational as big integers.
BigInt floor_int(const Rational& q);
BigInt ceil_int(const Rational& q);

}  // namespace reclab
