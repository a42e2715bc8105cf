#include "reclab/arcs.hpp"

#include <algorithm>

#include "reclab/errors.hpp"

namespace reclab {

BigInt floor_int(const Rational& q) {
  const BigInt num = numerator(q);
  const BigInt den = denominator(q);
  BigInt quot = num / den;  // truncates toward zero
  if (num < 0 && quot * den != num) quot -= 1;
  return quot;
}

BigInt ceil_int(const Rational& q) {
  BigInt f = floor_int(q);
  return Rational(f) == q ? f : BigInt(f + 1);
}

Rational frac(const Rational& q) { return q - Rational(floor_int(q)); }

ArcSet::ArcSet(std::vector<Arc> arcs) {
  for (auto& a : arcs) {
    if (a.length <= 0) continue;
    if (a.full()) {
      arcs_ = {Arc{Rational(0), Rational(1)}};
      return;
    }
    a.start = frac(a.start);
    arcs_.push_back(std::move(a));
  }
  std::sort(arcs_.begin(), arcs_.end(), [](const Arc& x, const Arc& y) { return x.start < y.start; });
}

ArcSet ArcSet::full_circle() { return ArcSet({Arc{Rational(0), Rational(1)}}); }

ArcSet ArcSet::ball(const Rational& center, const Rational& radius) {
  if (radius <= 0) return ArcSet();
  return ArcSet({Arc{center - radius, 2 * radius}});
}

bool ArcSet::full() const { return arcs_.size() == 1 && arcs_.front().full(); }

Rational ArcSet::measure() const {
  Rational total = 0;
  for (const Arc& a : arcs_) total += a.length;
  return total > 1 ? Rational(1) : total;
}

namespace {

// Components of the intersection of two arcs, neither of them full.
void intersect_arcs(const Arc& a, const Arc& b, std::vector<Arc>& out) {
  for (int shift = -1; shift <= 1; ++shift) {
    const Rational b_lo = b.start + shift;
    const Rational lo = std::max(a.start, b_lo);
    const Rational hi = std::min(Rational(a.start + a.length), Rational(b_lo + b.length));
    if (lo < hi) out.push_back(Arc{lo, hi - lo});
  }
}

}  // namespace

ArcSet ArcSet::intersect(const ArcSet& other) const {
  if (full()) return other;
  if (other.full()) return *this;
  std::vector<Arc> out;
  for (const Arc& a : arcs_) {
    for (const Arc& b : other.arcs_) intersect_arcs(a, b, out);
  }
  return ArcSet(std::move(out));
}

bool ArcSet::intersects(const ArcSet& other) const { return !intersect(other).empty(); }

ArcSet ArcSet::doubled() const {
  std::vector<Arc> out;
  for (const Arc& a : arcs_) out.push_back(Arc{2 * a.start, 2 * a.length});
  // Images of disjoint arcs may overlap; merge only the full-circle case, which
  // is all callers need for emptiness tests.
  return ArcSet(std::move(out));
}

ArcSet ArcSet::intersect_preimage(int k, const Rational& target, const Rational& radius) const {
  if (k < 0) throw ValidationError("preimage depth must be non-negative");
  if (radius >= Rational(1, 2)) return *this;
  const BigInt scale = BigInt(1) << k;
  const Rational rho = radius / Rational(scale);
  const Rational base = frac(target);
  // Components of the preimage are (z_j - rho, z_j + rho) with z_j = (base + j) / 2^k.
  const ArcSet& self = *this;
  std::vector<Arc> out;
  for (const Arc& a : self.arcs_) {
    const Rational lo = a.start;
    const Rational hi = a.start + (a.full() ? Rational(1) : a.length);
    const BigInt j_lo = floor_int((lo - rho) * Rational(scale) - base);
    const BigInt j_hi = ceil_int((hi + rho) * Rational(scale) - base);
    for (BigInt j = j_lo; j <= j_hi; ++j) {
      const Rational z = (base + Rational(j)) / Rational(scale);
      const Rational c_lo = std::max(lo, Rational(z - rho));
      const Rational c_hi = std::min(hi, Rational(z + rho));
      if (c_lo < c_hi) out.push_back(Arc{c_lo, c_hi - c_lo});
    }
  }
  return ArcSet(std::move(out));
}

}  // namespace reclab
