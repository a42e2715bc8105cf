#pragma once

#include <cstddef>
#include <vector>

#include "reclab/errors.hpp"
#include "reclab/rational.hpp"

namespace reclab {

// Probability mass on {0, 1, ..., K} plus one lumped cell for counts above K.
// Cells are indexed 0..K+1; cell K+1 is the overflow.
template <class T>
class BasicCountDistribution {
 public:
  BasicCountDistribution() : BasicCountDistribution(0) {}
  explicit BasicCountDistribution(std::size_t cap) : cells_(cap + 2, T(0)) {}

  std::size_t cap() const { return cells_.size() - 2; }
  std::size_t cell_count() const { return cells_.size(); }

  const T& operator[](std::size_t k) const { return cells_[k]; }
  T& operator[](std::size_t k) { return cells_[k]; }

  const T& overflow() const { return cells_.back(); }
  T& overflow() { return cells_.back(); }

  // Adds mass at count k, lumping k > K into the overflow cell.
  void add(std::size_t k, const T& mass) { cells_[k > cap() ? cap() + 1 : k] += mass; }

  T total() const {
    T sum(0);
    for (const T& v : cells_) sum += v;
    return sum;
  }

  // Σ k·p(k). The mean is undefined once mass has been lumped into overflow.
  T mean() const {
    if (overflow() != T(0)) throw DomainError("mean is undefined with overflow mass");
    T sum(0);
    for (std::size_t k = 0; k <= cap(); ++k) sum += T(k) * cells_[k];
    return sum;
  }

  const std::vector<T>& cells() const { return cells_; }

  friend bool operator==(const BasicCountDistribution&, const BasicCountDistribution&) = default;

 private:
  std::vector<T> cells_;
};

using CountDistribution = BasicCountDistribution<double>;
using ExactCountDistribution = BasicCountDistribution<Rational>;

CountDistribution to_double(const ExactCountDistribution& d);

CountDistribution point_mass(std::size_t k, std::size_t cap);

// Throws ValidationError unless every cell is non-negative and the total is 1
// within `tol`.
void check_normalized(const CountDistribution& d, double tol = 1e-9);

}  // namespace reclab
