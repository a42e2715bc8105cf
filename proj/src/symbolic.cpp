#include "reclab/symbolic.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "reclab/errors.hpp"

namespace reclab {

// ---------------------------------------------------------------------------
// Cylinder sets
// ---------------------------------------------------------------------------

CylinderSet::CylinderSet(std::vector<Word> words) : words_(std::move(words)) {
  if (words_.empty()) throw ValidationError("cylinder set needs at least one word");
  n_ = words_.front().size();
  if (n_ == 0) throw ValidationError("cylinder words must be non-empty");
  for (const Word& w : words_) {
    if (w.size() != n_) throw ValidationError("cylinder words must all have the same length");
  }
  std::sort(words_.begin(), words_.end());
  if (std::adjacent_find(words_.begin(), words_.end()) != words_.end()) {
    throw ValidationError("cylinder set contains duplicate words");
  }
}

CylinderSet CylinderSet::parse(const std::vector<std::string>& words) {
  std::vector<Word> parsed;
  parsed.reserve(words.size());
  for (const auto& w : words) parsed.push_back(parse_word(w));
  return CylinderSet(std::move(parsed));
}

bool CylinderSet::contains(std::span<const Symbol> w) const {
  if (w.size() != n_) return false;
  return std::binary_search(words_.begin(), words_.end(), w,
                            [](const auto& a, const auto& b) {
                              return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
                            });
}

void CylinderSet::check_admissible(const MarkovShift& shift) const {
  for (const Word& w : words_) {
    if (!shift.is_admissible(w)) throw DomainError("word " + format_word(w) + " is not admissible");
  }
}

std::uint64_t word_code(std::span<const Symbol> w, int s) {
  std::uint64_t code = 0;
  for (Symbol a : w) code = code * static_cast<std::uint64_t>(s) + a;
  return code;
}

namespace {

double power_count(int s, std::size_t n) { return std::pow(static_cast<double>(s), static_cast<double>(n)); }

std::uint64_t ipow(int s, std::size_t n) {
  std::uint64_t r = 1;
  for (std::size_t i = 0; i < n; ++i) r *= static_cast<std::uint64_t>(s);
  return r;
}

}  // namespace

WordIndex::WordIndex(const CylinderSet& cyl, int s) {
  if (power_count(s, cyl.length()) >= 0x1.0p63) {
    throw BudgetExceeded("word codes of length " + std::to_string(cyl.length()) + " do not fit in 64 bits");
  }
  const std::uint64_t space = ipow(s, cyl.length());
  if (space <= (std::uint64_t{1} << 26)) {
    bitmap_.assign(space, false);
    for (const Word& w : cyl.words()) bitmap_[word_code(w, s)] = true;
  } else {
    for (const Word& w : cyl.words()) sorted_.push_back(word_code(w, s));
    std::sort(sorted_.begin(), sorted_.end());
  }
}

bool WordIndex::contains(std::uint64_t code) const {
  if (!bitmap_.empty()) return code < bitmap_.size() && bitmap_[code];
  return std::binary_search(sorted_.begin(), sorted_.end(), code);
}

// ---------------------------------------------------------------------------
// Scalar access for float and exact-rational modes
// ---------------------------------------------------------------------------

namespace {

template <class T>
struct Measure;

template <>
struct Measure<double> {
  static double p(const MarkovShift& m, Symbol a, Symbol b) { return m.p(a, b); }
  static double pi(const MarkovShift& m, Symbol a) { return m.pi(a); }
  static bool zero(double v) { return v == 0.0; }
};

template <>
struct Measure<Rational> {
  static const Rational& p(const MarkovShift& m, Symbol a, Symbol b) { return m.p_exact(a, b); }
  static const Rational& pi(const MarkovShift& m, Symbol a) { return m.pi_exact(a); }
  static bool zero(const Rational& v) { return v.is_zero(); }
};

template <class T>
T word_measure(const MarkovShift& m, std::span<const Symbol> w) {
  T v = Measure<T>::pi(m, w[0]);
  for (std::size_t i = 1; i < w.size(); ++i) v *= Measure<T>::p(m, w[i - 1], w[i]);
  return v;
}

template <class T>
T measure_of(const MarkovShift& shift, const CylinderSet& cyl) {
  cyl.check_admissible(shift);
  T total(0);
  for (const Word& w : cyl.words()) total += word_measure<T>(shift, w);
  return total;
}

// Measures of all words of length L, indexed by base-s code.
template <class T>
std::vector<T> all_word_measures(const MarkovShift& shift, std::size_t L) {
  const int s = shift.alphabet_size();
  std::vector<T> cur(static_cast<std::size_t>(s));
  for (int a = 0; a < s; ++a) cur[static_cast<std::size_t>(a)] = Measure<T>::pi(shift, static_cast<Symbol>(a));
  for (std::size_t len = 2; len <= L; ++len) {
    std::vector<T> next(cur.size() * static_cast<std::size_t>(s), T(0));
    for (std::size_t code = 0; code < cur.size(); ++code) {
      if (Measure<T>::zero(cur[code])) continue;
      const auto last = static_cast<Symbol>(code % static_cast<std::size_t>(s));
      for (int b = 0; b < s; ++b) {
        const auto& pb = Measure<T>::p(shift, last, static_cast<Symbol>(b));
        if (Measure<T>::zero(pb)) continue;
        next[code * static_cast<std::size_t>(s) + static_cast<std::size_t>(b)] = cur[code] * pb;
      }
    }
    cur = std::move(next);
  }
  return cur;
}

}  // namespace

double cylinder_measure(const MarkovShift& shift, const CylinderSet& cyl) {
  return measure_of<double>(shift, cyl);
}

Rational cylinder_measure_exact(const MarkovShift& shift, const CylinderSet& cyl) {
  return measure_of<Rational>(shift, cyl);
}

// ---------------------------------------------------------------------------
// Period
// ---------------------------------------------------------------------------

int period(const MarkovShift& shift, const CylinderSet& cyl) {
  cyl.check_admissible(shift);
  const std::size_t n = cyl.length();
  const auto& words = cyl.words();

  // Overlapping returns: a suffix of one word is a prefix of another.
  for (std::size_t k = 1; k < n; ++k) {
    std::set<Word> prefixes;
    for (const Word& w : words) prefixes.emplace(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(n - k));
    for (const Word& w : words) {
      if (prefixes.count(Word(w.begin() + static_cast<std::ptrdiff_t>(k), w.end()))) return static_cast<int>(k);
    }
  }

  // Returns after a gap of k - n free symbols need a path of k - n + 1
  // transitions from a last symbol to a first symbol.
  const auto s = static_cast<std::size_t>(shift.alphabet_size());
  std::vector<bool> lasts(s, false), firsts(s, false);
  for (const Word& w : words) {
    lasts[w.back()] = true;
    firsts[w.front()] = true;
  }
  std::vector<std::vector<bool>> reach(s, std::vector<bool>(s, false));
  for (std::size_t a = 0; a < s; ++a) {
    for (std::size_t b = 0; b < s; ++b) reach[a][b] = shift.allowed(static_cast<Symbol>(a), static_cast<Symbol>(b));
  }
  const int limit = static_cast<int>(n) + shift.primitivity_index();
  for (int k = static_cast<int>(n); k <= limit; ++k) {
    for (std::size_t a = 0; a < s; ++a) {
      for (std::size_t b = 0; b < s; ++b) {
        if (lasts[a] && firsts[b] && reach[a][b]) return k;
      }
    }
    std::vector<std::vector<bool>> next(s, std::vector<bool>(s, false));
    for (std::size_t a = 0; a < s; ++a) {
      for (std::size_t l = 0; l < s; ++l) {
        if (!reach[a][l]) continue;
        for (std::size_t b = 0; b < s; ++b) {
          if (shift.allowed(static_cast<Symbol>(l), static_cast<Symbol>(b))) next[a][b] = true;
        }
      }
    }
    reach = std::move(next);
  }
  throw ValidationError("period search exceeded n + k0; the shift is not primitive");
}

// ---------------------------------------------------------------------------
// Hamming clusters
// ---------------------------------------------------------------------------

double hamming_distance(const Word& a, const Word& b) {
  if (a.size() != b.size()) throw ValidationError("hamming distance needs words of equal length");
  if (a.empty()) throw ValidationError("hamming distance of empty words");
  std::size_t mismatches = 0;
  for (std::size_t i = 0; i < a.size(); ++i) mismatches += a[i] != b[i];
  return static_cast<double>(mismatches) / static_cast<double>(a.size());
}

CylinderSet hamming_cluster(const MarkovShift& shift, const Word& center, double beta, std::size_t max_size) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw ValidationError("beta must lie in [0, 1]");
  if (center.empty()) throw ValidationError("cluster center must be non-empty");
  shift.check_admissible(center);
  const std::size_t n = center.size();
  const int s = shift.alphabet_size();
  auto within = [&](std::size_t mismatches) {
    return static_cast<double>(mismatches) / static_cast<double>(n) < beta;
  };

  std::vector<Word> out;
  Word cur(n);
  // Depth-first over positions; mismatches only grow, so prune as soon as the
  // partial count already leaves the cluster.
  auto dfs = [&](auto&& self, std::size_t pos, std::size_t mismatches) -> void {
    if (pos == n) {
      if (mismatches == 0) return;  // the center is added separately
      out.push_back(cur);
      if (out.size() + 1 > max_size) {
        throw BudgetExceeded("hamming cluster exceeds " + std::to_string(max_size) + " words");
      }
      return;
    }
    for (int a = 0; a < s; ++a) {
      const auto sym = static_cast<Symbol>(a);
      if (pos > 0 && !shift.allowed(cur[pos - 1], sym)) continue;
      const std::size_t mm = mismatches + (sym != center[pos]);
      if (mm > 0 && !within(mm)) continue;
      cur[pos] = sym;
      self(self, pos + 1, mm);
    }
  };
  dfs(dfs, 0, 0);
  out.push_back(center);
  return CylinderSet(std::move(out));
}

std::uint64_t lambda_bound(int n, int s, double beta) {
  if (n < 1 || s < 2) throw ValidationError("lambda bound needs n >= 1 and s >= 2");
  if (!(beta >= 0.0 && beta <= 1.0)) throw ValidationError("beta must lie in [0, 1]");
  const auto top = static_cast<int>(std::floor(static_cast<double>(n) * beta + 1e-9));
  std::uint64_t total = 0;
  std::uint64_t binom = 1;  // C(n, m)
  std::uint64_t spow = 1;   // s^m
  for (int m = 0; m <= top; ++m) {
    if (m > 0) {
      // C(n,m) = C(n,m-1)·(n-m+1)/m, exact in integers after the multiply.
      unsigned __int128 b = static_cast<unsigned __int128>(binom) * static_cast<unsigned>(n - m + 1) / static_cast<unsigned>(m);
      if (b > ~std::uint64_t{0}) throw BudgetExceeded("lambda bound overflows 64 bits");
      binom = static_cast<std::uint64_t>(b);
      if (__builtin_mul_overflow(spow, static_cast<std::uint64_t>(s), &spow)) {
        throw BudgetExceeded("lambda bound overflows 64 bits");
      }
    }
    std::uint64_t term = 0;
    if (__builtin_mul_overflow(spow, binom, &term) || __builtin_add_overflow(total, term, &total)) {
      throw BudgetExceeded("lambda bound overflows 64 bits");
    }
  }
  return total;
}

// ---------------------------------------------------------------------------
// Exact hitting-count laws
// ---------------------------------------------------------------------------

namespace {

template <class T>
BasicCountDistribution<T> hit_dp(const MarkovShift& shift, const CylinderSet& cyl, std::size_t m,
                                 const HitDistributionOptions& opts) {
  cyl.check_admissible(shift);
  const int s = shift.alphabet_size();
  const auto su = static_cast<std::size_t>(s);
  const std::size_t n = cyl.length();
  const std::size_t L = std::max<std::size_t>(n - 1, 1);
  const std::size_t K = opts.cap;
  const std::size_t C = K + 2;

  const double cost = power_count(s, L) * static_cast<double>(std::max<std::size_t>(m, 1)) *
                      static_cast<double>(C) * s;
  if (cost > opts.budget || power_count(s, L) > 0x1.0p30) {
    throw BudgetExceeded("exact hit distribution needs about " + std::to_string(cost) +
                         " updates, above the budget of " + std::to_string(opts.budget));
  }
  const WordIndex index(cyl, s);
  const std::size_t S = ipow(s, L);

  // State: the last L symbols read so far. For n >= 2 the walk starts at
  // x_1..x_{n-1} (x_0 never enters W); for n = 1 it starts at x_0.
  std::vector<T> cur(S * C, T(0)), next(S * C, T(0));
  {
    const auto init = all_word_measures<T>(shift, L);
    for (std::size_t u = 0; u < S; ++u) cur[u * C] = init[u];
  }
  std::vector<char> live(S), next_live(S);
  for (std::size_t u = 0; u < S; ++u) live[u] = !Measure<T>::zero(cur[u * C]);

  for (std::size_t j = 1; j <= m; ++j) {
    std::fill(next.begin(), next.end(), T(0));
    std::fill(next_live.begin(), next_live.end(), 0);
    const std::size_t top = std::min(j - 1, K + 1);
    for (std::size_t u = 0; u < S; ++u) {
      if (!live[u]) continue;
      const auto last = static_cast<Symbol>(u % su);
      for (std::size_t b = 0; b < su; ++b) {
        const auto& pb = Measure<T>::p(shift, last, static_cast<Symbol>(b));
        if (Measure<T>::zero(pb)) continue;
        const std::uint64_t window = n >= 2 ? u * su + b : b;
        const std::size_t hit = index.contains(window) ? 1 : 0;
        const std::size_t v = (u * su + b) % S;
        next_live[v] = 1;
        const T* src = &cur[u * C];
        T* dst = &next[v * C];
        for (std::size_t c = 0; c <= top; ++c) {
          if (Measure<T>::zero(src[c])) continue;
          dst[std::min(c + hit, K + 1)] += src[c] * pb;
        }
      }
    }
    cur.swap(next);
    live.swap(next_live);
  }

  BasicCountDistribution<T> out(K);
  for (std::size_t u = 0; u < S; ++u) {
    if (!live[u]) continue;
    for (std::size_t c = 0; c < C; ++c) out[c] += cur[u * C + c];
  }
  return out;
}

template <class T>
std::vector<T> return_curve(const MarkovShift& shift, const CylinderSet& cyl, std::size_t max_delta) {
  cyl.check_admissible(shift);
  const int s = shift.alphabet_size();
  const auto su = static_cast<std::size_t>(s);
  const std::size_t n = cyl.length();
  const std::size_t L = std::max<std::size_t>(n - 1, 1);
  if (power_count(s, L) > 0x1.0p26) throw BudgetExceeded("short-return DP state space too large");
  const std::size_t S = ipow(s, L);
  const WordIndex index(cyl, s);

  std::vector<T> cur(S, T(0)), next(S, T(0));
  T muA(0);
  for (const Word& w : cyl.words()) {
    const T mu = word_measure<T>(shift, w);
    muA += mu;
    const std::span<const Symbol> tail(w.data() + (n - L), L);
    cur[word_code(tail, s)] += mu;
  }
  if (Measure<T>::zero(muA)) throw DomainError("conditional law given A is undefined: mu(A) = 0");
  for (auto& v : cur) v /= muA;

  std::vector<T> curve(max_delta + 1, T(0));
  for (std::size_t j = 1; j <= max_delta; ++j) {
    std::fill(next.begin(), next.end(), T(0));
    T returned(0);
    for (std::size_t u = 0; u < S; ++u) {
      if (Measure<T>::zero(cur[u])) continue;
      const auto last = static_cast<Symbol>(u % su);
      for (std::size_t b = 0; b < su; ++b) {
        const auto& pb = Measure<T>::p(shift, last, static_cast<Symbol>(b));
        if (Measure<T>::zero(pb)) continue;
        const std::uint64_t window = n >= 2 ? u * su + b : b;
        if (index.contains(window)) {
          returned += cur[u] * pb;
        } else {
          next[(u * su + b) % S] += cur[u] * pb;
        }
      }
    }
    cur.swap(next);
    curve[j] = curve[j - 1] + returned;
  }
  return curve;
}

}  // namespace

CountDistribution exact_hit_distribution(const MarkovShift& shift, const CylinderSet& cyl, std::size_t m,
                                         const HitDistributionOptions& opts) {
  return hit_dp<double>(shift, cyl, m, opts);
}

ExactCountDistribution exact_hit_distribution_exact(const MarkovShift& shift, const CylinderSet& cyl,
                                                    std::size_t m, const HitDistributionOptions& opts) {
  return hit_dp<Rational>(shift, cyl, m, opts);
}

std::vector<double> short_return_curve(const MarkovShift& shift, const CylinderSet& cyl, std::size_t max_delta) {
  return return_curve<double>(shift, cyl, max_delta);
}

std::vector<Rational> short_return_curve_exact(const MarkovShift& shift, const CylinderSet& cyl,
                                               std::size_t max_delta) {
  return return_curve<Rational>(shift, cyl, max_delta);
}

double short_return_prob(const MarkovShift& shift, const CylinderSet& cyl, std::size_t delta) {
  return short_return_curve(shift, cyl, delta).back();
}

Rational short_return_prob_exact(const MarkovShift& shift, const CylinderSet& cyl, std::size_t delta) {
  return short_return_curve_exact(shift, cyl, delta).back();
}

// ---------------------------------------------------------------------------
// Mixing coefficients
// ---------------------------------------------------------------------------

namespace {

Matrix matrix_product(const Matrix& A, const Matrix& B) {
  const std::size_t s = A.size();
  Matrix C(s, std::vector<double>(s, 0.0));
  for (std::size_t i = 0; i < s; ++i) {
    for (std::size_t l = 0; l < s; ++l) {
      if (A[i][l] == 0.0) continue;
      for (std::size_t j = 0; j < s; ++j) C[i][j] += A[i][l] * B[l][j];
    }
  }
  return C;
}

// P^e by repeated squaring.
Matrix matrix_power(Matrix P, int e) {
  const std::size_t s = P.size();
  Matrix result(s, std::vector<double>(s, 0.0));
  for (std::size_t i = 0; i < s; ++i) result[i][i] = 1.0;
  for (; e > 0; e >>= 1) {
    if (e & 1) result = matrix_product(result, P);
    if (e > 1) P = matrix_product(P, P);
  }
  return result;
}

struct Cell {
  Symbol first;
  Symbol last;
  double measure;     // μ of the cylinder
  double path;        // Π P along the word (μ / π(first))
};

std::vector<Cell> admissible_cells(const MarkovShift& shift, int len) {
  const int s = shift.alphabet_size();
  if (power_count(s, static_cast<std::size_t>(len)) > 4.0e6) {
    throw BudgetExceeded("too many " + std::to_string(len) + "-cylinders for the mixing computation");
  }
  const auto measures = all_word_measures<double>(shift, static_cast<std::size_t>(len));
  std::vector<Cell> out;
  for (std::size_t code = 0; code < measures.size(); ++code) {
    if (measures[code] <= 0.0) continue;
    const auto last = static_cast<Symbol>(code % static_cast<std::size_t>(s));
    std::size_t head = code;
    for (int i = 1; i < len; ++i) head /= static_cast<std::size_t>(s);
    const auto first = static_cast<Symbol>(head);
    out.push_back({first, last, measures[code], measures[code] / shift.pi(first)});
  }
  return out;
}

double split_value(const std::vector<long double>& sums) {
  long double pos = 0.0L, neg = 0.0L;
  for (long double v : sums) (v > 0 ? pos : neg) += v;
  return static_cast<double>(std::max(pos, -neg));
}

}  // namespace

MixingBracket mixing_coefficient(const MarkovShift& shift, int n, int L, int k, MixingKind kind,
                                 std::size_t exact_cells) {
  if (n < 1 || L < 1) throw ValidationError("mixing coefficient needs n >= 1 and L >= 1");
  if (k < 0) throw ValidationError("mixing gap k must be non-negative");
  const auto U = admissible_cells(shift, n);
  const auto V = admissible_cells(shift, L);
  if (static_cast<double>(U.size()) * static_cast<double>(V.size()) > 2.0e7) {
    throw BudgetExceeded("mixing covariance matrix too large");
  }
  // A ends at x_{n-1}, T^{-n-k}B starts at x_{n+k}: k+1 transitions apart.
  const Matrix Pk = matrix_power(shift.matrix(), k + 1);
  std::vector<std::vector<double>> cov(U.size(), std::vector<double>(V.size()));
  for (std::size_t i = 0; i < U.size(); ++i) {
    for (std::size_t j = 0; j < V.size(); ++j) {
      cov[i][j] = U[i].measure * V[j].path * (Pk[U[i].last][V[j].first] - shift.pi(V[j].first));
    }
  }

  const bool exact = U.size() <= exact_cells && V.size() <= exact_cells;
  MixingBracket out;
  out.exact = exact;

  if (kind == MixingKind::alpha) {
    if (exact) {
      double best = 0.0;
      std::vector<long double> col(V.size());
      for (std::uint32_t mask = 1; mask < (1u << U.size()); ++mask) {
        std::fill(col.begin(), col.end(), 0.0L);
        for (std::size_t i = 0; i < U.size(); ++i) {
          if (!(mask >> i & 1u)) continue;
          for (std::size_t j = 0; j < V.size(); ++j) col[j] += cov[i][j];
        }
        best = std::max(best, split_value(col));
      }
      out.lower = out.upper = best;
      return out;
    }
    long double pos = 0.0L, neg = 0.0L;
    for (const auto& row : cov) {
      for (double v : row) (v > 0 ? pos : neg) += v;
    }
    out.upper = static_cast<double>(std::max(pos, -neg));
    // Alternating maximization over (rows, columns) from a few starts gives an
    // attained value, hence a valid lower bound.
    double best = 0.0;
    for (int sign : {1, -1}) {
      std::vector<std::vector<char>> starts;
      starts.emplace_back(V.size(), 1);
      for (std::size_t j = 0; j < V.size() && j < 16; ++j) {
        starts.emplace_back(V.size(), 0);
        starts.back()[j] = 1;
      }
      for (auto cols : starts) {
        std::vector<char> rows(U.size(), 0);
        for (int iter = 0; iter < 64; ++iter) {
          bool changed = false;
          for (std::size_t i = 0; i < U.size(); ++i) {
            long double acc = 0.0L;
            for (std::size_t j = 0; j < V.size(); ++j) acc += cols[j] ? cov[i][j] : 0.0;
            const char want = sign * acc > 0;
            changed |= want != rows[i];
            rows[i] = want;
          }
          for (std::size_t j = 0; j < V.size(); ++j) {
            long double acc = 0.0L;
            for (std::size_t i = 0; i < U.size(); ++i) acc += rows[i] ? cov[i][j] : 0.0;
            const char want = sign * acc > 0;
            changed |= want != cols[j];
            cols[j] = want;
          }
          if (!changed) break;
        }
        long double total = 0.0L;
        for (std::size_t i = 0; i < U.size(); ++i) {
          for (std::size_t j = 0; j < V.size(); ++j) total += rows[i] && cols[j] ? cov[i][j] : 0.0;
        }
        best = std::max(best, static_cast<double>(sign * total));
      }
    }
    out.lower = std::min(best, out.upper);
    return out;
  }

  // phi: normalize by μ(B).
  if (exact) {
    double best = 0.0;
    std::vector<long double> row(U.size());
    for (std::uint32_t mask = 1; mask < (1u << V.size()); ++mask) {
      std::fill(row.begin(), row.end(), 0.0L);
      long double muB = 0.0L;
      for (std::size_t j = 0; j < V.size(); ++j) {
        if (!(mask >> j & 1u)) continue;
        muB += V[j].measure;
        for (std::size_t i = 0; i < U.size(); ++i) row[i] += cov[i][j];
      }
      best = std::max(best, split_value(row) / static_cast<double>(muB));
    }
    out.lower = out.upper = best;
    return out;
  }
  // The ratio over a union of cells is a mediant of per-cell ratios, so the
  // best single cell is both attained and an upper bound.
  double best = 0.0;
  std::vector<long double> column(U.size());
  for (std::size_t j = 0; j < V.size(); ++j) {
    for (std::size_t i = 0; i < U.size(); ++i) column[i] = cov[i][j];
    best = std::max(best, split_value(column) / V[j].measure);
  }
  out.lower = out.upper = best;
  return out;
}

}  // namespace reclab
