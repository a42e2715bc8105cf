#include "reclab/systems.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <queue>
#include <string>

#include "reclab/errors.hpp"

namespace reclab {

// ---------------------------------------------------------------------------
// Words
// ---------------------------------------------------------------------------

Word parse_word(std::string_view text) {
  if (text.empty()) throw ValidationError("empty word");
  Word w;
  w.reserve(text.size());
  bool digits = false;
  bool letters = false;
  for (char c : text) {
    if (c >= '0' && c <= '9') {
      digits = true;
      w.push_back(static_cast<Symbol>(c - '0'));
    } else if (c >= 'a' && c <= 'z') {
      letters = true;
      w.push_back(static_cast<Symbol>(c - 'a'));
    } else {
      throw ValidationError("invalid symbol '" + std::string(1, c) + "' in word '" +
                            std::string(text) + "'");
    }
  }
  if (digits && letters) {
    throw ValidationError("word '" + std::string(text) + "' mixes digit and letter symbols");
  }
  return w;
}

std::string format_word(const Word& w) {
  const bool use_letters = std::any_of(w.begin(), w.end(), [](Symbol a) { return a >= 10; });
  std::string out;
  out.reserve(w.size());
  for (Symbol a : w) out.push_back(use_letters ? static_cast<char>('a' + a) : static_cast<char>('0' + a));
  return out;
}

// ---------------------------------------------------------------------------
// Binary expansions
// ---------------------------------------------------------------------------

BinaryExpansion BinaryExpansion::from_double(double x) {
  if (!(x >= 0.0 && x < 1.0)) throw DomainError("binary expansion needs x in [0,1)");
  BinaryExpansion e;
  if (x == 0.0) return e;
  int exp = 0;
  std::frexp(x, &exp);  // x < 2^exp
  // x = M * 2^-(53 - exp) with M < 2^53; bits extend to position 53 - exp.
  const int last_bit = 53 - exp;
  const int words = (last_bit + 63) / 64;
  BigInt scaled = (exact_rational(x) * (BigInt(1) << (64 * words))).convert_to<BigInt>();
  e.prefix_.assign(static_cast<std::size_t>(words), 0);
  for (int i = words - 1; i >= 0; --i) {
    e.prefix_[static_cast<std::size_t>(i)] = static_cast<std::uint64_t>(scaled & BigInt(~std::uint64_t{0}));
    scaled >>= 64;
  }
  return e;
}

std::uint64_t BinaryExpansion::word(std::uint64_t index) const {
  if (index < prefix_.size()) return prefix_[index];
  if (!random_tail_) return 0;
  return mix64(seed_ + (index + 1) * kGoldenGamma);
}

bool BinaryExpansion::bit(std::uint64_t i) const {
  if (i == 0) return false;
  const std::uint64_t pos = i - 1;
  return (word(pos / 64) >> (63 - pos % 64)) & 1u;
}

std::uint64_t BinaryExpansion::window(std::uint64_t offset) const {
  const std::uint64_t q = offset / 64;
  const unsigned r = static_cast<unsigned>(offset % 64);
  if (r == 0) return word(q);
  return (word(q) << r) | (word(q + 1) >> (64 - r));
}

double BinaryExpansion::value(std::uint64_t offset) const {
  return static_cast<double>(window(offset) >> 11) * 0x1.0p-53;
}

// ---------------------------------------------------------------------------
// Metric systems
// ---------------------------------------------------------------------------

std::string_view to_string(MapKind kind) {
  switch (kind) {
    case MapKind::doubling: return "doubling";
    case MapKind::tent: return "tent";
    case MapKind::gauss: return "gauss";
  }
  return "unknown";
}

MapKind parse_map_kind(std::string_view name) {
  if (name == "doubling") return MapKind::doubling;
  if (name == "tent") return MapKind::tent;
  if (name == "gauss") return MapKind::gauss;
  throw ValidationError("unknown map '" + std::string(name) + "' (expected doubling, tent or gauss)");
}

bool MetricSystem::in_domain(double x) const {
  switch (kind_) {
    case MapKind::doubling: return x >= 0.0 && x < 1.0;
    case MapKind::tent: return x >= 0.0 && x <= 1.0;
    case MapKind::gauss: return x > 0.0 && x < 1.0;
  }
  return false;
}

double MetricSystem::map(double x) const {
  if (!in_domain(x)) {
    throw DomainError("point " + std::to_string(x) + " outside the domain of the " +
                      std::string(name()) + " map");
  }
  switch (kind_) {
    case MapKind::doubling: {
      const double y = 2.0 * x;
      return y >= 1.0 ? y - 1.0 : y;
    }
    case MapKind::tent:
      return x < 0.5 ? 2.0 * x : 2.0 * (1.0 - x);
    case MapKind::gauss: {
      const double y = 1.0 / x;
      return y - std::floor(y);
    }
  }
  return x;
}

double MetricSystem::distance(double x, double y) const {
  const double d = std::fabs(x - y);
  if (kind_ == MapKind::doubling) return std::min(d, 1.0 - d);
  return d;
}

double MetricSystem::sample(SplitMix64& rng) const {
  if (kind_ != MapKind::gauss) return rng.uniform();
  for (;;) {
    const double x = std::exp2(rng.uniform_open()) - 1.0;
    if (x > 0.0 && x < 1.0) return x;
  }
}

MetricPoint MetricSystem::sample_point(std::uint64_t seed) const {
  if (has_exact_orbits()) return BinaryExpansion(seed);
  SplitMix64 rng(seed);
  return sample(rng);
}

double MetricSystem::binary_orbit_value(const BinaryExpansion& x, std::uint64_t offset) const {
  switch (kind_) {
    case MapKind::doubling:
      return x.value(offset);
    case MapKind::tent: {
      // T^j(0.b1 b2 ...) = 0.(b_{j+1}^b_j)(b_{j+2}^b_j)...
      const std::uint64_t flip = x.bit(offset) ? ~std::uint64_t{0} : 0;
      return static_cast<double>((x.window(offset) ^ flip) >> 11) * 0x1.0p-53;
    }
    case MapKind::gauss:
      break;
  }
  throw ValidationError("the gauss map has no exact binary orbit");
}

double point_value(const MetricPoint& p) {
  if (const double* x = std::get_if<double>(&p)) return *x;
  return std::get<BinaryExpansion>(p).value(0);
}

OrbitCursor::OrbitCursor(const MetricSystem& system, const MetricPoint& x) : system_(system) {
  if (const auto* b = std::get_if<BinaryExpansion>(&x)) {
    if (!system.has_exact_orbits()) {
      throw ValidationError("binary expansions are only defined for doubling and tent orbits");
    }
    binary_ = *b;
    value_ = system_.binary_orbit_value(*binary_, 0);
  } else {
    value_ = std::get<double>(x);
    if (!system.in_domain(value_)) {
      throw DomainError("point " + std::to_string(value_) + " outside the domain of the " +
                        std::string(system.name()) + " map");
    }
  }
}

void OrbitCursor::advance() {
  ++time_;
  if (binary_) {
    value_ = system_.binary_orbit_value(*binary_, time_);
  } else {
    value_ = system_.map(value_);
  }
}

double iterate(const MetricSystem& system, double x, std::uint64_t k) {
  if (!system.in_domain(x)) {
    throw DomainError("point " + std::to_string(x) + " outside the domain of the " +
                      std::string(system.name()) + " map");
  }
  for (std::uint64_t i = 0; i < k; ++i) x = system.map(x);
  return x;
}

std::vector<double> orbit(const MetricSystem& system, double x, std::size_t n) {
  if (n == 0) throw ValidationError("orbit length must be at least 1");
  if (!system.in_domain(x)) {
    throw DomainError("point " + std::to_string(x) + " outside the domain of the " +
                      std::string(system.name()) + " map");
  }
  std::vector<double> out;
  out.reserve(n);
  out.push_back(x);
  for (std::size_t i = 1; i < n; ++i) out.push_back(system.map(out.back()));
  return out;
}

// ---------------------------------------------------------------------------
// Stationary distributions
// ---------------------------------------------------------------------------

namespace {

template <class T>
void check_square(const std::vector<std::vector<T>>& P) {
  if (P.size() < 2) throw ValidationError("transition matrix needs at least 2 states");
  if (P.size() > 255) throw ValidationError("alphabets are limited to 255 symbols");
  for (const auto& row : P) {
    if (row.size() != P.size()) throw ValidationError("transition matrix is not square");
  }
}

template <class T>
bool strongly_connected(const std::vector<std::vector<T>>& P) {
  const std::size_t s = P.size();
  auto reach_all = [&](bool reverse) {
    std::vector<bool> seen(s, false);
    std::queue<std::size_t> q;
    q.push(0);
    seen[0] = true;
    while (!q.empty()) {
      const std::size_t a = q.front();
      q.pop();
      for (std::size_t b = 0; b < s; ++b) {
        const bool edge = reverse ? P[b][a] > 0 : P[a][b] > 0;
        if (edge && !seen[b]) {
          seen[b] = true;
          q.push(b);
        }
      }
    }
    return std::all_of(seen.begin(), seen.end(), [](bool v) { return v; });
  };
  return reach_all(false) && reach_all(true);
}

// Solves x·P = x with Σx = 1 by Gaussian elimination on (Pᵀ - I) with the
// last equation replaced by the normalization.
template <class T, class Abs>
std::vector<T> solve_stationary(const std::vector<std::vector<T>>& P, Abs abs_fn) {
  const std::size_t s = P.size();
  std::vector<std::vector<T>> A(s, std::vector<T>(s + 1, T(0)));
  for (std::size_t i = 0; i + 1 < s; ++i) {
    for (std::size_t j = 0; j < s; ++j) A[i][j] = P[j][i] - (i == j ? T(1) : T(0));
  }
  for (std::size_t j = 0; j < s; ++j) A[s - 1][j] = T(1);
  A[s - 1][s] = T(1);
  for (std::size_t col = 0; col < s; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < s; ++r) {
      if (abs_fn(A[r][col]) > abs_fn(A[pivot][col])) pivot = r;
    }
    if (A[pivot][col] == T(0)) throw ValidationError("singular stationary system");
    std::swap(A[col], A[pivot]);
    for (std::size_t r = 0; r < s; ++r) {
      if (r == col || A[r][col] == T(0)) continue;
      const T factor = A[r][col] / A[col][col];
      for (std::size_t c = col; c <= s; ++c) A[r][c] -= factor * A[col][c];
    }
  }
  std::vector<T> x(s);
  for (std::size_t i = 0; i < s; ++i) x[i] = A[i][s] / A[i][i];
  return x;
}

double stationary_residual(const Matrix& P, const std::vector<double>& pi) {
  double worst = 0.0;
  for (std::size_t j = 0; j < P.size(); ++j) {
    long double acc = 0.0L;
    for (std::size_t i = 0; i < P.size(); ++i) acc += static_cast<long double>(pi[i]) * P[i][j];
    worst = std::max(worst, static_cast<double>(std::fabs(acc - pi[j])));
  }
  return worst;
}

}  // namespace

std::vector<double> stationary_distribution(const Matrix& P) {
  check_square(P);
  for (const auto& row : P) {
    long double sum = 0.0L;
    for (double v : row) {
      if (!std::isfinite(v) || v < 0.0) throw ValidationError("transition probabilities must be finite and non-negative");
      sum += v;
    }
    if (std::fabs(static_cast<double>(sum) - 1.0) > 1e-12) {
      throw ValidationError("transition matrix rows must sum to 1");
    }
  }
  if (!strongly_connected(P)) throw ValidationError("transition matrix is reducible");

  std::vector<std::vector<long double>> Pl(P.size());
  for (std::size_t i = 0; i < P.size(); ++i) Pl[i].assign(P[i].begin(), P[i].end());
  auto xl = solve_stationary(Pl, [](long double v) { return std::fabs(v); });
  std::vector<double> pi(xl.begin(), xl.end());
  // Polish with a few power steps; they cannot increase the residual of an
  // already stationary vector.
  for (int it = 0; it < 4 && stationary_residual(P, pi) >= 1e-13; ++it) {
    std::vector<long double> next(P.size(), 0.0L);
    for (std::size_t i = 0; i < P.size(); ++i) {
      for (std::size_t j = 0; j < P.size(); ++j) next[j] += static_cast<long double>(pi[i]) * P[i][j];
    }
    const long double total = std::accumulate(next.begin(), next.end(), 0.0L);
    for (std::size_t j = 0; j < P.size(); ++j) pi[j] = static_cast<double>(next[j] / total);
  }
  if (stationary_residual(P, pi) >= 1e-12) {
    throw ValidationError("stationary solve did not reach residual 1e-12");
  }
  for (double v : pi) {
    if (!(v > 0.0)) throw ValidationError("stationary vector is not strictly positive");
  }
  return pi;
}

std::vector<Rational> stationary_distribution(const RationalMatrix& P) {
  check_square(P);
  for (const auto& row : P) {
    Rational sum = 0;
    for (const Rational& v : row) {
      if (v < 0) throw ValidationError("transition probabilities must be non-negative");
      sum += v;
    }
    if (sum != 1) throw ValidationError("transition matrix rows must sum to exactly 1");
  }
  if (!strongly_connected(P)) throw ValidationError("transition matrix is reducible");
  return solve_stationary(P, [](const Rational& v) { return v < 0 ? Rational(-v) : v; });
}

// ---------------------------------------------------------------------------
// Markov shifts
// ---------------------------------------------------------------------------

MarkovShift MarkovShift::from_matrix(const Matrix& P) {
  MarkovShift m;
  m.pi_ = stationary_distribution(P);
  m.P_ = P;
  m.s_ = static_cast<int>(P.size());
  m.finish();
  return m;
}

MarkovShift MarkovShift::from_rational(const RationalMatrix& P) {
  MarkovShift m;
  auto pi = stationary_distribution(P);
  m.s_ = static_cast<int>(P.size());
  m.P_.assign(P.size(), std::vector<double>(P.size(), 0.0));
  for (std::size_t i = 0; i < P.size(); ++i) {
    for (std::size_t j = 0; j < P.size(); ++j) m.P_[i][j] = to_double(P[i][j]);
  }
  m.pi_.resize(pi.size());
  for (std::size_t i = 0; i < pi.size(); ++i) m.pi_[i] = to_double(pi[i]);
  m.exact_P_ = P;
  m.exact_pi_ = std::move(pi);
  m.finish();
  return m;
}

MarkovShift MarkovShift::full_shift(int s) {
  if (s < 2) throw ValidationError("full shift needs at least 2 symbols");
  return from_rational(RationalMatrix(static_cast<std::size_t>(s),
                                      std::vector<Rational>(static_cast<std::size_t>(s), Rational(1, s))));
}

MarkovShift MarkovShift::bernoulli(const std::vector<Rational>& probs) {
  return from_rational(RationalMatrix(probs.size(), probs));
}

MarkovShift MarkovShift::golden_mean() {
  return from_rational({{Rational(1, 2), Rational(1, 2)}, {Rational(1), Rational(0)}});
}

void MarkovShift::finish() {
  // Power-positivity index; Wielandt's bound (s-1)^2 + 1 caps the search.
  const std::size_t s = static_cast<std::size_t>(s_);
  std::vector<std::vector<bool>> adj(s, std::vector<bool>(s)), power;
  for (std::size_t i = 0; i < s; ++i) {
    for (std::size_t j = 0; j < s; ++j) adj[i][j] = P_[i][j] > 0.0;
  }
  power = adj;
  const int limit = (s_ - 1) * (s_ - 1) + 1;
  for (int k = 1; k <= limit; ++k) {
    bool positive = true;
    for (const auto& row : power) {
      positive = positive && std::all_of(row.begin(), row.end(), [](bool v) { return v; });
    }
    if (positive) {
      k0_ = k;
      return;
    }
    std::vector<std::vector<bool>> next(s, std::vector<bool>(s, false));
    for (std::size_t i = 0; i < s; ++i) {
      for (std::size_t l = 0; l < s; ++l) {
        if (!power[i][l]) continue;
        for (std::size_t j = 0; j < s; ++j) {
          if (adj[l][j]) next[i][j] = true;
        }
      }
    }
    power = std::move(next);
  }
  throw ValidationError("transition graph is not aperiodic");
}

const Rational& MarkovShift::p_exact(Symbol a, Symbol b) const { return exact_matrix()[a][b]; }

const Rational& MarkovShift::pi_exact(Symbol a) const {
  if (!exact_pi_) throw ValidationError("shift was not built from rational transition probabilities");
  return (*exact_pi_)[a];
}

const RationalMatrix& MarkovShift::exact_matrix() const {
  if (!exact_P_) throw ValidationError("shift was not built from rational transition probabilities");
  return *exact_P_;
}

bool MarkovShift::is_admissible(const Word& w) const {
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] >= s_) return false;
    if (i > 0 && !allowed(w[i - 1], w[i])) return false;
  }
  return true;
}

void MarkovShift::check_admissible(const Word& w) const {
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] >= s_) {
      throw DomainError("symbol " + std::to_string(int(w[i])) + " outside alphabet of size " +
                        std::to_string(s_));
    }
    if (i > 0 && !allowed(w[i - 1], w[i])) {
      throw DomainError("forbidden transition " + std::to_string(int(w[i - 1])) + "->" +
                        std::to_string(int(w[i])) + " in word " + format_word(w));
    }
  }
}

Word iterate(const MarkovShift& shift, const Word& w, std::uint64_t k) {
  shift.check_admissible(w);
  if (k > w.size()) throw DomainError("cannot shift a word of length " + std::to_string(w.size()) +
                                      " by " + std::to_string(k));
  return Word(w.begin() + static_cast<std::ptrdiff_t>(k), w.end());
}

std::vector<Word> orbit(const MarkovShift& shift, const Word& w, std::size_t n) {
  if (n == 0) throw ValidationError("orbit length must be at least 1");
  shift.check_admissible(w);
  if (n > w.size() + 1) throw DomainError("orbit longer than the word allows");
  std::vector<Word> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) out.emplace_back(w.begin() + static_cast<std::ptrdiff_t>(k), w.end());
  return out;
}

namespace {

Symbol draw(const std::vector<double>& probs, double u) {
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    last_positive = i;
    acc += probs[i];
    if (u < acc) return static_cast<Symbol>(i);
  }
  return static_cast<Symbol>(last_positive);
}

}  // namespace

void sample_stationary(const MarkovShift& shift, SplitMix64& rng, std::size_t length, Word& out) {
  out.resize(length);
  if (length == 0) return;
  out[0] = draw(shift.stationary(), rng.uniform());
  const Matrix& P = shift.matrix();
  for (std::size_t i = 1; i < length; ++i) out[i] = draw(P[out[i - 1]], rng.uniform());
}

Word sample_stationary(const MarkovShift& shift, std::uint64_t seed, std::size_t length) {
  if (length == 0) throw ValidationError("sample length must be at least 1");
  SplitMix64 rng(seed);
  Word w;
  sample_stationary(shift, rng, length, w);
  return w;
}

}  // namespace reclab
