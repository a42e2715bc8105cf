#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "reclab/bowen.hpp"
#include "reclab/errors.hpp"
#include "reclab/harness.hpp"
#include "reclab/io.hpp"
#include "reclab/parallel.hpp"
#include "reclab/random.hpp"
#include "reclab/stein.hpp"
#include "reclab/symbolic.hpp"

#ifndef RECLAB_VERSION
#define RECLAB_VERSION "0.0.0"
#endif

namespace reclab::cli {

namespace fs = std::filesystem;

std::vector<long long> parse_grid(const std::string& text) {
  std::vector<long long> out;
  std::stringstream ss(text);
  std::string item;
  auto to_int = [&](const std::string& s) {
    long long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
      throw ValidationError("bad grid entry \"" + s + "\" in \"" + text + "\"");
    }
    return v;
  };
  while (std::getline(ss, item, ',')) {
    const auto dots = item.find("..");
    if (dots == std::string::npos) {
      out.push_back(to_int(item));
      continue;
    }
    const long long a = to_int(item.substr(0, dots));
    const long long b = to_int(item.substr(dots + 2));
    if (b < a) throw ValidationError("empty range \"" + item + "\"");
    if (b - a > 1'000'000) throw ValidationError("range \"" + item + "\" is too long");
    for (long long v = a; v <= b; ++v) out.push_back(v);
  }
  if (out.empty()) throw ValidationError("empty grid \"" + text + "\"");
  return out;
}

namespace {

// Options shared by every subcommand.
struct Common {
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  unsigned workers = 1;
  std::string config;
};

struct Outputs {
  std::string csv;
  Json json;
  std::vector<std::pair<std::string, std::string>> extra;  // file name, content
};

std::uint64_t resolve_seed(const Common& c) {
  if (c.seed) return *c.seed;
  if (const char* env = std::getenv("RECLAB_SEED")) {
    std::uint64_t v = 0;
    const std::string s(env);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
      throw ValidationError("RECLAB_SEED must be a non-negative integer, got \"" + s + "\"");
    }
    return v;
  }
  return 0;
}

Json header(const std::string& command) { return Json{{"schema_version", kSchemaVersion}, {"command", command}}; }

std::string opt_double(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

template <class T>
Json opt_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

double median_of(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

Json nullable(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

int checked_length(long long n) {
  if (n < 1 || n > 4096) throw ValidationError("word or ball length n must lie in [1, 4096], got " + std::to_string(n));
  return static_cast<int>(n);
}

// 0^{n-1}1: no proper suffix equals a prefix.
Word nonoverlap_word(int n) {
  Word w(static_cast<std::size_t>(n - 1), 0);
  w.push_back(1);
  return w;
}

struct CylinderChoice {
  std::string word;
  std::string words_file;
  std::string family;
  std::string n_grid;
};

void add_cylinder_options(CLI::App* sub, CylinderChoice& c, const std::string& default_grid) {
  c.n_grid = default_grid;
  sub->add_option("--word", c.word, "Target word, e.g. 0001");
  sub->add_option("--words-file", c.words_file, "File with one target word per line");
  sub->add_option("--family", c.family, "Word family over the n grid (nonoverlap: 0...01)")
      ->check(CLI::IsMember({"nonoverlap"}));
  sub->add_option("--n", c.n_grid, "Length grid, e.g. 4,8,12 or 4..12")->capture_default_str();
}

std::vector<CylinderSet> cylinder_targets(const CylinderChoice& c) {
  const int chosen = !c.word.empty() + !c.words_file.empty() + !c.family.empty();
  if (chosen > 1) throw ValidationError("choose one of --word, --words-file and --family");
  if (!c.word.empty()) return {CylinderSet::parse({c.word})};
  if (!c.words_file.empty()) return {read_cylinder_file(c.words_file)};
  std::vector<CylinderSet> out;
  for (long long n : parse_grid(c.n_grid)) out.emplace_back(std::vector<Word>{nonoverlap_word(checked_length(n))});
  return out;
}

Json cylinder_json(const CylinderSet& cyl) {
  Json words = Json::array();
  for (const Word& w : cyl.words()) words.push_back(format_word(w));
  return words;
}

MetricPoint scan_center(const MetricSystem& sys, std::uint64_t seed, std::uint64_t index) {
  return sys.sample_point(derive_seed(seed, index));
}

const MetricSystem& require_metric(const SystemSpec& s, const std::string& what) {
  if (const auto* m = std::get_if<MetricSystem>(&s)) return *m;
  throw ValidationError(what + " needs an interval or circle map (doubling, tent or gauss)");
}

const MarkovShift& require_shift(const SystemSpec& s, const std::string& what) {
  if (const auto* m = std::get_if<MarkovShift>(&s)) return *m;
  throw ValidationError(what + " needs a symbolic system (fair-coin, golden-mean, full-shift-<s> or markov)");
}

void check_t(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw ValidationError("t must be positive");
}

void check_eps(double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw ValidationError("eps must be positive");
}

// ---------------------------------------------------------------------------
// poisson-check
// ---------------------------------------------------------------------------

struct PoissonCheck {
  std::string system = "fair-coin";
  std::string matrix;
  CylinderChoice cyl;
  double t = 1.0;
  std::uint64_t trials = 10'000;
  std::optional<std::size_t> cap;
  double eps = 0.1;
  std::optional<double> center;
  std::uint64_t measure_samples = 1'000'000;
  bool no_exact = false;
  bool chen_stein = false;
};

Outputs run_poisson_check(const PoissonCheck& o, std::uint64_t seed, unsigned workers) {
  check_t(o.t);
  if (o.trials < 1) throw ValidationError("trials must be at least 1");
  const SystemSpec system = make_system(o.system, o.matrix);

  std::vector<std::pair<Json, ExperimentConfig>> runs;
  ExperimentConfig base;
  base.system = system;
  base.t = o.t;
  base.trials = o.trials;
  base.seed = seed;
  base.cap = o.cap;
  base.workers = workers;
  base.measure_samples = o.measure_samples;
  base.exact_oracle = !o.no_exact;
  base.chen_stein = o.chen_stein;

  if (std::holds_alternative<MarkovShift>(system)) {
    for (const CylinderSet& cyl : cylinder_targets(o.cyl)) {
      ExperimentConfig c = base;
      c.target = CylinderTarget{cyl};
      runs.emplace_back(Json{{"words", cylinder_json(cyl)}}, std::move(c));
    }
  } else {
    if (!o.cyl.word.empty() || !o.cyl.words_file.empty() || !o.cyl.family.empty()) {
      throw ValidationError("--word, --words-file and --family apply to symbolic systems only");
    }
    check_eps(o.eps);
    for (long long n : parse_grid(o.cyl.n_grid)) {
      ExperimentConfig c = base;
      c.target = BallTarget{o.eps, checked_length(n), o.center};
      Json target{{"eps", o.eps}, {"center", opt_json(o.center)}};
      runs.emplace_back(std::move(target), std::move(c));
    }
  }

  CsvTable table({"n", "k", "emp", "exact", "poisson", "z"});
  Json results = Json::array();
  for (auto& [target, cfg] : runs) {
    const ExperimentReport r = run_experiment(cfg);
    for (std::size_t k = 0; k < r.empirical.cell_count(); ++k) {
      const std::string label = k <= r.cap ? std::to_string(k) : ">" + std::to_string(r.cap);
      table.add_row({std::to_string(r.n), label, format_double(r.empirical[k]),
                     r.exact ? format_double((*r.exact)[k]) : std::string(), format_double(r.poisson[k]),
                     format_double(r.z[k])});
    }
    const SummaryRow row = compare_to_poisson(r);
    Json summary{{"n", row.n},
                 {"m", row.m},
                 {"mu_hat", row.mu_hat},
                 {"t", row.t},
                 {"tv_emp_poisson", row.tv_emp_poisson},
                 {"tv_exact_poisson", opt_json(row.tv_exact_poisson)},
                 {"tv_emp_exact", opt_json(r.tv_emp_exact)},
                 {"max_z", row.max_z},
                 {"chen_stein_value", opt_json(row.chen_stein_value)}};
    results.push_back(Json{{"target", target}, {"summary", std::move(summary)}, {"report", report_to_json(r)}});
  }
  Json j = header("poisson-check");
  j["system"] = system_to_json(system);
  j["results"] = std::move(results);
  return {table.str(), std::move(j), {}};
}

// ---------------------------------------------------------------------------
// period-scan
// ---------------------------------------------------------------------------

struct PeriodScan {
  std::string system = "doubling";
  double eps = 0.05;
  std::string n_grid = "8,16,24";
  std::uint64_t centers = 100;
  std::string method = "exact";
  std::uint64_t samples = 4096;
};

bool near_short_orbit(double x) {
  const double tol = 0x1.0p-20;
  for (double p : {0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0}) {
    if (std::fabs(x - p) < tol) return true;
  }
  return false;
}

Outputs run_period_scan(const PeriodScan& o, std::uint64_t seed, unsigned workers) {
  check_eps(o.eps);
  if (o.centers < 1) throw ValidationError("centers must be at least 1");
  const SystemSpec system = make_system(o.system);
  const MetricSystem& sys = require_metric(system, "period-scan");
  const bool exact = o.method == "exact";
  if (exact && sys.kind() != MapKind::doubling) {
    throw ValidationError("exact periods need the doubling map; use --method sampled for " + std::string(sys.name()));
  }
  const auto grid = parse_grid(o.n_grid);
  const int slack = static_cast<int>(std::ceil(std::log2(1.0 / (2.0 * o.eps))));

  CsvTable table({"n", "center", "tau", "tau_over_n"});
  Json per_n = Json::array();
  for (long long nn : grid) {
    const int n = checked_length(nn);
    auto parts = parallel_ranges(o.centers, workers, [&](std::uint64_t begin, std::uint64_t end) {
      std::vector<std::pair<double, BallPeriod>> rows;
      for (std::uint64_t i = begin; i < end; ++i) {
        const MetricPoint x = scan_center(sys, seed, i);
        const BowenBall ball(sys, x, o.eps, n);
        PeriodMethod method = ExactDoubling{};
        if (!exact) method = SampledPeriod{o.samples, derive_seed(derive_seed(seed, i), static_cast<std::uint64_t>(n))};
        rows.emplace_back(ball.center_value(), ball_period(ball, method));
      }
      return rows;
    });
    std::vector<double> ratios, kept;
    std::uint64_t max_tau = 0, excluded = 0;
    for (const auto& part : parts) {
      for (const auto& [x, bp] : part) {
        std::optional<std::uint64_t> tau = exact ? std::optional<std::uint64_t>(bp.lower) : bp.upper;
        const std::string tau_s = tau ? std::to_string(*tau) : std::string();
        const std::string ratio_s = tau ? format_double(static_cast<double>(*tau) / n) : std::string();
        table.add_row({std::to_string(n), format_double(x), tau_s, ratio_s});
        if (!tau) continue;
        const double r = static_cast<double>(*tau) / n;
        ratios.push_back(r);
        max_tau = std::max(max_tau, *tau);
        if (near_short_orbit(x)) {
          ++excluded;
        } else {
          kept.push_back(r);
        }
      }
    }
    const std::uint64_t upper_bound = static_cast<std::uint64_t>(n + slack + 1);
    per_n.push_back(Json{{"n", n},
                         {"centers", o.centers},
                         {"min_tau_over_n", ratios.empty() ? Json(nullptr) : Json(*std::min_element(ratios.begin(), ratios.end()))},
                         {"median_tau_over_n", nullable(median_of(ratios))},
                         {"max_tau_over_n", ratios.empty() ? Json(nullptr) : Json(*std::max_element(ratios.begin(), ratios.end()))},
                         {"min_tau_over_n_excluding_short_orbits",
                          kept.empty() ? Json(nullptr) : Json(*std::min_element(kept.begin(), kept.end()))},
                         {"excluded_centers", excluded},
                         {"max_tau", max_tau},
                         {"upper_bound", upper_bound},
                         {"within_upper_bound", max_tau <= upper_bound}});
  }
  Json j = header("period-scan");
  j["system"] = system_to_json(system);
  j["eps"] = o.eps;
  j["method"] = o.method;
  j["certified"] = exact;
  j["per_n"] = std::move(per_n);
  return {table.str(), std::move(j), {}};
}

// ---------------------------------------------------------------------------
// entropy
// ---------------------------------------------------------------------------

struct Entropy {
  std::string system = "doubling";
  double eps = 0.1;
  std::string n_grid = "16";
  std::uint64_t centers = 50;
  std::optional<double> center;
  std::uint64_t cap = std::uint64_t{1} << 24;
  std::string method = "exact";
  std::uint64_t samples = 1'000'000;
};

std::optional<double> reference_entropy(MapKind kind) {
  switch (kind) {
    case MapKind::doubling:
    case MapKind::tent:
      return std::numbers::ln2;
    case MapKind::gauss:
      return std::numbers::pi * std::numbers::pi / (6.0 * std::numbers::ln2);
  }
  return std::nullopt;
}

Outputs run_entropy(const Entropy& o, std::uint64_t seed, unsigned workers) {
  check_eps(o.eps);
  if (o.centers < 1) throw ValidationError("centers must be at least 1");
  if (o.cap < 1) throw ValidationError("cap must be at least 1");
  const SystemSpec system = make_system(o.system);
  const MetricSystem& sys = require_metric(system, "entropy");
  const bool exact = o.method == "exact";
  const std::uint64_t count = o.center ? 1 : o.centers;

  CsvTable table({"n", "center", "measure", "brin_katok", "recurrence", "varandas"});
  Json per_n = Json::array();
  for (long long nn : parse_grid(o.n_grid)) {
    const int n = checked_length(nn);
    auto parts = parallel_ranges(count, workers, [&](std::uint64_t begin, std::uint64_t end) {
      std::vector<std::pair<double, EntropyEstimate>> rows;
      for (std::uint64_t i = begin; i < end; ++i) {
        const MetricPoint x = o.center ? MetricPoint(*o.center) : scan_center(sys, seed, i);
        MeasureMethod method = ExactDoubling{};
        if (!exact) method = MonteCarlo{o.samples, derive_seed(derive_seed(seed, ~i), static_cast<std::uint64_t>(n)), 1};
        rows.emplace_back(point_value(x), entropy_estimates(sys, x, o.eps, n, method, o.cap));
      }
      return rows;
    });
    std::vector<double> bk, va;
    std::uint64_t overflow = 0;
    for (const auto& part : parts) {
      for (const auto& [x, e] : part) {
        table.add_row({std::to_string(n), format_double(x), format_double(e.measure), format_double(e.brin_katok),
                       e.recurrence ? std::to_string(*e.recurrence) : std::string(), opt_double(e.varandas)});
        bk.push_back(e.brin_katok);
        if (e.varandas) {
          va.push_back(*e.varandas);
        } else {
          ++overflow;
        }
      }
    }
    per_n.push_back(Json{{"n", n},
                         {"centers", count},
                         {"median_brin_katok", nullable(median_of(bk))},
                         {"median_varandas", nullable(median_of(va))},
                         {"recurrence_overflows", overflow}});
  }
  Json j = header("entropy");
  j["system"] = system_to_json(system);
  j["eps"] = o.eps;
  j["cap"] = o.cap;
  j["method"] = o.method;
  j["reference_entropy"] = opt_json(reference_entropy(sys.kind()));
  j["per_n"] = std::move(per_n);
  return {table.str(), std::move(j), {}};
}

// ---------------------------------------------------------------------------
// stein-bound
// ---------------------------------------------------------------------------

struct SteinBoundCmd {
  std::string system = "fair-coin";
  std::string matrix;
  CylinderChoice cyl;
  double t = 1.0;
  std::optional<std::size_t> cap;
  std::string solution_set;
};

Outputs run_stein_bound(const SteinBoundCmd& o) {
  check_t(o.t);
  const SystemSpec system = make_system(o.system, o.matrix);
  const MarkovShift& shift = require_shift(system, "stein-bound");
  const std::size_t K = o.cap.value_or(default_cap(o.t));
  const CountDistribution poisson = poisson_law(o.t, K);

  CsvTable table({"n", "m", "mu", "tau", "delta_star", "alpha_term", "delta_term", "short_return_term", "log_factor",
                  "bound", "tv_exact_poisson", "ratio"});
  Json rows = Json::array();
  std::vector<CylinderSet> targets = cylinder_targets(o.cyl);
  for (const CylinderSet& cyl : targets) {
    cyl.check_admissible(shift);
    const double mu = shift.has_exact() ? to_double(cylinder_measure_exact(shift, cyl)) : cylinder_measure(shift, cyl);
    const std::uint64_t m = kac_length(o.t, mu);
    HitDistributionOptions opts;
    opts.cap = K;
    const CountDistribution law = exact_hit_distribution(shift, cyl, m, opts);
    const double tv = tv_distance(law, poisson);
    const ChenSteinBound b = cylinder_chen_stein(shift, cyl, m);
    const double ratio = tv / b.value;
    table.add_row({std::to_string(cyl.length()), std::to_string(m), format_double(mu), std::to_string(b.tau),
                   std::to_string(b.delta), format_double(b.alpha_term), format_double(b.delta_term),
                   format_double(b.short_return_term), format_double(b.log_factor), format_double(b.value),
                   format_double(tv), format_double(ratio)});
    rows.push_back(Json{{"n", cyl.length()},
                        {"words", cylinder_json(cyl)},
                        {"tv_exact_poisson", tv},
                        {"ratio", nullable(ratio)},
                        {"bound", chen_stein_to_json(b)}});
  }
  Json j = header("stein-bound");
  j["system"] = system_to_json(system);
  j["t"] = o.t;
  j["cap"] = K;
  j["rows"] = std::move(rows);

  Outputs out{table.str(), Json(), {}};
  if (!o.solution_set.empty()) {
    std::vector<std::size_t> E;
    if (o.solution_set != "none") {
      for (long long e : parse_grid(o.solution_set)) {
        if (e < 0) throw ValidationError("Stein set elements must be non-negative");
        E.push_back(static_cast<std::size_t>(e));
      }
    }
    const SteinSolution s = stein_solve(o.t, E, K);
    out.extra.emplace_back("stein-bound.solution.csv", stein_csv(s));
    j["solution"] = Json{{"set", E}, {"nu", s.nu}, {"max_residual", s.max_residual()}, {"seam_mismatch", s.seam_mismatch}};
  }
  out.json = std::move(j);
  return out;
}

// ---------------------------------------------------------------------------
// approx-gap
// ---------------------------------------------------------------------------

struct ApproxGap {
  double eps = 0.1;
  int n = 6;
  std::optional<double> center;
  std::string depth_grid = "8..20";
  double t = 1.0;
};

Outputs run_approx_gap(const ApproxGap& o, std::uint64_t seed) {
  check_eps(o.eps);
  check_t(o.t);
  const MetricSystem sys(MapKind::doubling);
  const MetricPoint x = o.center ? MetricPoint(*o.center) : scan_center(sys, seed, 0);
  const BowenBall ball(sys, x, o.eps, o.n);
  CsvTable table = approximation_table();
  Json rows = Json::array();
  for (long long N : parse_grid(o.depth_grid)) {
    if (N < 1 || N > 64) throw ValidationError("approximation depth N out of range: " + std::to_string(N));
    const CylinderApproximation a = cylinder_approximation(ball, static_cast<int>(N));
    add_approximation_row(table, a, o.t);
    rows.push_back(Json{{"N", a.depth},
                        {"inner_cylinders", a.inner_count()},
                        {"boundary_cylinders", a.boundary.size()},
                        {"outer_cylinders", a.outer_count()},
                        {"mu_ball", to_string(a.mu_ball)},
                        {"mu_inner", to_string(a.mu_inner)},
                        {"mu_boundary", to_string(a.mu_boundary)},
                        {"theta_hat", a.theta_hat()},
                        {"lemma13_bound", a.gap_bound(o.t)}});
  }
  Json j = header("approx-gap");
  j["eps"] = o.eps;
  j["n"] = o.n;
  j["center"] = ball.center_value();
  j["t"] = o.t;
  j["rows"] = std::move(rows);
  return {table.str(), std::move(j), {}};
}

// ---------------------------------------------------------------------------
// cluster-count
// ---------------------------------------------------------------------------

struct ClusterCount {
  double eps = 0.1;
  std::string n_grid = "10..40";
  std::optional<double> center;
  double delta = 0.1;
  double beta = 0.1;
  std::size_t max_cluster = std::size_t{1} << 20;
};

Outputs run_cluster_count(const ClusterCount& o, std::uint64_t seed) {
  check_eps(o.eps);
  if (!(o.beta >= 0.0 && o.beta <= 1.0)) throw ValidationError("beta must lie in [0, 1]");
  const MetricSystem sys(MapKind::doubling);
  const MarkovShift coin = MarkovShift::full_shift(2);
  const MetricPoint x = o.center ? MetricPoint(*o.center) : scan_center(sys, seed, 0);
  CsvTable table({"n", "count", "exp_delta_n", "cluster_size", "lambda_bound"});
  Json rows = Json::array();
  for (long long nn : parse_grid(o.n_grid)) {
    const int n = checked_length(nn);
    const BowenBall ball(sys, x, o.eps, n);
    const std::uint64_t count = count_intersecting_cylinders(ball, n);
    const double envelope = std::exp(o.delta * n);
    // The n-cylinder of the center, as a binary word.
    Word w(static_cast<std::size_t>(n));
    if (const auto* b = std::get_if<BinaryExpansion>(&x)) {
      for (int i = 0; i < n; ++i) w[static_cast<std::size_t>(i)] = b->bit(static_cast<std::uint64_t>(i + 1));
    } else {
      const BinaryExpansion e = BinaryExpansion::from_double(std::get<double>(x));
      for (int i = 0; i < n; ++i) w[static_cast<std::size_t>(i)] = e.bit(static_cast<std::uint64_t>(i + 1));
    }
    const CylinderSet cluster = hamming_cluster(coin, w, o.beta, o.max_cluster);
    const std::uint64_t lambda = lambda_bound(n, 2, o.beta);
    table.add_row({std::to_string(n), std::to_string(count), format_double(envelope), std::to_string(cluster.size()),
                   std::to_string(lambda)});
    rows.push_back(Json{{"n", n},
                        {"count", count},
                        {"exp_delta_n", envelope},
                        {"count_within_envelope", static_cast<double>(count) <= envelope},
                        {"center_word", format_word(w)},
                        {"cluster_size", cluster.size()},
                        {"lambda_bound", lambda}});
  }
  Json j = header("cluster-count");
  j["eps"] = o.eps;
  j["center"] = point_value(x);
  j["delta"] = o.delta;
  j["beta"] = o.beta;
  j["rows"] = std::move(rows);
  return {table.str(), std::move(j), {}};
}

// ---------------------------------------------------------------------------
// mixing
// ---------------------------------------------------------------------------

struct Mixing {
  std::string system = "markov";
  std::string matrix = "7/10,3/10;3/10,7/10";
  int n = 1;
  int L = 1;
  std::string k_grid = "1..10";
  std::string kind = "both";
  std::size_t exact_cells = 12;
};

Outputs run_mixing(const Mixing& o) {
  const SystemSpec system = make_system(o.system, o.matrix);
  const MarkovShift& shift = require_shift(system, "mixing");
  std::vector<MixingKind> kinds;
  if (o.kind == "alpha" || o.kind == "both") kinds.push_back(MixingKind::alpha);
  if (o.kind == "phi" || o.kind == "both") kinds.push_back(MixingKind::phi);
  CsvTable table({"k", "kind", "lower", "upper", "exact"});
  Json rows = Json::array();
  for (long long k : parse_grid(o.k_grid)) {
    if (k < 0 || k > 1'000'000) throw ValidationError("mixing gap k out of range: " + std::to_string(k));
    for (MixingKind kind : kinds) {
      const MixingBracket b = mixing_coefficient(shift, o.n, o.L, static_cast<int>(k), kind, o.exact_cells);
      const char* name = kind == MixingKind::alpha ? "alpha" : "phi";
      table.add_row({std::to_string(k), name, format_double(b.lower), format_double(b.upper), b.exact ? "true" : "false"});
      rows.push_back(Json{{"k", k}, {"kind", name}, {"lower", b.lower}, {"upper", b.upper}, {"exact", b.exact}});
    }
  }
  Json j = header("mixing");
  j["system"] = system_to_json(system);
  j["n"] = o.n;
  j["L"] = o.L;
  j["rows"] = std::move(rows);
  return {table.str(), std::move(j), {}};
}

// ---------------------------------------------------------------------------
// Plumbing
// ---------------------------------------------------------------------------

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--out", c.out, "Output directory")->capture_default_str();
  sub->add_option("--seed", c.seed, "Master seed (falls back to RECLAB_SEED, then 0)");
  sub->add_option("--workers", c.workers, "Worker threads; outputs do not depend on it")
      ->check(CLI::Range(1u, 1024u))
      ->capture_default_str();
  sub->add_option("--config", c.config, "Flat key = value file; flags override it");
}

bool has_flag(const std::vector<std::string>& args, const std::string& name) {
  for (const auto& a : args) {
    if (a == name || a.starts_with(name + "=")) return true;
  }
  return false;
}

// Appends the entries of a flat config file for options the command line
// leaves unset.
std::vector<std::string> apply_config(CLI::App* sub, std::vector<std::string> args, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file " + path);
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigTOML().from_config(in);
  } catch (const CLI::Error& e) {
    throw ValidationError("bad config file " + path + ": " + e.what());
  }
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--" || item.inputs.empty()) continue;
    if (!item.parents.empty()) throw ValidationError("config file must be flat; found section for key " + item.name);
    const std::string flag = "--" + item.name;
    if (item.name == "config") throw ValidationError("config files cannot name another config file");
    const CLI::Option* opt = sub->get_option_no_throw(flag);
    if (!opt) throw ValidationError("unknown config key \"" + item.name + "\" for " + sub->get_name());
    if (has_flag(args, flag)) continue;
    if (opt->get_expected_min() == 0) {
      const std::string& v = item.inputs.front();
      if (v == "true" || v == "1") args.push_back(flag);
      continue;
    }
    args.push_back(flag);
    for (const auto& v : item.inputs) args.push_back(v);
  }
  return args;
}

Json resolved_config(const CLI::App* sub) {
  Json cfg = Json::object();
  for (const CLI::Option* opt : sub->get_options()) {
    const std::string name = opt->get_single_name();
    if (name == "help" || name == "config") continue;
    if (opt->get_expected_min() == 0) {
      cfg[name] = opt->count() > 0;
    } else if (opt->count() > 0) {
      cfg[name] = opt->as<std::string>();
    } else {
      const std::string d = opt->get_default_str();
      cfg[name] = d.empty() ? Json(nullptr) : Json(d);
    }
  }
  return cfg;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const auto started = std::chrono::steady_clock::now();
  CLI::App app{"reclab: return-time statistics laboratory", "reclab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", RECLAB_VERSION);

  Common common;
  PoissonCheck pc;
  PeriodScan ps;
  Entropy en;
  SteinBoundCmd sb;
  ApproxGap ag;
  ClusterCount cc;
  Mixing mx;

  auto* c_pc = app.add_subcommand("poisson-check", "Empirical and exact hit-count laws against Poisson(t)");
  add_common(c_pc, common);
  c_pc->add_option("--system", pc.system, "System preset")->capture_default_str();
  c_pc->add_option("--matrix", pc.matrix, "Transition matrix for --system markov, rows split by ';'");
  add_cylinder_options(c_pc, pc.cyl, "8");
  c_pc->add_option("--t", pc.t, "Kac scaling parameter t = m mu(A)")->capture_default_str();
  c_pc->add_option("--trials", pc.trials, "Monte Carlo trials")->capture_default_str();
  c_pc->add_option("--cap", pc.cap, "Count cap K (default max(32, ceil(8t)))");
  c_pc->add_option("--eps", pc.eps, "Bowen-ball radius for map systems")->capture_default_str();
  c_pc->add_option("--center", pc.center, "Fixed ball center; omitted: fresh center per trial");
  c_pc->add_option("--measure-samples", pc.measure_samples, "Monte Carlo samples for ball measures")
      ->capture_default_str();
  c_pc->add_flag("--no-exact", pc.no_exact, "Skip the transfer-DP oracle");
  c_pc->add_flag("--chen-stein", pc.chen_stein, "Attach the Chen-Stein bound to cylinder targets");

  auto* c_ps = app.add_subcommand("period-scan", "Exact periods of Bowen balls over random centers");
  add_common(c_ps, common);
  c_ps->add_option("--system", ps.system, "System preset")->capture_default_str();
  c_ps->add_option("--eps", ps.eps, "Ball radius")->capture_default_str();
  c_ps->add_option("--n", ps.n_grid, "Ball-length grid")->capture_default_str();
  c_ps->add_option("--centers", ps.centers, "Number of random centers")->capture_default_str();
  c_ps->add_option("--method", ps.method, "exact or sampled")
      ->check(CLI::IsMember({"exact", "sampled"}))
      ->capture_default_str();
  c_ps->add_option("--samples", ps.samples, "Sample count for --method sampled")->capture_default_str();

  auto* c_en = app.add_subcommand("entropy", "Brin-Katok and recurrence entropy estimators");
  add_common(c_en, common);
  c_en->add_option("--system", en.system, "System preset")->capture_default_str();
  c_en->add_option("--eps", en.eps, "Ball radius")->capture_default_str();
  c_en->add_option("--n", en.n_grid, "Ball-length grid")->capture_default_str();
  c_en->add_option("--centers", en.centers, "Number of random centers")->capture_default_str();
  c_en->add_option("--center", en.center, "Single fixed center");
  c_en->add_option("--cap", en.cap, "Recurrence-time cap")->capture_default_str();
  c_en->add_option("--method", en.method, "Ball measure backend: exact or mc")
      ->check(CLI::IsMember({"exact", "mc"}))
      ->capture_default_str();
  c_en->add_option("--samples", en.samples, "Monte Carlo samples per ball")->capture_default_str();

  auto* c_sb = app.add_subcommand("stein-bound", "Chen-Stein bound against the exact total-variation distance");
  add_common(c_sb, common);
  c_sb->add_option("--system", sb.system, "System preset")->capture_default_str();
  c_sb->add_option("--matrix", sb.matrix, "Transition matrix for --system markov");
  add_cylinder_options(c_sb, sb.cyl, "4,8,12");
  c_sb->add_option("--t", sb.t, "Kac scaling parameter")->capture_default_str();
  c_sb->add_option("--cap", sb.cap, "Count cap K");
  c_sb->add_option("--solution-set", sb.solution_set,
                   "Also tabulate the Stein solution for this set E (grid syntax, or none)");

  auto* c_ag = app.add_subcommand("approx-gap", "Dyadic cylinder approximation of a doubling-map Bowen ball");
  add_common(c_ag, common);
  c_ag->add_option("--eps", ag.eps, "Ball radius")->capture_default_str();
  c_ag->add_option("--n", ag.n, "Ball length")->capture_default_str();
  c_ag->add_option("--center", ag.center, "Ball center; omitted: drawn from the seed");
  c_ag->add_option("--N", ag.depth_grid, "Approximation-depth grid")->capture_default_str();
  c_ag->add_option("--t", ag.t, "t in the 2t theta bound")->capture_default_str();

  auto* c_cc = app.add_subcommand("cluster-count", "Cylinders meeting a Bowen ball and Hamming-cluster sizes");
  add_common(c_cc, common);
  c_cc->add_option("--eps", cc.eps, "Ball radius")->capture_default_str();
  c_cc->add_option("--n", cc.n_grid, "Length grid")->capture_default_str();
  c_cc->add_option("--center", cc.center, "Ball center; omitted: drawn from the seed");
  c_cc->add_option("--delta", cc.delta, "Exponent in the exp(delta n) envelope")->capture_default_str();
  c_cc->add_option("--beta", cc.beta, "Hamming radius")->capture_default_str();
  c_cc->add_option("--max-cluster", cc.max_cluster, "Cluster enumeration budget")->capture_default_str();

  auto* c_mx = app.add_subcommand("mixing", "Exact or bracketed alpha and phi mixing coefficients");
  add_common(c_mx, common);
  c_mx->add_option("--system", mx.system, "System preset")->capture_default_str();
  c_mx->add_option("--matrix", mx.matrix, "Transition matrix for --system markov")->capture_default_str();
  c_mx->add_option("--n", mx.n, "Length of the past cylinders")->capture_default_str();
  c_mx->add_option("--L", mx.L, "Length of the future cylinders")->capture_default_str();
  c_mx->add_option("--k", mx.k_grid, "Gap grid")->capture_default_str();
  c_mx->add_option("--kind", mx.kind, "alpha, phi or both")
      ->check(CLI::IsMember({"alpha", "phi", "both"}))
      ->capture_default_str();
  c_mx->add_option("--exact-cells", mx.exact_cells, "Largest cell count for exact subset enumeration")
      ->capture_default_str();

  try {
    std::vector<std::string> argv = args;
    // Config entries are appended behind the command line, which then wins.
    if (!argv.empty()) {
      if (auto* sub = app.get_subcommand_no_throw(argv.front())) {
        for (std::size_t i = 1; i < argv.size(); ++i) {
          std::string path;
          if (argv[i] == "--config" && i + 1 < argv.size()) path = argv[i + 1];
          if (argv[i].starts_with("--config=")) path = argv[i].substr(9);
          if (!path.empty()) {
            argv = apply_config(sub, argv, path);
            break;
          }
        }
      }
    }
    std::vector<std::string> reversed(argv.rbegin(), argv.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << RECLAB_VERSION << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();
  try {
    const std::uint64_t seed = resolve_seed(common);
    const unsigned workers = common.workers;
    Outputs o;
    if (command == "poisson-check") {
      o = run_poisson_check(pc, seed, workers);
    } else if (command == "period-scan") {
      o = run_period_scan(ps, seed, workers);
    } else if (command == "entropy") {
      o = run_entropy(en, seed, workers);
    } else if (command == "stein-bound") {
      o = run_stein_bound(sb);
    } else if (command == "approx-gap") {
      o = run_approx_gap(ag, seed);
    } else if (command == "cluster-count") {
      o = run_cluster_count(cc, seed);
    } else {
      o = run_mixing(mx);
    }
    o.json["seed"] = seed;

    const fs::path dir(common.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ValidationError("cannot create output directory " + dir.string() + ": " + ec.message());
    std::vector<std::string> written;
    auto emit = [&](const std::string& name, const std::string& text) {
      write_text_file(dir / name, text);
      written.push_back((dir / name).string());
    };
    emit(command + ".csv", o.csv);
    emit(command + ".json", dump(o.json));
    for (const auto& [name, text] : o.extra) emit(name, text);

    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    Json manifest = header(command);
    manifest["argv"] = args;
    manifest["config"] = resolved_config(sub);
    manifest["seed"] = seed;
    manifest["workers"] = workers;
    manifest["outputs"] = written;
    manifest["version"] = RECLAB_VERSION;
    manifest["wall_clock_seconds"] = seconds;
    emit(command + ".manifest.json", dump(manifest));
    out << "wrote " << written.size() << " files to " << dir.string() << "\n";
    return 0;
  } catch (const BudgetExceeded& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace reclab::cli
