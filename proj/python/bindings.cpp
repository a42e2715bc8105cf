#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "cli.hpp"
#include "reclab/bowen.hpp"
#include "reclab/errors.hpp"
#include "reclab/harness.hpp"
#include "reclab/io.hpp"
#include "reclab/stein.hpp"
#include "reclab/symbolic.hpp"

namespace py = pybind11;
using namespace reclab;

namespace {

CylinderSet to_cylinders(const std::vector<std::string>& words) { return CylinderSet::parse(words); }

std::vector<std::string> from_cylinders(const CylinderSet& c) {
  std::vector<std::string> out;
  for (const Word& w : c.words()) out.push_back(format_word(w));
  return out;
}

CountDistribution from_cells(const std::vector<double>& cells) {
  if (cells.size() < 2) throw ValidationError("a count law needs at least two cells (k = 0 and overflow)");
  CountDistribution d(cells.size() - 2);
  for (std::size_t k = 0; k < cells.size(); ++k) d[k] = cells[k];
  return d;
}

py::dict law_dict(const CountDistribution& d) {
  std::vector<double> p;
  for (std::size_t k = 0; k <= d.cap(); ++k) p.push_back(d[k]);
  py::dict out;
  out["p"] = p;
  out["overflow"] = d.overflow();
  return out;
}

MeasureMethod measure_method(const std::string& method, std::uint64_t samples, std::uint64_t seed, unsigned workers) {
  if (method == "exact") return ExactDoubling{};
  if (method == "mc") return MonteCarlo{samples, seed, workers};
  throw ValidationError("measure method must be \"exact\" or \"mc\"");
}

MixingKind mixing_kind(const std::string& kind) {
  if (kind == "alpha") return MixingKind::alpha;
  if (kind == "phi") return MixingKind::phi;
  throw ValidationError("mixing kind must be \"alpha\" or \"phi\"");
}

SystemSpec as_system(const py::object& o) {
  if (py::isinstance<MetricSystem>(o)) return o.cast<MetricSystem>();
  if (py::isinstance<MarkovShift>(o)) return o.cast<MarkovShift>();
  if (py::isinstance<py::str>(o)) return make_system(o.cast<std::string>());
  throw ValidationError("system must be a MetricSystem, a MarkovShift or a system name");
}

std::string experiment(const py::object& system_obj, std::optional<std::vector<std::string>> words, double eps, int n,
                       std::optional<double> center, double t, std::uint64_t trials, std::uint64_t seed,
                       std::optional<std::size_t> cap, unsigned workers, bool exact_oracle, bool chen_stein,
                       std::uint64_t measure_samples) {
  ExperimentConfig cfg;
  cfg.system = as_system(system_obj);
  if (words) {
    cfg.target = CylinderTarget{to_cylinders(*words)};
  } else {
    cfg.target = BallTarget{eps, n, center};
  }
  cfg.t = t;
  cfg.trials = trials;
  cfg.seed = seed;
  cfg.cap = cap;
  if (cap) cfg.oracle_options.cap = *cap;
  cfg.workers = workers;
  cfg.exact_oracle = exact_oracle;
  cfg.chen_stein = chen_stein;
  cfg.measure_samples = measure_samples;
  ExperimentReport r;
  {
    py::gil_scoped_release release;
    r = run_experiment(cfg);
  }
  return report_to_json(r).dump();
}

py::tuple cli_main(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  int code;
  {
    py::gil_scoped_release release;
    code = cli::dispatch(args, out, err);
  }
  return py::make_tuple(code, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_reclab, m) {
  m.doc() = "Hitting-time statistics for symbolic and interval systems";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<BudgetExceeded>(m, "BudgetExceeded", PyExc_RuntimeError);

  // systems
  py::class_<MetricSystem>(m, "MetricSystem")
      .def(py::init([](const std::string& name) { return MetricSystem(parse_map_kind(name)); }), py::arg("name"))
      .def_property_readonly("name", [](const MetricSystem& s) { return std::string(s.name()); })
      .def("map", &MetricSystem::map, py::arg("x"))
      .def("distance", &MetricSystem::distance, py::arg("x"), py::arg("y"))
      .def("in_domain", &MetricSystem::in_domain, py::arg("x"))
      .def("orbit", [](const MetricSystem& s, double x, std::size_t n) { return orbit(s, x, n); }, py::arg("x"),
           py::arg("n"))
      .def("__repr__", [](const MetricSystem& s) { return "MetricSystem('" + std::string(s.name()) + "')"; });

  py::class_<MarkovShift>(m, "MarkovShift")
      .def_static("from_matrix", &MarkovShift::from_matrix, py::arg("P"))
      .def_static(
          "from_rational",
          [](const std::vector<std::vector<std::string>>& rows) {
            RationalMatrix R;
            for (const auto& row : rows) {
              R.emplace_back();
              for (const auto& cell : row) R.back().push_back(parse_rational(cell));
            }
            return MarkovShift::from_rational(R);
          },
          py::arg("P"))
      .def_static("full_shift", &MarkovShift::full_shift, py::arg("s"))
      .def_static("golden_mean", &MarkovShift::golden_mean)
      .def_property_readonly("alphabet_size", &MarkovShift::alphabet_size)
      .def_property_readonly("matrix", &MarkovShift::matrix)
      .def_property_readonly("stationary", &MarkovShift::stationary)
      .def_property_readonly("primitivity_index", &MarkovShift::primitivity_index)
      .def("is_admissible", [](const MarkovShift& s, const std::string& w) { return s.is_admissible(parse_word(w)); })
      .def("sample", [](const MarkovShift& s, std::uint64_t seed, std::size_t length) {
        return format_word(sample_stationary(s, seed, length));
      }, py::arg("seed"), py::arg("length"));

  m.def("make_system", &make_system, py::arg("name"), py::arg("matrix") = "",
        "System by CLI name: doubling, tent, gauss, fair-coin, golden-mean, full-shift-<s> or markov.");

  // symbolic
  m.def("cylinder_measure", [](const MarkovShift& s, const std::vector<std::string>& w) {
    return cylinder_measure(s, to_cylinders(w));
  }, py::arg("shift"), py::arg("words"));
  m.def("cylinder_measure_exact", [](const MarkovShift& s, const std::vector<std::string>& w) {
    return to_string(cylinder_measure_exact(s, to_cylinders(w)));
  }, py::arg("shift"), py::arg("words"));
  m.def("period", [](const MarkovShift& s, const std::vector<std::string>& w) { return period(s, to_cylinders(w)); },
        py::arg("shift"), py::arg("words"));
  m.def("hamming_cluster", [](const MarkovShift& s, const std::string& center, double beta, std::size_t max_size) {
    return from_cylinders(hamming_cluster(s, parse_word(center), beta, max_size));
  }, py::arg("shift"), py::arg("center"), py::arg("beta"), py::arg("max_size") = std::size_t{1} << 20);
  m.def("lambda_bound", &lambda_bound, py::arg("n"), py::arg("s"), py::arg("beta"));
  m.def("exact_hit_distribution",
        [](const MarkovShift& s, const std::vector<std::string>& w, std::size_t steps, std::size_t cap, double budget) {
          CountDistribution d;
          {
            py::gil_scoped_release release;
            d = exact_hit_distribution(s, to_cylinders(w), steps, HitDistributionOptions{cap, budget});
          }
          return law_dict(d);
        },
        py::arg("shift"), py::arg("words"), py::arg("m"), py::arg("cap") = 32, py::arg("budget") = 4.0e9);
  m.def("short_return_curve", [](const MarkovShift& s, const std::vector<std::string>& w, std::size_t max_delta) {
    return short_return_curve(s, to_cylinders(w), max_delta);
  }, py::arg("shift"), py::arg("words"), py::arg("max_delta"));
  m.def("mixing_coefficient",
        [](const MarkovShift& s, int n, int L, int k, const std::string& kind, std::size_t exact_cells) {
          const auto b = mixing_coefficient(s, n, L, k, mixing_kind(kind), exact_cells);
          py::dict out;
          out["lower"] = b.lower;
          out["upper"] = b.upper;
          out["exact"] = b.exact;
          return out;
        },
        py::arg("shift"), py::arg("n"), py::arg("L"), py::arg("k"), py::arg("kind") = "alpha",
        py::arg("exact_cells") = 12);

  // bowen
  py::class_<BowenBall>(m, "BowenBall")
      .def(py::init([](const MetricSystem& s, double x, double eps, int n) { return BowenBall(s, x, eps, n); }),
           py::arg("system"), py::arg("center"), py::arg("eps"), py::arg("n"))
      .def_property_readonly("center", &BowenBall::center_value)
      .def_property_readonly("eps", &BowenBall::eps)
      .def_property_readonly("n", &BowenBall::length)
      .def_property_readonly("center_orbit", &BowenBall::center_orbit)
      .def("__contains__", [](const BowenBall& b, double y) { return contains(b, y); })
      .def("contains", [](const BowenBall& b, double y) { return contains(b, y); }, py::arg("y"));

  m.def("ball_measure",
        [](const BowenBall& b, const std::string& method, std::uint64_t samples, std::uint64_t seed, unsigned workers) {
          MeasureEstimate e;
          {
            py::gil_scoped_release release;
            e = ball_measure(b, measure_method(method, samples, seed, workers));
          }
          py::dict out;
          out["estimate"] = e.estimate;
          out["standard_error"] = e.standard_error;
          out["exact"] = e.exact ? py::object(py::str(to_string(*e.exact))) : py::none();
          out["hits"] = e.hits;
          out["samples"] = e.samples;
          return out;
        },
        py::arg("ball"), py::arg("method") = "exact", py::arg("samples") = 1'000'000, py::arg("seed") = 0,
        py::arg("workers") = 1);
  m.def("ball_period",
        [](const BowenBall& b, const std::string& method, std::uint64_t samples, std::uint64_t seed) {
          PeriodMethod pm;
          if (method == "exact") {
            pm = ExactDoubling{};
          } else if (method == "sampled") {
            pm = SampledPeriod{samples, seed, 0};
          } else {
            throw ValidationError("period method must be \"exact\" or \"sampled\"");
          }
          const auto p = ball_period(b, pm);
          py::dict out;
          out["lower"] = p.lower;
          out["upper"] = p.upper ? py::object(py::int_(*p.upper)) : py::none();
          out["certified"] = p.certified;
          return out;
        },
        py::arg("ball"), py::arg("method") = "exact", py::arg("samples") = 4096, py::arg("seed") = 0);
  m.def("recurrence_time", [](const MetricSystem& s, double x, double eps, int n, std::uint64_t cap) {
    return recurrence_time(s, x, eps, n, cap);
  }, py::arg("system"), py::arg("x"), py::arg("eps"), py::arg("n"), py::arg("cap"));
  m.def("entropy_estimates",
        [](const MetricSystem& s, double x, double eps, int n, const std::string& method, std::uint64_t cap,
           std::uint64_t samples, std::uint64_t seed) {
          const auto e = entropy_estimates(s, x, eps, n, measure_method(method, samples, seed, 1), cap);
          py::dict out;
          out["brin_katok"] = e.brin_katok;
          out["varandas"] = e.varandas;
          out["recurrence"] = e.recurrence;
          out["measure"] = e.measure;
          return out;
        },
        py::arg("system"), py::arg("x"), py::arg("eps"), py::arg("n"), py::arg("method") = "exact",
        py::arg("cap") = 1'000'000, py::arg("samples") = 1'000'000, py::arg("seed") = 0);
  m.def("cylinder_approximation", [](const BowenBall& b, int depth, double t) {
    const auto a = cylinder_approximation(b, depth);
    py::dict out;
    out["n"] = a.n;
    out["N"] = a.depth;
    out["mu_ball"] = to_string(a.mu_ball);
    out["mu_inner"] = to_string(a.mu_inner);
    out["mu_boundary"] = to_string(a.mu_boundary);
    out["theta_hat"] = a.theta_hat();
    out["bound"] = a.gap_bound(t);
    return out;
  }, py::arg("ball"), py::arg("depth"), py::arg("t") = 1.0);

  // stein
  m.def("poisson_pmf", &poisson_pmf, py::arg("t"), py::arg("k"));
  m.def("poisson_law", [](double t, std::size_t cap) { return law_dict(poisson_law(t, cap)); }, py::arg("t"),
        py::arg("cap"));
  m.def("stein_solve", [](double t, const std::vector<std::size_t>& E, std::size_t cap) {
    const auto s = stein_solve(t, E, cap);
    py::dict out;
    out["t"] = s.t;
    out["nu"] = s.nu;
    out["f"] = s.f;
    out["max_residual"] = s.max_residual();
    return out;
  }, py::arg("t"), py::arg("E"), py::arg("cap"));
  m.def("tv_distance", [](const std::vector<double>& p, const std::vector<double>& q) {
    return tv_distance(from_cells(p), from_cells(q));
  }, py::arg("p"), py::arg("q"), "Total variation between two laws given as cells 0..K followed by overflow.");
  m.def("chen_stein_bound",
        [](double mu, std::uint64_t tau, const std::function<double(std::uint64_t)>& alpha,
           const std::function<double(std::uint64_t)>& short_return, std::uint64_t steps) {
          return chen_stein_to_json(chen_stein_bound(mu, tau, alpha, short_return, steps)).dump();
        },
        py::arg("mu"), py::arg("tau"), py::arg("alpha"), py::arg("short_return"), py::arg("m"));

  // harness
  m.def("run_experiment", &experiment, py::arg("system"), py::arg("words") = py::none(), py::arg("eps") = 0.1,
        py::arg("n") = 8, py::arg("center") = py::none(), py::arg("t") = 1.0, py::arg("trials") = 10'000,
        py::arg("seed") = 0, py::arg("cap") = py::none(), py::arg("workers") = 1, py::arg("exact_oracle") = true,
        py::arg("chen_stein") = false, py::arg("measure_samples") = 1'000'000);
  m.def("kac_length", &kac_length, py::arg("t"), py::arg("mu"));
  m.def("default_cap", &default_cap, py::arg("t"));

  m.def("cli_main", &cli_main, py::arg("args"));
}
