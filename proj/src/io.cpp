#include "reclab/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "reclab/errors.hpp"

namespace reclab {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

CylinderSet parse_cylinder_text(std::string_view text) {
  std::vector<std::string> words;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    const auto e = line.find_last_not_of(" \t\r");
    words.push_back(line.substr(b, e - b + 1));
  }
  if (words.empty()) throw ValidationError("cylinder set file holds no words");
  return CylinderSet::parse(words);
}

std::string format_cylinder_text(const CylinderSet& cyl) {
  std::string out;
  for (const Word& w : cyl.words()) {
    out += format_word(w);
    out += '\n';
  }
  return out;
}

CylinderSet read_cylinder_file(const std::filesystem::path& path) { return parse_cylinder_text(read_text_file(path)); }

void CsvTable::add_row(std::vector<std::string> row) {
  if (row.size() != header_.size()) throw ValidationError("CSV row width does not match the header");
  rows_.push_back(std::move(row));
}

std::string CsvTable::str() const {
  std::string out;
  auto emit = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  emit(header_);
  for (const auto& r : rows_) emit(r);
  return out;
}

std::string distribution_csv(const CountDistribution& d) {
  CsvTable t({"k", "probability"});
  for (std::size_t k = 0; k <= d.cap(); ++k) t.add_row({std::to_string(k), format_double(d[k])});
  t.add_row({">" + std::to_string(d.cap()), format_double(d.overflow())});
  return t.str();
}

std::string stein_csv(const SteinSolution& s) {
  CsvTable t({"k", "f"});
  for (std::size_t k = 0; k < s.f.size(); ++k) t.add_row({std::to_string(k), format_double(s.f[k])});
  return t.str();
}

CsvTable approximation_table() {
  return CsvTable({"n", "N", "mu_ball", "mu_inner", "mu_boundary", "theta_hat", "lemma13_bound"});
}

void add_approximation_row(CsvTable& table, const CylinderApproximation& a, double t) {
  table.add_row({std::to_string(a.n), std::to_string(a.depth), format_double(to_double(a.mu_ball)),
                 format_double(to_double(a.mu_inner)), format_double(to_double(a.mu_boundary)),
                 format_double(a.theta_hat()), format_double(a.gap_bound(t))});
}

// ---------------------------------------------------------------------------
// Systems
// ---------------------------------------------------------------------------

Json system_to_json(const SystemSpec& system) {
  Json j;
  if (const auto* ms = std::get_if<MetricSystem>(&system)) {
    j["kind"] = std::string(ms->name());
    j["params"] = Json::object();
    j["matrix"] = Json::array();
    return j;
  }
  const auto& shift = std::get<MarkovShift>(system);
  j["kind"] = "markov";
  j["params"] = {{"alphabet", shift.alphabet_size()}};
  Json rows = Json::array();
  for (int a = 0; a < shift.alphabet_size(); ++a) {
    Json row = Json::array();
    for (int b = 0; b < shift.alphabet_size(); ++b) {
      if (shift.has_exact()) {
        row.push_back(to_string(shift.p_exact(static_cast<Symbol>(a), static_cast<Symbol>(b))));
      } else {
        row.push_back(shift.p(static_cast<Symbol>(a), static_cast<Symbol>(b)));
      }
    }
    rows.push_back(std::move(row));
  }
  j["matrix"] = std::move(rows);
  return j;
}

SystemSpec system_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("kind")) throw ValidationError("system descriptor needs a \"kind\" field");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind != "markov") return MetricSystem(parse_map_kind(kind));
  if (!j.contains("matrix") || !j.at("matrix").is_array()) throw ValidationError("markov system needs \"matrix\" rows");
  bool exact = true;
  RationalMatrix R;
  Matrix D;
  for (const auto& row : j.at("matrix")) {
    R.emplace_back();
    D.emplace_back();
    for (const auto& v : row) {
      if (v.is_string()) {
        R.back().push_back(parse_rational(v.get<std::string>()));
        D.back().push_back(to_double(R.back().back()));
      } else if (v.is_number()) {
        exact = exact && v.is_number_integer();
        D.back().push_back(v.get<double>());
        R.back().push_back(exact_rational(D.back().back()));
      } else {
        throw ValidationError("matrix entries must be numbers or rational strings");
      }
    }
  }
  return exact ? MarkovShift::from_rational(R) : MarkovShift::from_matrix(D);
}

RationalMatrix parse_matrix(std::string_view text) {
  RationalMatrix M;
  std::string s(text);
  std::stringstream rows(s);
  std::string row;
  while (std::getline(rows, row, ';')) {
    M.emplace_back();
    std::stringstream cells(row);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      const auto b = cell.find_first_not_of(' ');
      const auto e = cell.find_last_not_of(' ');
      if (b == std::string::npos) throw ValidationError("empty matrix entry in \"" + s + "\"");
      M.back().push_back(parse_rational(cell.substr(b, e - b + 1)));
    }
  }
  if (M.empty()) throw ValidationError("empty transition matrix");
  for (const auto& r : M) {
    if (r.size() != M.size()) throw ValidationError("transition matrix \"" + s + "\" is not square");
  }
  return M;
}

SystemSpec make_system(std::string_view name, std::string_view matrix) {
  if (name == "doubling" || name == "tent" || name == "gauss") return MetricSystem(parse_map_kind(name));
  if (name == "fair-coin") return MarkovShift::full_shift(2);
  if (name == "golden-mean") return MarkovShift::golden_mean();
  if (name.starts_with("full-shift-")) {
    const std::string_view digits = name.substr(11);
    int s = 0;
    const auto res = std::from_chars(digits.data(), digits.data() + digits.size(), s);
    if (res.ec != std::errc{} || res.ptr != digits.data() + digits.size()) {
      throw ValidationError("bad alphabet size in \"" + std::string(name) + "\"");
    }
    return MarkovShift::full_shift(s);
  }
  if (name == "markov") {
    if (matrix.empty()) throw ValidationError("--system markov needs --matrix \"p00,p01;p10,p11\"");
    return MarkovShift::from_rational(parse_matrix(matrix));
  }
  throw ValidationError("unknown system \"" + std::string(name) +
                        "\" (expected doubling, tent, gauss, fair-coin, golden-mean, full-shift-<s> or markov)");
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

Json distribution_to_json(const CountDistribution& d) {
  Json cells = Json::array();
  for (std::size_t k = 0; k <= d.cap(); ++k) cells.push_back(d[k]);
  return Json{{"cap", d.cap()}, {"p", std::move(cells)}, {"overflow", d.overflow()}};
}

Json chen_stein_to_json(const ChenSteinBound& b) {
  return Json{{"mu", b.mu},
              {"tau", b.tau},
              {"m", b.m},
              {"t", b.t},
              {"delta_star", b.delta},
              {"alpha_term", b.alpha_term},
              {"delta_term", b.delta_term},
              {"short_return_term", b.short_return_term},
              {"log_factor", b.log_factor},
              {"value", b.value},
              {"c1", nullptr}};
}

namespace {

template <class T>
Json optional_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

}  // namespace

Json report_to_json(const ExperimentReport& r) {
  Json j;
  j["n"] = r.n;
  j["t"] = r.t;
  j["m"] = r.m;
  j["mu_hat"] = r.mu_hat;
  j["mu_exact"] = r.mu_exact ? Json(to_string(*r.mu_exact)) : Json(nullptr);
  j["trials"] = r.trials;
  j["seed"] = r.seed;
  j["cap"] = r.cap;
  j["counts"] = r.counts;
  j["empirical"] = distribution_to_json(r.empirical);
  j["exact"] = r.exact ? distribution_to_json(*r.exact) : Json(nullptr);
  j["poisson"] = distribution_to_json(r.poisson);
  j["tv_emp_poisson"] = r.tv_emp_poisson;
  j["tv_exact_poisson"] = optional_json(r.tv_exact_poisson);
  j["tv_emp_exact"] = optional_json(r.tv_emp_exact);
  j["standard_error"] = r.standard_error;
  j["z"] = r.z;
  j["max_abs_z"] = r.max_abs_z;
  j["mean_w"] = r.mean_w;
  j["var_w"] = r.var_w;
  j["expected_mean"] = r.expected_mean;
  j["mean_z"] = r.mean_z;
  j["period"] = optional_json(r.period);
  j["chen_stein"] = r.chen_stein ? chen_stein_to_json(*r.chen_stein) : Json(nullptr);
  if (r.centers) {
    j["centers"] = Json{{"m_min", r.centers->m_min},
                        {"m_median", r.centers->m_median},
                        {"m_max", r.centers->m_max},
                        {"mu_mean", r.centers->mu_mean}};
  } else {
    j["centers"] = nullptr;
  }
  return j;
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw ValidationError("failed writing " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace reclab
