#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "reclab/bowen.hpp"
#include "reclab/count_distribution.hpp"
#include "reclab/harness.hpp"
#include "reclab/stein.hpp"
#include "reclab/symbolic.hpp"

namespace reclab {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

// Shortest decimal that round-trips to the same double.
std::string format_double(double x);

// One word per line; blank lines and lines starting with '#' are skipped.
CylinderSet parse_cylinder_text(std::string_view text);
std::string format_cylinder_text(const CylinderSet& cyl);
CylinderSet read_cylinder_file(const std::filesystem::path& path);

// Comma-separated table with a header row, LF line endings.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
  void add_row(std::vector<std::string> row);
  std::string str() const;
  std::size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

// Rows (k, probability); the overflow cell is labelled ">K".
std::string distribution_csv(const CountDistribution& d);
// Rows (k, f).
std::string stein_csv(const SteinSolution& s);
// Header n,N,mu_ball,mu_inner,mu_boundary,theta_hat,lemma13_bound.
CsvTable approximation_table();
void add_approximation_row(CsvTable& table, const CylinderApproximation& a, double t);

// Structured system descriptors {kind, params, matrix, seed}. Kinds: doubling,
// tent, gauss, markov. Markov matrices are rows of exact rationals written as
// strings ("7/10") or plain numbers.
Json system_to_json(const SystemSpec& system);
SystemSpec system_from_json(const Json& j);

// Named presets: doubling, tent, gauss, fair-coin, golden-mean, full-shift-<s>,
// markov (needs `matrix` in the form "0.7,0.3;0.6,0.4").
SystemSpec make_system(std::string_view name, std::string_view matrix = {});
RationalMatrix parse_matrix(std::string_view text);

Json distribution_to_json(const CountDistribution& d);
Json chen_stein_to_json(const ChenSteinBound& b);
Json report_to_json(const ExperimentReport& r);

void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace reclab
