#include "reclab/count_distribution.hpp"

#include <cmath>
#include <string>

namespace reclab {

CountDistribution to_double(const ExactCountDistribution& d) {
  CountDistribution out(d.cap());
  for (std::size_t i = 0; i < d.cell_count(); ++i) out[i] = d[i].convert_to<double>();
  return out;
}

CountDistribution point_mass(std::size_t k, std::size_t cap) {
  CountDistribution d(cap);
  d.add(k, 1.0);
  return d;
}

void check_normalized(const CountDistribution& d, double tol) {
  for (double v : d.cells()) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("distribution has a negative or non-finite cell");
  }
  const double total = d.total();
  if (std::fabs(total - 1.0) > tol) {
    throw ValidationError("distribution is not normalized (total " + std::to_string(total) + ")");
  }
}

}  // namespace reclab
