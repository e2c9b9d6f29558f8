#include "rangelab/corrector.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

#include "neighbour_cells.hpp"
#include "rangelab/errors.hpp"
#include "rangelab/parallel.hpp"

namespace rangelab {

std::vector<double> corrector_terms(const RangeIndex& index, const GreenTable& table) {
  require(table.dim() == index.dim(), "corrector: table dimension differs from the path");
  require(table.horizon() >= 1, "corrector: horizon must be at least 1");
  const double inv_t = 1.0 / table.horizon();
  std::vector<double> terms(static_cast<std::size_t>(index.steps() + 1), 0.0);
  detail::scan_range_neighbours(index, table.horizon(), [&](std::int64_t k, const LatticePoint&, auto&& visit) {
    double s = 0.0;
    visit([&](std::int32_t, const std::int64_t* abs) { s += table.at_abs(abs); });
    terms[static_cast<std::size_t>(k)] = s * inv_t;
  });
  return terms;
}

double corrector(const RangeIndex& index, const GreenTable& table) {
  const auto terms = corrector_terms(index, table);
  return tree_sum(terms);
}

DensityGreenBound check_density_green_bound(const OccupancyIndex& occ, const std::vector<std::int64_t>& K,
                                            std::int64_t r, double rho, const GreenTable& table,
                                            const LatticePoint& z) {
  const RangeIndex& index = occ.range();
  require(r >= 1 && rho > 0.0, "check_density_green_bound: need r >= 1 and rho > 0");
  require(z.dim() == index.dim() && table.dim() == index.dim(), "check_density_green_bound: dimension mismatch");
  const double cap = rho * std::pow(static_cast<double>(r), index.dim());
  const Cube q{z, static_cast<double>(r)};
  DensityGreenBound out;
  std::int64_t abs[kMaxDim];
  for (const std::int64_t k : K) {
    require(k >= 0 && k <= index.steps(), "check_density_green_bound: index " + std::to_string(k) + " out of range");
    const auto time = occ.cube_time(index.site_at(k), static_cast<double>(r));
    if (static_cast<double>(time) > cap)
      throw ContractError("check_density_green_bound: k = " + std::to_string(k) + " has local time " +
                          std::to_string(time) + " > rho r^d = " + std::to_string(cap));
    const auto& y = index.position(k);
    if (cube_contains(q, y)) continue;
    for (int j = 0; j < index.dim(); ++j) abs[j] = std::llabs(y[j] - z[j]);
    out.lhs += table.at_abs(abs);
  }
  out.bound_ratio = out.lhs / (rho * table.horizon());
  return out;
}

}  // namespace rangelab
