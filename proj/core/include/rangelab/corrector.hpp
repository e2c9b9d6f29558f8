#pragma once

#include <cstdint>
#include <vector>

#include "rangelab/green.hpp"
#include "rangelab/occupancy.hpp"
#include "rangelab/range_index.hpp"

namespace rangelab {

/// sum_{k=0}^n sum_{x in R_k} G_T(x - S_k) / T, with T the table horizon.
double corrector(const RangeIndex& index, const GreenTable& table);
/// Per-step terms A_k = sum_{x in R_k} G_T(x - S_k) / T.
std::vector<double> corrector_terms(const RangeIndex& index, const GreenTable& table);

struct DensityGreenBound {
  double lhs = 0.0;
  double bound_ratio = 0.0;  // lhs / (rho T)
};

/// sum over k in K with S_k outside Q(z, r) of G_T(S_k - z). Every k in K must
/// satisfy l_n(Q(S_k, r)) <= rho r^d.
DensityGreenBound check_density_green_bound(const OccupancyIndex& occ, const std::vector<std::int64_t>& K,
                                            std::int64_t r, double rho, const GreenTable& table,
                                            const LatticePoint& z);

}  // namespace rangelab
