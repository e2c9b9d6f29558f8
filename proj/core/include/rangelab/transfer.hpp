#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "rangelab/green.hpp"
#include "rangelab/range_index.hpp"
#include "rangelab/rng.hpp"

namespace rangelab {

inline constexpr double kKappaStar = 1.718281828459045235;  // e - 1
inline constexpr double kTransferC = 1.0 / (2.0 * kKappaStar);

/// An adapted [0, 1]-valued sequence Z_1..Z_len together with the conditional
/// means E[Z_i | G_{i-1}].
struct AdaptedGenerator {
  std::string name;
  std::function<void(RngStream& rng, int len, double* z, double* cond_mean)> draw;
  double bernoulli_p = -1.0;  // i.i.d. Bernoulli(p) when >= 0, enabling the closed form
};

/// Constants, Bernoulli(p) over a p grid, and history-dependent sequences.
std::vector<AdaptedGenerator> default_generator_battery();

struct KernelCheck {
  std::string generator;
  std::int64_t trials = 0;
  double single_mean = 0.0;  // E exp(Z_len - kappa* E[Z_len | G_{len-1}])
  double single_se = 0.0;
  double chain_mean = 0.0;   // E exp(sum Z_i - kappa* sum E[Z_i | G_{i-1}])
  double chain_se = 0.0;
  double oracle = -1.0;      // closed form of single_mean, Bernoulli only
  double oracle_z = 0.0;     // (single_mean - oracle) / single_se
  double split_lhs = 0.0;    // P((1/T) sum_j S_j > zeta)
  double split_rhs = 0.0;    // e^{-zeta/2} + P((1/T) sum_j S~_j > zeta/2)
  double split_se = 0.0;
  bool ok = false;
};

struct TransferAudit {
  std::int64_t trials = 0;
  std::vector<KernelCheck> rows;
  double max_single = 0.0;
  double max_chain = 0.0;
  std::vector<std::string> counterexamples;
  bool passed() const { return counterexamples.empty(); }
};

struct KernelCheckOptions {
  std::int64_t trials = 100000;
  int length = 8;           // sequence length for the chained form
  int split_blocks = 4;     // T for the split form
  double split_zeta = 2.0;
};

/// Throws ContractError when a generator emits a value outside [0, 1].
TransferAudit transfer_kernel_checks(const std::vector<AdaptedGenerator>& generators, const KernelCheckOptions& opt,
                                     std::uint64_t seed, std::uint64_t first_stream);

struct TransferRow {
  std::string process;
  double zeta = 0.0;
  double lhs = 0.0;  // P((1/T) sum_{i=T}^n X_i > zeta)
  double rhs = 0.0;  // P((1/T) sum_{i=T}^n E[X_i | F_{i-T}] > c zeta) + exp(-c zeta)
  double se = 0.0;   // joint standard error, zero for exact rows
  bool ok = false;
};

struct TransferInequalityReport {
  std::int64_t T = 0;
  std::int64_t n = 0;
  std::vector<TransferRow> rows;
  bool passed() const;
};

/// Exact rows: i.i.d. Bernoulli(q) through the binomial law, and X_i = 1.
TransferInequalityReport transfer_iid_audit(std::int64_t n, std::int64_t T, const std::vector<double>& qs,
                                            const std::vector<double>& zetas);

/// Per-path sums for X_i = |R[i-T+1, i] ∩ R_{i-T}| / T, i = T..n:
/// first (1/T) sum X_i, second (1/T) sum E[X_i | F_{i-T}].
std::pair<double, double> range_process_sums(const RangeIndex& index, std::int64_t T);
std::pair<double, double> range_process_sums(const RangeIndex& index, std::int64_t T, const HittingTable& hit);

/// Monte Carlo audit of the range process over `paths` walks, one row per zeta.
/// Empty zetas selects quantiles of the observed left-hand sums.
TransferInequalityReport transfer_range_audit(int d, std::int64_t n, std::int64_t T, std::int64_t paths,
                                              std::vector<double> zetas, std::uint64_t seed,
                                              std::uint64_t first_stream);

struct DecompositionCheck {
  std::int64_t T = 0;
  std::int64_t range = 0;
  std::vector<std::int64_t> eps;  // per offset j
  bool identity_exact = true;     // both evaluations of eps agree for every j
  bool bounded = true;            // 0 <= eps <= T
};

/// |R_n| = U_j - sum_{i=2}^{floor(n/T)} |B_i ∩ R[j, j+(i-1)T]| + eps_j for every
/// j < T, with B_i = R[j+(i-1)T+1, min(j+iT, n)].
DecompositionCheck corollary_decomposition_check(const RangeIndex& index, std::int64_t T);

}  // namespace rangelab
