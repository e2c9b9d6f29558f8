#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "rangelab/lattice.hpp"

namespace rangelab {

struct GreenBudget {
  std::size_t max_bytes = std::size_t(3) << 30;
};

/// Truncated Green function G_T(z) = sum_{k<=T} P_0(S_k = z), stored on the
/// octant |z_j| (the kernel is invariant under coordinate sign flips and
/// permutations). Also keeps p_T and p_{T-1} near the origin for tail completion.
class GreenTable {
 public:
  GreenTable() = default;

  static GreenTable build(int dim, int horizon, int layer_radius = -1, const GreenBudget& budget = {});
  /// Process-wide and on-disk (RANGELAB_CACHE_DIR) cached build.
  static std::shared_ptr<const GreenTable> cached(int dim, int horizon, int layer_radius = -1);

  int dim() const noexcept { return dim_; }
  int horizon() const noexcept { return horizon_; }
  int layer_radius() const noexcept { return layer_radius_; }

  double operator()(const LatticePoint& z) const;
  /// abs: non-negative coordinates. Zero outside the l1 ball of radius T.
  double at_abs(const std::int64_t* abs) const noexcept {
    std::int64_t s = 0;
    std::size_t idx = 0;
    for (int j = 0; j < dim_; ++j) {
      s += abs[j];
      idx += static_cast<std::size_t>(abs[j]) * stride_[j];
    }
    return s > horizon_ ? 0.0 : values_[idx];
  }
  /// p_{T-back}(z) for back in {0, 1}; z must satisfy |z|_inf <= layer_radius.
  double last_layer(int back, const LatticePoint& z) const;
  /// sum over Z^d of G_T(z); equals T + 1 up to rounding.
  double total_mass() const;
  std::uint64_t checksum() const;
  std::size_t memory_bytes() const noexcept;

  void save(const std::string& file) const;
  static GreenTable load(const std::string& file);

  const std::vector<double>& octant_values() const noexcept { return values_; }

 private:
  void init_shape(int dim, int horizon, int layer_radius);
  std::size_t layer_index(const LatticePoint& z) const;

  int dim_ = 0;
  int horizon_ = 0;
  int layer_radius_ = 0;
  std::size_t stride_[kMaxDim] = {};
  std::size_t layer_stride_[kMaxDim] = {};
  std::vector<double> values_;
  std::vector<double> layers_[2];
};

/// First-visit probabilities h_T(z) = P_0(z in {S_1, ..., S_T}).
class HittingTable {
 public:
  static HittingTable build(int dim, int horizon, const GreenBudget& budget = {});
  int dim() const noexcept { return dim_; }
  int horizon() const noexcept { return horizon_; }
  double operator()(const LatticePoint& z) const;
  double at_abs(const std::int64_t* abs) const noexcept {
    std::int64_t s = 0;
    std::size_t idx = 0;
    for (int j = 0; j < dim_; ++j) {
      s += abs[j];
      idx += static_cast<std::size_t>(abs[j]) * stride_[j];
    }
    return s > horizon_ ? 0.0 : values_[idx];
  }

 private:
  int dim_ = 0;
  int horizon_ = 0;
  std::size_t stride_[kMaxDim] = {};
  std::vector<double> values_;
};

/// Local CLT density 2 (d/(2 pi k))^{d/2} exp(-d |z|^2 / (2k)) on the right parity class.
double lclt_density(int dim, std::int64_t k, std::int64_t norm2);

/// sum_{k > T} P_0(S_k = z), from the local CLT with a 1/k correction matched
/// to the exact last layer. Requires |z|_inf <= table.layer_radius().
double green_tail(const GreenTable& table, const LatticePoint& z);

/// Exact G(z) from the continuous-time representation
/// G(z) = int_0^inf prod_j e^{-t/d} I_{|z_j|}(t/d) dt (same Green function as the
/// discrete walk, since holding times have mean 1).
double green_bessel(const LatticePoint& z);

struct GreenAsymptote {
  int dim = 0;
  double crossover_radius = 0.0;
  double constant = 0.0;  // G(z) ~ constant * |z|^{2-d}
  double shell = 0.0;     // isotropic |z|^{-2} correction
  double cubic = 0.0;     // anisotropic correction, coefficient of (sum z_j^4 / |z|^4) |z|^{-2}
  double mismatch = 0.0;  // max relative gap to the inner values on the last shell

  double operator()(const std::int64_t* abs) const noexcept;
};

/// Fits the far-field expansion on the annulus R/2 <= |z| <= R. `inner` maps a
/// non-negative coordinate vector to G.
GreenAsymptote fit_green_asymptote(int dim, double crossover_radius,
                                   const std::function<double(const LatticePoint&)>& inner);
/// Same, with inner values G_T + green_tail from the table.
GreenAsymptote fit_green_asymptote(const GreenTable& table, double crossover_radius);

/// G(z) = G_T(z) + tail for |z| <= R*, fitted expansion beyond.
double green_infinite(const LatticePoint& z, const GreenTable& table, const GreenAsymptote& asym);

enum class InnerCompletion { kLcltTail, kBesselIntegral };

/// Full Green function G = G_infinity with precomputed inner values.
class GreenFunction {
 public:
  /// Inner values G_T + green_tail from the table, crossover radius defaults to the layer radius.
  explicit GreenFunction(std::shared_ptr<const GreenTable> table, double crossover_radius = -1.0);
  /// Inner values from the Bessel integral.
  GreenFunction(int dim, double crossover_radius);

  /// Default oracle for dimension d (3 <= d <= 8): LCLT completion for d = 3,
  /// Bessel integral for d >= 4.
  static std::shared_ptr<const GreenFunction> standard(int dim);
  static int default_horizon(int dim);
  static double default_crossover(int dim);

  int dim() const noexcept { return dim_; }
  InnerCompletion method() const noexcept { return method_; }
  const GreenAsymptote& asymptote() const noexcept { return asym_; }
  double crossover_radius() const noexcept { return asym_.crossover_radius; }
  /// Error model for operator(): a fixed bound on the inner values, and the
  /// fitted mismatch at R* decaying like |z|^{-2} beyond it.
  double relative_error(const LatticePoint& z) const noexcept;

  double operator()(const LatticePoint& z) const noexcept {
    std::int64_t abs[kMaxDim];
    std::int64_t r2 = 0;
    std::size_t idx = 0;
    bool inner = true;
    for (int j = 0; j < dim_; ++j) {
      abs[j] = z[j] < 0 ? -z[j] : z[j];
      r2 += abs[j] * abs[j];
      if (abs[j] > inner_radius_) inner = false;
      else idx += static_cast<std::size_t>(abs[j]) * inner_stride_[j];
    }
    if (inner && r2 <= inner_r2_) return inner_[idx];
    return asym_(abs);
  }

 private:
  void fill_inner(const std::function<double(const LatticePoint&)>& inner);

  int dim_ = 0;
  InnerCompletion method_ = InnerCompletion::kLcltTail;
  GreenAsymptote asym_;
  double inner_error_ = 0.0;
  std::int64_t inner_radius_ = 0;
  std::int64_t inner_r2_ = 0;
  std::size_t inner_stride_[kMaxDim] = {};
  std::vector<double> inner_;
};

}  // namespace rangelab
