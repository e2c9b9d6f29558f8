#include "rangelab/green.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>

#include <Eigen/Dense>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>
#include <gsl/gsl_sf_bessel.h>

#include "json.hpp"
#include "rangelab/errors.hpp"
#include "rangelab/util.hpp"

namespace rangelab {

namespace {

std::size_t checked_box(int dim, std::int64_t side, std::size_t copies, const GreenBudget& budget, const char* what) {
  long double cells = 1;
  for (int j = 0; j < dim; ++j) cells *= static_cast<long double>(side);
  const long double bytes = cells * copies * sizeof(double);
  if (bytes > static_cast<long double>(budget.max_bytes))
    throw ResourceError(std::string(what) + ": needs " + std::to_string(static_cast<double>(bytes) / 1e6) +
                        " MB, budget is " + std::to_string(static_cast<double>(budget.max_bytes) / 1e6) + " MB");
  return static_cast<std::size_t>(cells);
}

/// Visits every octant point with l1 norm <= limit: fn(z, flat index, l1).
template <class Fn>
void for_each_simplex(int dim, std::int64_t limit, const std::size_t* stride, Fn&& fn) {
  std::int64_t z[kMaxDim] = {};
  std::int64_t sum = 0;
  std::size_t idx = 0;
  while (true) {
    fn(z, idx, sum);
    int j = 0;
    for (; j < dim; ++j) {
      if (sum < limit) {
        ++z[j];
        ++sum;
        idx += stride[j];
        break;
      }
      sum -= z[j];
      idx -= static_cast<std::size_t>(z[j]) * stride[j];
      z[j] = 0;
    }
    if (j == dim) return;
  }
}

/// One step of the folded heat equation on cells of l1 norm <= limit with the given parity.
void dp_step(int dim, std::int64_t horizon, std::int64_t limit, const std::size_t* stride, const std::vector<double>& cur,
             std::vector<double>& next) {
  const double two_d = 2.0 * dim;
  for_each_simplex(dim, limit, stride, [&](const std::int64_t* z, std::size_t idx, std::int64_t l1) {
    if (((limit - l1) & 1) != 0) return;
    double s = 0.0;
    for (int j = 0; j < dim; ++j) {
      if (z[j] < horizon) s += cur[idx + stride[j]];
      s += z[j] > 0 ? cur[idx - stride[j]] : cur[idx + stride[j]];
    }
    next[idx] = s / two_d;
  });
}

/// Number of lattice points obtained from a non-negative coordinate class by
/// sign flips and permutations.
double class_size(const std::int64_t* c, int dim) {
  double perms = std::tgamma(dim + 1.0);
  int run = 1;
  for (int j = 1; j <= dim; ++j) {
    if (j < dim && c[j] == c[j - 1]) {
      ++run;
    } else {
      perms /= std::tgamma(run + 1.0);
      run = 1;
    }
  }
  int nonzero = 0;
  for (int j = 0; j < dim; ++j) nonzero += c[j] != 0;
  return perms * std::ldexp(1.0, nonzero);
}

}  // namespace

void GreenTable::init_shape(int dim, int horizon, int layer_radius) {
  dim_ = dim;
  horizon_ = horizon;
  layer_radius_ = std::min(layer_radius, horizon);
  std::size_t s = 1, ls = 1;
  for (int j = 0; j < dim; ++j) {
    stride_[j] = s;
    layer_stride_[j] = ls;
    s *= static_cast<std::size_t>(horizon + 1);
    ls *= static_cast<std::size_t>(layer_radius_ + 1);
  }
}

GreenTable GreenTable::build(int dim, int horizon, int layer_radius, const GreenBudget& budget) {
  require(dim >= 1 && dim <= kMaxDim, "GreenTable: dimension out of range");
  require(horizon >= 1, "GreenTable: horizon must be positive");
  if (layer_radius < 0) layer_radius = static_cast<int>(std::sqrt(static_cast<double>(horizon)));
  const std::size_t cells = checked_box(dim, horizon + 1, 3, budget, "GreenTable");
  GreenTable g;
  g.init_shape(dim, horizon, layer_radius);
  g.values_.assign(cells, 0.0);
  std::vector<double> cur(cells, 0.0), next(cells, 0.0);
  cur[0] = 1.0;
  g.values_[0] = 1.0;
  for (int k = 0; k < horizon; ++k) {
    dp_step(dim, horizon, k + 1, g.stride_, cur, next);
    for_each_simplex(dim, k + 1, g.stride_, [&](const std::int64_t*, std::size_t idx, std::int64_t l1) {
      if (((k + 1 - l1) & 1) == 0) g.values_[idx] += next[idx];
    });
    cur.swap(next);
  }
  // cur holds p_T, next holds p_{T-1}
  std::size_t lcells = 1;
  for (int j = 0; j < dim; ++j) lcells *= static_cast<std::size_t>(g.layer_radius_ + 1);
  for (int b = 0; b < 2; ++b) g.layers_[b].assign(lcells, 0.0);
  for (std::size_t li = 0; li < lcells; ++li) {
    std::size_t rem = li, idx = 0;
    std::int64_t l1 = 0;
    for (int j = 0; j < dim; ++j) {
      const std::size_t zj = rem % static_cast<std::size_t>(g.layer_radius_ + 1);
      rem /= static_cast<std::size_t>(g.layer_radius_ + 1);
      idx += zj * g.stride_[j];
      l1 += static_cast<std::int64_t>(zj);
    }
    if (l1 > horizon) continue;
    if (((horizon - l1) & 1) == 0) g.layers_[0][li] = cur[idx];
    else g.layers_[1][li] = next[idx];
  }
  return g;
}

double GreenTable::operator()(const LatticePoint& z) const {
  require(z.dim() == dim_, "GreenTable: dimension mismatch");
  std::int64_t abs[kMaxDim];
  for (int j = 0; j < dim_; ++j) {
    abs[j] = std::llabs(z[j]);
    if (abs[j] > horizon_) return 0.0;
  }
  return at_abs(abs);
}

std::size_t GreenTable::layer_index(const LatticePoint& z) const {
  std::size_t idx = 0;
  for (int j = 0; j < dim_; ++j) {
    const std::int64_t a = std::llabs(z[j]);
    require(a <= layer_radius_, "GreenTable::last_layer: point outside the stored layer box");
    idx += static_cast<std::size_t>(a) * layer_stride_[j];
  }
  return idx;
}

double GreenTable::last_layer(int back, const LatticePoint& z) const {
  require(back == 0 || back == 1, "GreenTable::last_layer: back must be 0 or 1");
  return layers_[back][layer_index(z)];
}

double GreenTable::total_mass() const {
  long double total = 0;
  for_each_simplex(dim_, horizon_, stride_, [&](const std::int64_t* z, std::size_t idx, std::int64_t) {
    int nonzero = 0;
    for (int j = 0; j < dim_; ++j) nonzero += z[j] != 0;
    total += std::ldexp(static_cast<long double>(values_[idx]), nonzero);
  });
  return static_cast<double>(total);
}

std::uint64_t GreenTable::checksum() const {
  std::uint64_t h = fnv1a64(values_.data(), values_.size() * sizeof(double));
  for (const auto& l : layers_) h = fnv1a64(l.data(), l.size() * sizeof(double), h);
  return h;
}

std::size_t GreenTable::memory_bytes() const noexcept {
  return (values_.size() + layers_[0].size() + layers_[1].size()) * sizeof(double);
}

void GreenTable::save(const std::string& file) const {
  nlohmann::json header = {{"d", dim_},
                           {"T", horizon_},
                           {"layer_radius", layer_radius_},
                           {"checksum", hex64(checksum())},
                           {"format_version", 1}};
  write_framed_file(file, "RLGT", header.dump(), [&](std::ostream& os) {
    os.write(reinterpret_cast<const char*>(values_.data()), static_cast<std::streamsize>(values_.size() * sizeof(double)));
    for (const auto& l : layers_)
      os.write(reinterpret_cast<const char*>(l.data()), static_cast<std::streamsize>(l.size() * sizeof(double)));
  });
}

GreenTable GreenTable::load(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ContractError("cannot open green cache " + file);
  const nlohmann::json header = nlohmann::json::parse(read_frame_header(in, "RLGT", file));
  if (header.value("format_version", 0) != 1) throw ContractError("green cache " + file + ": unsupported format version");
  GreenTable g;
  g.init_shape(header.at("d").get<int>(), header.at("T").get<int>(), header.at("layer_radius").get<int>());
  std::size_t cells = 1, lcells = 1;
  for (int j = 0; j < g.dim_; ++j) {
    cells *= static_cast<std::size_t>(g.horizon_ + 1);
    lcells *= static_cast<std::size_t>(g.layer_radius_ + 1);
  }
  g.values_.resize(cells);
  in.read(reinterpret_cast<char*>(g.values_.data()), static_cast<std::streamsize>(cells * sizeof(double)));
  for (auto& l : g.layers_) {
    l.resize(lcells);
    in.read(reinterpret_cast<char*>(l.data()), static_cast<std::streamsize>(lcells * sizeof(double)));
  }
  if (!in) throw ContractError("green cache " + file + " is truncated");
  if (hex64(g.checksum()) != header.at("checksum").get<std::string>())
    throw ContractError("green cache " + file + " failed its checksum");
  return g;
}

std::shared_ptr<const GreenTable> GreenTable::cached(int dim, int horizon, int layer_radius) {
  static std::mutex mu;
  static std::map<std::tuple<int, int, int>, std::shared_ptr<const GreenTable>> memo;
  if (layer_radius < 0) layer_radius = static_cast<int>(std::sqrt(static_cast<double>(horizon)));
  const auto key = std::make_tuple(dim, horizon, layer_radius);
  std::lock_guard lock(mu);
  if (auto it = memo.find(key); it != memo.end()) return it->second;
  std::shared_ptr<const GreenTable> table;
  const char* dir = std::getenv("RANGELAB_CACHE_DIR");
  std::string file;
  if (dir && *dir) {
    file = std::string(dir) + "/green_d" + std::to_string(dim) + "_T" + std::to_string(horizon) + "_L" +
           std::to_string(layer_radius) + ".rlgt";
    if (std::filesystem::exists(file)) {
      try {
        table = std::make_shared<const GreenTable>(load(file));
      } catch (const ContractError&) {
        table.reset();  // stale or corrupt cache, rebuild below
      }
    }
  }
  if (!table) {
    table = std::make_shared<const GreenTable>(build(dim, horizon, layer_radius));
    if (!file.empty()) {
      std::filesystem::create_directories(std::filesystem::path(file).parent_path());
      table->save(file);
    }
  }
  memo.emplace(key, table);
  return table;
}

HittingTable HittingTable::build(int dim, int horizon, const GreenBudget& budget) {
  require(dim >= 1 && dim <= kMaxDim, "HittingTable: dimension out of range");
  require(horizon >= 1, "HittingTable: horizon must be positive");
  const std::size_t cells = checked_box(dim, horizon + 1, static_cast<std::size_t>(horizon) + 3, budget, "HittingTable");
  HittingTable h;
  h.dim_ = dim;
  h.horizon_ = horizon;
  std::size_t s = 1;
  for (int j = 0; j < dim; ++j) {
    h.stride_[j] = s;
    s *= static_cast<std::size_t>(horizon + 1);
  }
  // p[k] = law of S_k on the octant
  std::vector<std::vector<double>> p(static_cast<std::size_t>(horizon) + 1, std::vector<double>(cells, 0.0));
  p[0][0] = 1.0;
  for (int k = 0; k < horizon; ++k) dp_step(dim, horizon, k + 1, h.stride_, p[static_cast<std::size_t>(k)], p[static_cast<std::size_t>(k) + 1]);
  h.values_.assign(cells, 0.0);
  std::vector<double> f(static_cast<std::size_t>(horizon) + 1);
  for_each_simplex(dim, horizon, h.stride_, [&](const std::int64_t*, std::size_t idx, std::int64_t) {
    // renewal: p_k(z) = sum_{j=1}^k f_j(z) p_{k-j}(0)
    double total = 0.0;
    for (int k = 1; k <= horizon; ++k) {
      double v = p[static_cast<std::size_t>(k)][idx];
      for (int j = 1; j < k; ++j) v -= f[static_cast<std::size_t>(j)] * p[static_cast<std::size_t>(k - j)][0];
      f[static_cast<std::size_t>(k)] = v;
      total += v;
    }
    h.values_[idx] = total;
  });
  return h;
}

double HittingTable::operator()(const LatticePoint& z) const {
  require(z.dim() == dim_, "HittingTable: dimension mismatch");
  std::int64_t abs[kMaxDim];
  for (int j = 0; j < dim_; ++j) {
    abs[j] = std::llabs(z[j]);
    if (abs[j] > horizon_) return 0.0;
  }
  return at_abs(abs);
}

double lclt_density(int dim, std::int64_t k, std::int64_t norm2) {
  const double d = dim;
  return 2.0 * std::pow(d / (2.0 * std::numbers::pi * static_cast<double>(k)), d / 2.0) *
         std::exp(-d * static_cast<double>(norm2) / (2.0 * static_cast<double>(k)));
}

double green_tail(const GreenTable& table, const LatticePoint& z) {
  const int dim = table.dim();
  require(dim >= 3, "green_tail: the Green function is finite only for d >= 3");
  const std::int64_t T = table.horizon();
  const std::int64_t l1 = z.l1_norm();
  const std::int64_t r2 = z.norm2();
  const std::int64_t k0 = ((T - l1) & 1) == 0 ? T : T - 1;
  double ratio = 1.0;
  if (k0 >= 1 && l1 <= k0) {
    const double exact = table.last_layer(static_cast<int>(T - k0), z);
    const double approx = lclt_density(dim, k0, r2);
    if (exact > 0 && approx > 0) ratio = exact / approx;
  }
  const double corr = (ratio - 1.0) * static_cast<double>(k0);
  const std::int64_t kmax = std::max<std::int64_t>(64 * T, 20000);
  double sum = 0.0;
  for (std::int64_t k = k0 + 2; k <= kmax; k += 2)
    sum += lclt_density(dim, k, r2) * (1.0 + corr / static_cast<double>(k));
  // remainder sum_{k > kmax, step 2} of the leading term, as an integral
  const double d = dim;
  const double K = static_cast<double>(kmax) + 1.0;
  const double c = std::pow(d / (2.0 * std::numbers::pi), d / 2.0);
  const double a = d * static_cast<double>(r2) / 2.0;
  sum += c * (std::pow(K, 1.0 - d / 2.0) / (d / 2.0 - 1.0) - (a - corr) * std::pow(K, -d / 2.0) / (d / 2.0));
  return sum;
}

double GreenAsymptote::operator()(const std::int64_t* abs) const noexcept {
  double r2 = 0.0, q = 0.0;
  for (int j = 0; j < dim; ++j) {
    const auto x = static_cast<double>(abs[j]);
    r2 += x * x;
    q += x * x * x * x;
  }
  double u;
  if (dim == 3) u = 1.0 / std::sqrt(r2);
  else if (dim == 4) u = 1.0 / r2;
  else if (dim == 5) u = 1.0 / (r2 * std::sqrt(r2));
  else u = std::pow(r2, (2.0 - dim) / 2.0);
  return u * (constant + (shell + cubic * q / (r2 * r2)) / r2);
}

GreenAsymptote fit_green_asymptote(int dim, double crossover_radius,
                                   const std::function<double(const LatticePoint&)>& inner) {
  require(dim >= 3, "fit_green_asymptote: d >= 3 required");
  require(crossover_radius >= 2.0, "fit_green_asymptote: crossover radius must be at least 2");
  const auto R = static_cast<std::int64_t>(crossover_radius);
  const double r2max = crossover_radius * crossover_radius;
  const double r2min = r2max / 4.0;
  const double inner_shell = (crossover_radius - 1.0) * (crossover_radius - 1.0);
  struct Sample {
    std::int64_t abs[kMaxDim];
    double g, w;
    bool outer;
  };
  std::vector<Sample> samples;
  // sorted coordinate classes only; the weight counts the lattice points in the class
  LatticePoint z(dim);
  std::int64_t c[kMaxDim] = {};
  while (true) {
    std::int64_t r2 = 0;
    for (int j = 0; j < dim; ++j) r2 += c[j] * c[j];
    if (r2 >= r2min && r2 <= r2max) {
      Sample s{};
      for (int j = 0; j < dim; ++j) z[j] = s.abs[j] = c[j];
      s.g = inner(z);
      s.w = class_size(c, dim);
      s.outer = r2 > inner_shell;
      samples.push_back(s);
    }
    // next non-increasing tuple c[0] >= c[1] >= ... >= c[d-1]
    int j = dim - 1;
    while (j >= 0 && c[j] == (j == 0 ? R : c[j - 1])) --j;
    if (j < 0) break;
    ++c[j];
    for (int k = j + 1; k < dim; ++k) c[k] = 0;
  }
  // weighted least squares on G/u = a + b/r^2 + c q/r^6
  GreenAsymptote a;
  a.dim = dim;
  a.crossover_radius = crossover_radius;
  Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
  Eigen::Vector3d atb = Eigen::Vector3d::Zero();
  GreenAsymptote unit = a;
  unit.constant = 1.0;
  for (const auto& s : samples) {
    double r2 = 0, q = 0;
    for (int j = 0; j < dim; ++j) {
      const auto x = static_cast<double>(s.abs[j]);
      r2 += x * x;
      q += x * x * x * x;
    }
    const double u = unit(s.abs);
    const double row[3] = {1.0, 1.0 / r2, q / (r2 * r2 * r2)};
    const double y = s.g / u;
    for (int i = 0; i < 3; ++i) {
      atb(i) += s.w * row[i] * y;
      for (int k = 0; k < 3; ++k) ata(i, k) += s.w * row[i] * row[k];
    }
  }
  const Eigen::Vector3d coef = ata.colPivHouseholderQr().solve(atb);
  a.constant = coef(0);
  a.shell = coef(1);
  a.cubic = coef(2);
  for (const auto& s : samples)
    if (s.outer) a.mismatch = std::max(a.mismatch, std::abs(a(s.abs) - s.g) / s.g);
  return a;
}

GreenAsymptote fit_green_asymptote(const GreenTable& table, double crossover_radius) {
  require(crossover_radius <= table.layer_radius(), "fit_green_asymptote: crossover radius exceeds the stored layers");
  return fit_green_asymptote(table.dim(), crossover_radius,
                             [&](const LatticePoint& z) { return table(z) + green_tail(table, z); });
}

namespace {
struct BesselParams {
  int dim;
  int order[kMaxDim];
};

double bessel_integrand(double t, void* params) {
  const auto* p = static_cast<const BesselParams*>(params);
  const double x = t / p->dim;
  double v = 1.0;
  for (int j = 0; j < p->dim; ++j) v *= gsl_sf_bessel_In_scaled(p->order[j], x);
  return v;
}
}  // namespace

double green_bessel(const LatticePoint& z) {
  const int dim = z.dim();
  require(dim >= 3, "green_bessel: the Green function is finite only for d >= 3");
  BesselParams params{dim, {}};
  for (int j = 0; j < dim; ++j) {
    require(std::llabs(z[j]) < 100000, "green_bessel: coordinate too large");
    params.order[j] = static_cast<int>(std::llabs(z[j]));
  }
  static thread_local struct Workspace {
    gsl_integration_workspace* w = gsl_integration_workspace_alloc(1000);
    ~Workspace() { gsl_integration_workspace_free(w); }
  } ws;
  gsl_set_error_handler_off();
  gsl_function f{&bessel_integrand, &params};
  // the integrand peaks near t ~ |z|^2 / d and decays like t^{-d/2}
  const double split = std::max(50.0, 4.0 * static_cast<double>(z.norm2()));
  double head = 0, tail = 0, err = 0;
  int status = gsl_integration_qag(&f, 0.0, split, 0.0, 1e-11, 1000, GSL_INTEG_GAUSS31, ws.w, &head, &err);
  if (status != GSL_SUCCESS && status != GSL_EROUND)
    throw ResourceError(std::string("green_bessel: quadrature failed: ") + gsl_strerror(status));
  status = gsl_integration_qagiu(&f, split, 0.0, 1e-10, 1000, ws.w, &tail, &err);
  if (status != GSL_SUCCESS && status != GSL_EROUND)
    throw ResourceError(std::string("green_bessel: quadrature failed: ") + gsl_strerror(status));
  return head + tail;
}

double green_infinite(const LatticePoint& z, const GreenTable& table, const GreenAsymptote& asym) {
  require(z.dim() == table.dim() && asym.dim == table.dim(), "green_infinite: dimension mismatch");
  const auto r2 = static_cast<double>(z.norm2());
  if (r2 <= asym.crossover_radius * asym.crossover_radius) return table(z) + green_tail(table, z);
  std::int64_t abs[kMaxDim];
  for (int j = 0; j < z.dim(); ++j) abs[j] = std::llabs(z[j]);
  return asym(abs);
}

GreenFunction::GreenFunction(std::shared_ptr<const GreenTable> table, double crossover_radius)
    : dim_(table->dim()), method_(InnerCompletion::kLcltTail) {
  require(dim_ >= 3, "GreenFunction: d >= 3 required");
  if (crossover_radius < 0) crossover_radius = table->layer_radius();
  asym_ = fit_green_asymptote(*table, crossover_radius);
  inner_error_ = 1e-3;  // LCLT completion, checked against the Bessel integral
  fill_inner([&](const LatticePoint& z) { return (*table)(z) + green_tail(*table, z); });
}

GreenFunction::GreenFunction(int dim, double crossover_radius) : dim_(dim), method_(InnerCompletion::kBesselIntegral) {
  require(dim_ >= 3 && dim_ <= kMaxDim, "GreenFunction: d must be in [3, 8]");
  // evaluate each sorted coordinate class once
  std::map<std::vector<std::int64_t>, double> memo;
  auto inner = [&](const LatticePoint& z) {
    std::vector<std::int64_t> key(z.coords().begin(), z.coords().end());
    for (auto& v : key) v = std::llabs(v);
    std::sort(key.begin(), key.end());
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    const double g = green_bessel(z);
    memo.emplace(std::move(key), g);
    return g;
  };
  asym_ = fit_green_asymptote(dim, crossover_radius, inner);
  inner_error_ = 1e-6;  // quadrature tolerance
  fill_inner(inner);
}

double GreenFunction::relative_error(const LatticePoint& z) const noexcept {
  const auto r2 = static_cast<double>(z.norm2());
  const double R = asym_.crossover_radius;
  if (r2 <= static_cast<double>(inner_r2_)) return inner_error_;
  return std::max(inner_error_, asym_.mismatch * R * R / r2);
}

void GreenFunction::fill_inner(const std::function<double(const LatticePoint&)>& inner) {
  inner_radius_ = static_cast<std::int64_t>(asym_.crossover_radius);
  inner_r2_ = static_cast<std::int64_t>(std::floor(asym_.crossover_radius * asym_.crossover_radius));
  std::size_t s = 1;
  for (int j = 0; j < dim_; ++j) {
    inner_stride_[j] = s;
    s *= static_cast<std::size_t>(inner_radius_ + 1);
  }
  inner_.assign(s, 0.0);
  LatticePoint z(dim_);
  for (std::size_t i = 0; i < s; ++i) {
    std::size_t rem = i;
    for (int j = 0; j < dim_; ++j) {
      z[j] = static_cast<std::int64_t>(rem % static_cast<std::size_t>(inner_radius_ + 1));
      rem /= static_cast<std::size_t>(inner_radius_ + 1);
    }
    if (z.norm2() <= inner_r2_) inner_[i] = inner(z);
  }
}

int GreenFunction::default_horizon(int dim) {
  switch (dim) {
    case 3: return 150;
    case 4: return 60;
    case 5: return 24;
    case 6: return 15;
    default: return 10;
  }
}

double GreenFunction::default_crossover(int dim) {
  if (dim == 3) return 12.0;
  if (dim <= 5) return 7.0;
  return 10.0;
}

std::shared_ptr<const GreenFunction> GreenFunction::standard(int dim) {
  require(dim >= 3 && dim <= kMaxDim, "GreenFunction::standard: d must be in [3, 8]");
  static std::mutex mu;
  static std::map<int, std::shared_ptr<const GreenFunction>> memo;
  std::lock_guard lock(mu);
  if (auto it = memo.find(dim); it != memo.end()) return it->second;
  std::shared_ptr<const GreenFunction> g;
  if (dim == 3) {
    const int R = static_cast<int>(default_crossover(3));
    g = std::make_shared<const GreenFunction>(GreenTable::cached(3, default_horizon(3), R), R);
  } else {
    g = std::make_shared<const GreenFunction>(dim, default_crossover(dim));
  }
  return memo.emplace(dim, g).first->second;
}

}  // namespace rangelab
