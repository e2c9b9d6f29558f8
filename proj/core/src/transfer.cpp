#include "rangelab/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/distributions/binomial.hpp>

#include "neighbour_cells.hpp"
#include "rangelab/errors.hpp"
#include "rangelab/green.hpp"
#include "rangelab/parallel.hpp"
#include "rangelab/walk.hpp"

namespace rangelab {

namespace {

AdaptedGenerator constant_generator(double c) {
  AdaptedGenerator g;
  g.name = "constant(" + std::to_string(c).substr(0, 4) + ")";
  g.draw = [c](RngStream&, int len, double* z, double* m) {
    for (int i = 0; i < len; ++i) z[i] = m[i] = c;
  };
  return g;
}

AdaptedGenerator bernoulli_generator(double p) {
  AdaptedGenerator g;
  g.name = "bernoulli(" + std::to_string(p).substr(0, 4) + ")";
  g.bernoulli_p = p;
  g.draw = [p](RngStream& rng, int len, double* z, double* m) {
    for (int i = 0; i < len; ++i) {
      z[i] = rng.uniform() < p ? 1.0 : 0.0;
      m[i] = p;
    }
  };
  return g;
}

}  // namespace

std::vector<AdaptedGenerator> default_generator_battery() {
  std::vector<AdaptedGenerator> out;
  for (double c : {0.0, 0.5, 1.0}) out.push_back(constant_generator(c));
  for (double p : {0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0}) out.push_back(bernoulli_generator(p));

  AdaptedGenerator sticky;
  sticky.name = "sticky-bernoulli";
  sticky.draw = [](RngStream& rng, int len, double* z, double* m) {
    double prev = 0.0;
    for (int i = 0; i < len; ++i) {
      m[i] = i == 0 ? 0.5 : (prev > 0.5 ? 0.95 : 0.05);
      z[i] = rng.uniform() < m[i] ? 1.0 : 0.0;
      prev = z[i];
    }
  };
  out.push_back(sticky);

  AdaptedGenerator urn;
  urn.name = "polya-urn";
  urn.draw = [](RngStream& rng, int len, double* z, double* m) {
    double ones = 1.0, total = 2.0;
    for (int i = 0; i < len; ++i) {
      m[i] = ones / total;
      z[i] = rng.uniform() < m[i] ? 1.0 : 0.0;
      ones += z[i];
      total += 1.0;
    }
  };
  out.push_back(urn);

  // Scale chosen from the past, value uniform below it: E[Z | past] = a / 2.
  AdaptedGenerator scaled;
  scaled.name = "history-scaled-uniform";
  scaled.draw = [](RngStream& rng, int len, double* z, double* m) {
    double a = 1.0;
    for (int i = 0; i < len; ++i) {
      m[i] = a / 2.0;
      z[i] = a * rng.uniform();
      a = z[i] > 0.25 ? 1.0 : 0.1;
    }
  };
  out.push_back(scaled);

  // All mass at 0 or 1, with probability driven by the running sum.
  AdaptedGenerator extremal;
  extremal.name = "running-sum-extremal";
  extremal.draw = [](RngStream& rng, int len, double* z, double* m) {
    double sum = 0.0;
    for (int i = 0; i < len; ++i) {
      m[i] = std::min(1.0, 0.02 + 0.3 * sum);
      z[i] = rng.uniform() < m[i] ? 1.0 : 0.0;
      sum += z[i];
    }
  };
  out.push_back(extremal);
  return out;
}

TransferAudit transfer_kernel_checks(const std::vector<AdaptedGenerator>& generators, const KernelCheckOptions& opt,
                                     std::uint64_t seed, std::uint64_t first_stream) {
  require(opt.trials >= 2 && opt.length >= 1 && opt.split_blocks >= 1, "transfer_kernel_checks: bad options");
  TransferAudit audit;
  audit.trials = opt.trials;
  const int len = opt.length;
  const int blocks = opt.split_blocks;
  for (std::size_t g = 0; g < generators.size(); ++g) {
    const auto& gen = generators[g];
    RngStream rng(seed, first_stream + g);
    std::vector<double> z(static_cast<std::size_t>(len)), m(z.size());
    double s1 = 0, s1sq = 0, s2 = 0, s2sq = 0;
    std::int64_t lhs_hits = 0, rhs_hits = 0;
    double diff_sum = 0, diff_sq = 0;
    for (std::int64_t t = 0; t < opt.trials; ++t) {
      double split_s = 0.0, split_tilde = 0.0;
      for (int b = 0; b < blocks; ++b) {
        gen.draw(rng, len, z.data(), m.data());
        double sz = 0.0, sm = 0.0;
        for (int i = 0; i < len; ++i) {
          if (!(z[static_cast<std::size_t>(i)] >= 0.0 && z[static_cast<std::size_t>(i)] <= 1.0))
            throw ContractError("transfer_kernel_checks: generator " + gen.name + " emitted " +
                                std::to_string(z[static_cast<std::size_t>(i)]) + " outside [0, 1]");
          if (!(m[static_cast<std::size_t>(i)] >= 0.0 && m[static_cast<std::size_t>(i)] <= 1.0))
            throw ContractError("transfer_kernel_checks: generator " + gen.name +
                                " reported a conditional mean outside [0, 1]");
          sz += z[static_cast<std::size_t>(i)];
          sm += m[static_cast<std::size_t>(i)];
        }
        split_s += sz;
        split_tilde += kKappaStar * sm;
        if (b == 0) {
          const double single = std::exp(z.back() - kKappaStar * m.back());
          const double chain = std::exp(sz - kKappaStar * sm);
          s1 += single;
          s1sq += single * single;
          s2 += chain;
          s2sq += chain * chain;
        }
      }
      const bool lhs = split_s / blocks > opt.split_zeta;
      const bool rhs = split_tilde / blocks > opt.split_zeta / 2.0;
      lhs_hits += lhs;
      rhs_hits += rhs;
      const double diff = static_cast<double>(lhs) - static_cast<double>(rhs);
      diff_sum += diff;
      diff_sq += diff * diff;
    }
    const double nt = static_cast<double>(opt.trials);
    KernelCheck row;
    row.generator = gen.name;
    row.trials = opt.trials;
    row.single_mean = s1 / nt;
    row.single_se = std::sqrt(std::max(0.0, s1sq / nt - row.single_mean * row.single_mean) / (nt - 1));
    row.chain_mean = s2 / nt;
    row.chain_se = std::sqrt(std::max(0.0, s2sq / nt - row.chain_mean * row.chain_mean) / (nt - 1));
    if (gen.bernoulli_p >= 0.0) {
      const double p = gen.bernoulli_p;
      row.oracle = p * std::exp(1.0 - kKappaStar * p) + (1.0 - p) * std::exp(-kKappaStar * p);
      row.oracle_z = row.single_se > 0.0 ? (row.single_mean - row.oracle) / row.single_se
                                         : (row.single_mean == row.oracle ? 0.0 : HUGE_VAL);
      if (row.single_se == 0.0 && std::abs(row.single_mean - row.oracle) < 1e-12) row.oracle_z = 0.0;
    }
    row.split_lhs = static_cast<double>(lhs_hits) / nt;
    row.split_rhs = std::exp(-opt.split_zeta / 2.0) + static_cast<double>(rhs_hits) / nt;
    const double dmean = diff_sum / nt;
    row.split_se = std::sqrt(std::max(0.0, diff_sq / nt - dmean * dmean) / (nt - 1));

    const double tol = 1e-12;
    const bool single_ok = row.single_mean <= 1.0 + 3.0 * row.single_se + tol;
    const bool chain_ok = row.chain_mean <= 1.0 + 3.0 * row.chain_se + tol;
    const bool oracle_ok = row.oracle < 0.0 || std::abs(row.oracle_z) <= 4.0;
    const bool split_ok = row.split_lhs <= row.split_rhs + 3.0 * row.split_se + tol;
    row.ok = single_ok && chain_ok && oracle_ok && split_ok;
    if (!single_ok) audit.counterexamples.push_back(gen.name + ": single-step mean " + std::to_string(row.single_mean));
    if (!chain_ok) audit.counterexamples.push_back(gen.name + ": chained mean " + std::to_string(row.chain_mean));
    if (!oracle_ok)
      audit.counterexamples.push_back(gen.name + ": closed form off by " + std::to_string(row.oracle_z) + " se");
    if (!split_ok) audit.counterexamples.push_back(gen.name + ": split inequality");
    audit.max_single = std::max(audit.max_single, row.single_mean);
    audit.max_chain = std::max(audit.max_chain, row.chain_mean);
    audit.rows.push_back(row);
  }
  return audit;
}

bool TransferInequalityReport::passed() const {
  return std::all_of(rows.begin(), rows.end(), [](const TransferRow& r) { return r.ok; });
}

TransferInequalityReport transfer_iid_audit(std::int64_t n, std::int64_t T, const std::vector<double>& qs,
                                            const std::vector<double>& zetas) {
  require(T >= 1 && n >= T, "transfer_iid_audit: need 1 <= T <= n");
  TransferInequalityReport rep;
  rep.T = T;
  rep.n = n;
  const std::int64_t count = n - T + 1;
  const double Td = static_cast<double>(T);
  for (const double zeta : zetas) {
    require(zeta > 0.0, "transfer_iid_audit: zeta must be positive");
    for (const double q : qs) {
      require(q >= 0.0 && q <= 1.0, "transfer_iid_audit: q must lie in [0, 1]");
      TransferRow row;
      row.process = "iid-bernoulli(" + std::to_string(q).substr(0, 4) + ")";
      row.zeta = zeta;
      // P(Bin(count, q) > T zeta)
      const double k = std::floor(Td * zeta);
      if (k >= static_cast<double>(count)) {
        row.lhs = 0.0;
      } else if (q == 0.0) {
        row.lhs = 0.0;
      } else if (q == 1.0) {
        row.lhs = static_cast<double>(count) > Td * zeta ? 1.0 : 0.0;
      } else {
        const boost::math::binomial_distribution<double> bin(static_cast<double>(count), q);
        row.lhs = boost::math::cdf(boost::math::complement(bin, k));
      }
      row.rhs = (static_cast<double>(count) * q / Td > kTransferC * zeta ? 1.0 : 0.0) + std::exp(-kTransferC * zeta);
      row.ok = row.lhs <= row.rhs + 1e-12;
      rep.rows.push_back(row);
    }
    TransferRow det;
    det.process = "deterministic-one";
    det.zeta = zeta;
    det.lhs = static_cast<double>(count) / Td > zeta ? 1.0 : 0.0;
    det.rhs = (static_cast<double>(count) / Td > kTransferC * zeta ? 1.0 : 0.0) + std::exp(-kTransferC * zeta);
    det.ok = det.lhs <= det.rhs + 1e-12;
    rep.rows.push_back(det);
  }
  return rep;
}

std::pair<double, double> range_process_sums(const RangeIndex& index, std::int64_t T, const HittingTable& hit) {
  const std::int64_t n = index.steps();
  require(T >= 1 && n >= T, "range_process_sums: need 1 <= T <= n");
  require(hit.horizon() == T && hit.dim() == index.dim(), "range_process_sums: hitting table must match (d, T)");
  // sum_i |R[i-T+1, i] ∩ R_{i-T}|: a site in the window counts when its first
  // visit precedes the window start.
  std::vector<std::int64_t> stamp(static_cast<std::size_t>(index.num_sites()), -1);
  std::int64_t inter = 0;
  for (std::int64_t i = T; i <= n; ++i) {
    for (std::int64_t s = i - T + 1; s <= i; ++s) {
      const auto id = index.site_at(s);
      auto& st = stamp[static_cast<std::size_t>(id)];
      if (st == i) continue;
      st = i;
      if (index.first_visit(id) <= i - T) ++inter;
    }
  }
  // sum_{k=0}^{n-T} sum_{x in R_k} h_T(x - S_k)
  double cond = 0.0;
  detail::scan_range_neighbours(index, T, [&](std::int64_t k, const LatticePoint&, auto&& visit) {
    if (k > n - T) return;
    visit([&](std::int32_t, const std::int64_t* abs) { cond += hit.at_abs(abs); });
  });
  const double Td = static_cast<double>(T);
  return {static_cast<double>(inter) / (Td * Td), cond / (Td * Td)};
}

std::pair<double, double> range_process_sums(const RangeIndex& index, std::int64_t T) {
  const auto hit = HittingTable::build(index.dim(), static_cast<int>(T));
  return range_process_sums(index, T, hit);
}

TransferInequalityReport transfer_range_audit(int d, std::int64_t n, std::int64_t T, std::int64_t paths,
                                              std::vector<double> zetas, std::uint64_t seed,
                                              std::uint64_t first_stream) {
  require(paths >= 2, "transfer_range_audit: need at least two paths");
  const auto hit = HittingTable::build(d, static_cast<int>(T));
  std::vector<double> lhs(static_cast<std::size_t>(paths)), rhs(lhs.size());
  parallel_for(paths, [&](std::int64_t p) {
    RngStream rng(seed, first_stream + static_cast<std::uint64_t>(p));
    const WalkPath path = simulate_walk(d, n, rng);
    const RangeIndex index(path);
    const auto [a, b] = range_process_sums(index, T, hit);
    lhs[static_cast<std::size_t>(p)] = a;
    rhs[static_cast<std::size_t>(p)] = b;
  });
  if (zetas.empty()) {
    std::vector<double> sorted = lhs;
    std::sort(sorted.begin(), sorted.end());
    for (const double q : {0.1, 0.25, 0.5, 0.75, 0.9, 0.99}) {
      const auto idx = static_cast<std::size_t>(q * static_cast<double>(sorted.size() - 1));
      zetas.push_back(sorted[idx]);
    }
  }
  TransferInequalityReport rep;
  rep.T = T;
  rep.n = n;
  const double np = static_cast<double>(paths);
  for (const double zeta : zetas) {
    if (zeta <= 0.0) continue;
    double sum = 0.0, sq = 0.0;
    std::int64_t a_hits = 0, b_hits = 0;
    for (std::size_t p = 0; p < lhs.size(); ++p) {
      const bool a = lhs[p] > zeta;
      const bool b = rhs[p] > kTransferC * zeta;
      a_hits += a;
      b_hits += b;
      const double diff = static_cast<double>(a) - static_cast<double>(b);
      sum += diff;
      sq += diff * diff;
    }
    TransferRow row;
    row.process = "range-process";
    row.zeta = zeta;
    row.lhs = static_cast<double>(a_hits) / np;
    row.rhs = static_cast<double>(b_hits) / np + std::exp(-kTransferC * zeta);
    const double mean = sum / np;
    row.se = std::sqrt(std::max(0.0, sq / np - mean * mean) / (np - 1));
    row.ok = row.lhs <= row.rhs + 3.0 * row.se + 1e-12;
    rep.rows.push_back(row);
  }
  return rep;
}

DecompositionCheck corollary_decomposition_check(const RangeIndex& index, std::int64_t T) {
  const std::int64_t n = index.steps();
  require(T >= 1 && T <= n, "corollary_decomposition_check: need 1 <= T <= n");
  DecompositionCheck out;
  out.T = T;
  out.range = index.range_upto(n);
  const std::int64_t blocks = n / T;
  const auto sites = static_cast<std::size_t>(index.num_sites());
  std::vector<std::int64_t> first(sites), seen(sites, -1), block_stamp(sites, -1);
  for (std::int64_t j = 0; j < T; ++j) {
    // first[x]: first time >= j at x; seen[x] == j marks validity.
    auto mark = [&](std::int64_t t) {
      const auto id = static_cast<std::size_t>(index.site_at(t));
      if (seen[id] != j) {
        seen[id] = j;
        first[id] = t;
      }
    };
    mark(j);
    std::int64_t U = 0, I = 0;
    const std::int64_t e = std::min(j + blocks * T, n);
    bool start_in_first = false;
    for (std::int64_t i = 1; i <= blocks; ++i) {
      const std::int64_t a = j + (i - 1) * T + 1;
      const std::int64_t b = std::min(j + i * T, n);
      const std::int64_t key = j * (blocks + 1) + i;
      std::int64_t size = 0, inter = 0;
      for (std::int64_t t = a; t <= b; ++t) {
        const auto id = static_cast<std::size_t>(index.site_at(t));
        if (block_stamp[id] == key) continue;
        block_stamp[id] = key;
        ++size;
        if (seen[id] == j && first[id] <= a - 1) ++inter;
        if (i == 1 && id == static_cast<std::size_t>(index.site_at(j))) start_in_first = true;
      }
      for (std::int64_t t = a; t <= b; ++t) mark(t);
      U += size;
      if (i >= 2) I += inter;
    }
    const std::int64_t eps = out.range - U + I;
    const std::int64_t eps_closed = out.range - index.subrange_size(j, e) + 1 - (start_in_first ? 1 : 0);
    out.eps.push_back(eps);
    if (eps != eps_closed) out.identity_exact = false;
    if (eps < 0 || eps > T) out.bounded = false;
  }
  return out;
}

}  // namespace rangelab
