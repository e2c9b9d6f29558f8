#include "rangelab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rangelab/errors.hpp"

namespace rangelab {

Interval wilson_interval(std::int64_t hits, std::int64_t trials, double z) {
  require(trials > 0 && hits >= 0 && hits <= trials, "wilson_interval: bad counts");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(hits) / n;
  const double z2 = z * z;
  const double centre = (p + z2 / (2 * n)) / (1 + z2 / n);
  const double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / (1 + z2 / n);
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

SampleMoments sample_moments(std::span<const double> xs) {
  SampleMoments m;
  m.samples = static_cast<std::int64_t>(xs.size());
  require(m.samples >= 2, "sample_moments: need at least two samples");
  long double sum = 0;
  for (double x : xs) sum += x;
  m.mean = static_cast<double>(sum / xs.size());
  long double m2 = 0, m3 = 0, m4 = 0;
  for (double x : xs) {
    const long double d = x - m.mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  const double n = static_cast<double>(xs.size());
  m.variance = static_cast<double>(m2 / (n - 1));
  const double mu2 = static_cast<double>(m2 / n);
  const double mu4 = static_cast<double>(m4 / n);
  m.skewness = mu2 > 0 ? static_cast<double>(m3 / n) / std::pow(mu2, 1.5) : 0.0;
  m.se_mean = std::sqrt(m.variance / n);
  m.se_variance = std::sqrt(std::max(0.0, mu4 - mu2 * mu2 * (n - 3) / (n - 1)) / n);
  return m;
}

LinearFit weighted_linear_fit(std::span<const double> x, std::span<const double> y, std::span<const double> w) {
  require(x.size() == y.size() && x.size() == w.size(), "weighted_linear_fit: length mismatch");
  require(x.size() >= 2, "weighted_linear_fit: need at least two points");
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    require(w[i] > 0 && std::isfinite(w[i]), "weighted_linear_fit: weights must be positive");
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
  }
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += w[i] * (x[i] - mx) * (x[i] - mx);
    sxy += w[i] * (x[i] - mx) * (y[i] - my);
    syy += w[i] * (y[i] - my) * (y[i] - my);
  }
  require(sxx > 0, "weighted_linear_fit: degenerate design, all x coincide");
  LinearFit f;
  f.points = static_cast<int>(x.size());
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    sse += w[i] * r * r;
  }
  f.r_squared = syy > 0 ? 1.0 - sse / syy : 1.0;
  if (x.size() > 2) {
    const double n = static_cast<double>(x.size());
    // weights taken as relative; residual scale estimated from the fit
    f.slope_se = std::sqrt(sse / (n - 2) / sxx);
  }
  return f;
}

double log_mean_exp(std::span<const double> logs) {
  require(!logs.empty(), "log_mean_exp: empty input");
  const double m = *std::max_element(logs.begin(), logs.end());
  if (!std::isfinite(m)) return m;
  double s = 0;
  for (double v : logs) s += std::exp(v - m);
  return m + std::log(s / static_cast<double>(logs.size()));
}

double normal_tail(double k) { return 0.5 * std::erfc(k / std::sqrt(2.0)); }

}  // namespace rangelab
