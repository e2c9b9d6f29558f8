#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace rangelab {

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

/// Wilson score interval for a binomial proportion.
Interval wilson_interval(std::int64_t hits, std::int64_t trials, double z = 1.96);

struct SampleMoments {
  std::int64_t samples = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double skewness = 0.0;
  double se_mean = 0.0;
  double se_variance = 0.0;
};

SampleMoments sample_moments(std::span<const double> xs);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double slope_se = 0.0;
  int points = 0;
};

/// Weighted least squares y = intercept + slope x. Throws ContractError when
/// fewer than two points or when all x coincide.
LinearFit weighted_linear_fit(std::span<const double> x, std::span<const double> y, std::span<const double> w);

double log_mean_exp(std::span<const double> logs);
/// Upper standard normal tail P(N > k).
double normal_tail(double k);

}  // namespace rangelab
