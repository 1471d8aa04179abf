#pragma once

#include <cstdint>

namespace isac_aoi {

struct Interval {
  double lo;
  double hi;
  double half_width() const { return 0.5 * (hi - lo); }
};

inline constexpr double kZ95 = 1.959963984540054;

/// Wilson score interval for a binomial proportion.
Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = kZ95);

/// sqrt(p (1 - p) / n) at the observed proportion.
double binomial_std_error(std::uint64_t successes, std::uint64_t trials);

/// Running mean and variance (Welford).
class MeanAccumulator {
 public:
  void add(double x);
  std::uint64_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const;
  double std_error() const;

 private:
  std::uint64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

}  // namespace isac_aoi
