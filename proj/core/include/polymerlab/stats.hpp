#ifndef POLYMERLAB_STATS_HPP
#define POLYMERLAB_STATS_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "polymerlab/log_arith.hpp"

namespace polymerlab {

// Finite observations, optionally weighted (empty weights = uniform).
struct Sample {
  std::vector<double> values;
  std::vector<double> weights;

  void validate() const;
  double mean() const;
  double variance() const;        // unbiased, uniform weights only
  double fourth_central() const;  // uniform weights only
};

struct KsResult {
  double d = 0.0;
  std::size_t n1 = 0;
  std::size_t n2 = 0;

  // Asymptotic two-sample critical value at the given level:
  // sqrt(ln(2/level)/2) * sqrt((n1+n2)/(n1 n2)).
  double threshold_at(double level) const;
};

// D = sup_x |F1_hat - F2_hat|; uniform weights required.
KsResult ks_two_sample(const Sample& s1, const Sample& s2);

// Least-squares slope of ln y on ln x with its standard error.
struct ExponentFit {
  double slope = 0.0;
  double stderr_slope = 0.0;
  double intercept = 0.0;
};
ExponentFit fit_exponent(std::span<const double> xs, std::span<const double> ys);

// Fractional-moment tail bound for the thin rectangle: the value
//   exp(-lambda u + ln C(N+T-2, N-1) + (N+T-1) ln(Gamma(2a-lambda)/Gamma(2a)))
// clamped to <= 1, evaluated through log_gamma throughout. Valid for
// 0 < lambda < min(1, 2 alpha).
double chernoff_bound_thin(double alpha, std::int64_t N, std::int64_t T, double lambda,
                           double u);

// Minimum of the bound over a lambda grid; reports the minimizer.
struct ChernoffMin {
  double bound = 1.0;
  double lambda = 0.0;
};
ChernoffMin chernoff_bound_thin_min(double alpha, std::int64_t N, std::int64_t T, double u,
                                    std::size_t grid_size = 64);

// Exceedance frequencies P(X >= threshold) with binomial confidence
// half-widths (normal approximation at the given z, plus a 3/n floor at the
// boundary frequencies).
struct TailCurve {
  std::vector<double> thresholds;
  std::vector<double> exceed_prob;
  std::vector<double> ci_half_width;
  std::size_t n = 0;
};
TailCurve empirical_tail(const Sample& sample, std::span<const double> thresholds,
                         double z = 1.96);

}  // namespace polymerlab

#endif
