#include "polymerlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "polymerlab/special_functions.hpp"

namespace polymerlab {

void Sample::validate() const {
  if (values.empty()) throw std::invalid_argument("Sample: empty");
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("Sample: non-finite value");
  }
  if (!weights.empty() && weights.size() != values.size()) {
    throw std::invalid_argument("Sample: weights size mismatch");
  }
}

double Sample::mean() const {
  validate();
  if (weights.empty()) {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc / static_cast<double>(values.size());
  }
  double acc = 0.0;
  double wsum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    acc += weights[i] * values[i];
    wsum += weights[i];
  }
  return acc / wsum;
}

double Sample::variance() const {
  validate();
  if (!weights.empty()) throw std::invalid_argument("Sample::variance: uniform weights only");
  if (values.size() < 2) throw std::invalid_argument("Sample::variance: need >= 2 values");
  const double m = mean();
  double acc = 0.0;
  for (double v : values) acc += (v - m) * (v - m);
  return acc / static_cast<double>(values.size() - 1);
}

double Sample::fourth_central() const {
  validate();
  if (!weights.empty()) throw std::invalid_argument("Sample::fourth_central: uniform weights only");
  const double m = mean();
  double acc = 0.0;
  for (double v : values) {
    const double d = v - m;
    acc += d * d * d * d;
  }
  return acc / static_cast<double>(values.size());
}

double KsResult::threshold_at(double level) const {
  if (!(level > 0.0) || !(level < 1.0)) {
    throw std::invalid_argument("threshold_at: level must lie in (0, 1)");
  }
  const double c = std::sqrt(0.5 * std::log(2.0 / level));
  const double n = static_cast<double>(n1);
  const double m = static_cast<double>(n2);
  return c * std::sqrt((n + m) / (n * m));
}

KsResult ks_two_sample(const Sample& s1, const Sample& s2) {
  s1.validate();
  s2.validate();
  if (!s1.weights.empty() || !s2.weights.empty()) {
    throw std::invalid_argument("ks_two_sample: uniform weights only");
  }
  std::vector<double> a = s1.values;
  std::vector<double> b = s2.values;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t ia = 0;
  std::size_t ib = 0;
  double d = 0.0;
  while (ia < a.size() && ib < b.size()) {
    const double x = std::min(a[ia], b[ib]);
    while (ia < a.size() && a[ia] <= x) ++ia;
    while (ib < b.size() && b[ib] <= x) ++ib;
    d = std::max(d, std::fabs(static_cast<double>(ia) / na - static_cast<double>(ib) / nb));
  }
  return KsResult{d, a.size(), b.size()};
}

ExponentFit fit_exponent(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("fit_exponent: size mismatch");
  if (xs.size() < 3) throw std::invalid_argument("fit_exponent: need >= 3 points");
  const std::size_t n = xs.size();
  std::vector<double> lx(n);
  std::vector<double> ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) {
      throw std::invalid_argument("fit_exponent: values must be > 0");
    }
    lx[i] = std::log(xs[i]);
    ly[i] = std::log(ys[i]);
  }
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("fit_exponent: degenerate x values");
  ExponentFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ly[i] - fit.intercept - fit.slope * lx[i];
    ssr += r * r;
  }
  fit.stderr_slope = n > 2 ? std::sqrt(ssr / static_cast<double>(n - 2) / sxx) : 0.0;
  return fit;
}

double chernoff_bound_thin(double alpha, std::int64_t N, std::int64_t T, double lambda,
                           double u) {
  if (N < 1 || T < 1) throw std::invalid_argument("chernoff_bound_thin: N, T must be >= 1");
  const double cap = std::min(1.0, 2.0 * alpha);
  if (!(lambda > 0.0) || !(lambda < cap)) {
    throw std::invalid_argument("chernoff_bound_thin: lambda must lie in (0, min(1, 2 alpha))");
  }
  const double a = static_cast<double>(N + T - 2);
  const double b = static_cast<double>(N - 1);
  const double log_binom =
      log_gamma(a + 1.0) - log_gamma(b + 1.0) - log_gamma(a - b + 1.0);
  const double log_bound = -lambda * u + log_binom +
                           static_cast<double>(N + T - 1) *
                               (log_gamma(2.0 * alpha - lambda) - log_gamma(2.0 * alpha));
  return std::exp(std::min(0.0, log_bound));
}

ChernoffMin chernoff_bound_thin_min(double alpha, std::int64_t N, std::int64_t T, double u,
                                    std::size_t grid_size) {
  if (grid_size < 2) throw std::invalid_argument("chernoff_bound_thin_min: grid too small");
  const double cap = std::min(1.0, 2.0 * alpha);
  ChernoffMin best;
  best.bound = 2.0;  // above any clamped value
  for (std::size_t k = 0; k < grid_size; ++k) {
    const double lambda =
        cap * (static_cast<double>(k + 1)) / (static_cast<double>(grid_size + 1));
    const double b = chernoff_bound_thin(alpha, N, T, lambda, u);
    if (b < best.bound) {
      best.bound = b;
      best.lambda = lambda;
    }
  }
  return best;
}

TailCurve empirical_tail(const Sample& sample, std::span<const double> thresholds, double z) {
  sample.validate();
  if (!sample.weights.empty()) throw std::invalid_argument("empirical_tail: uniform weights only");
  std::vector<double> sorted = sample.values;
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  TailCurve curve;
  curve.n = sorted.size();
  curve.thresholds.assign(thresholds.begin(), thresholds.end());
  for (double u : curve.thresholds) {
    const auto it = std::lower_bound(sorted.begin(), sorted.end(), u);
    const double count = static_cast<double>(sorted.end() - it);
    const double p = count / n;
    curve.exceed_prob.push_back(p);
    double half = z * std::sqrt(p * (1.0 - p) / n);
    if (p == 0.0 || p == 1.0) half = std::max(half, 3.0 / n);
    curve.ci_half_width.push_back(half);
  }
  return curve;
}

}  // namespace polymerlab
