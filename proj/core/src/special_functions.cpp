#include "polymerlab/special_functions.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace polymerlab {

namespace {

constexpr double kShiftThreshold = 12.0;
constexpr double kHalfLog2Pi = 0.91893853320467274178032973640562;

// Bernoulli numbers B_2 .. B_20.
constexpr double kB[10] = {
    1.0 / 6.0,      -1.0 / 30.0,      1.0 / 42.0,      -1.0 / 30.0,
    5.0 / 66.0,     -691.0 / 2730.0,  7.0 / 6.0,       -3617.0 / 510.0,
    43867.0 / 798.0, -174611.0 / 330.0};

void require_positive(double x, const char* who) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw std::domain_error(std::string(who) + ": argument must be finite and > 0");
  }
}

// Stirling-series tail of ln Gamma at large argument: sum B_2k / (2k(2k-1) x^(2k-1)).
double lgamma_series(double x) {
  const double w = 1.0 / (x * x);
  double acc = 0.0;
  double pw = 1.0;  // w^(k-1)
  for (int k = 1; k <= 10; ++k) {
    const int tk = 2 * k;
    acc += kB[k - 1] / (tk * (tk - 1)) * pw;
    pw *= w;
  }
  return acc / x;
}

double digamma_series(double x) {
  const double w = 1.0 / (x * x);
  double acc = 0.0;
  double pw = w;
  for (int k = 1; k <= 10; ++k) {
    acc += kB[k - 1] / (2 * k) * pw;
    pw *= w;
  }
  return std::log(x) - 0.5 / x - acc;
}

double trigamma_series(double x) {
  const double w = 1.0 / (x * x);
  double acc = 0.0;
  double pw = w / x;  // x^(-2k-1) at k=1
  for (int k = 1; k <= 10; ++k) {
    acc += kB[k - 1] * pw;
    pw *= w;
  }
  return 1.0 / x + 0.5 * w + acc;
}

double tetragamma_series(double x) {
  const double w = 1.0 / (x * x);
  double acc = 0.0;
  double pw = w * w;  // x^(-2k-2) at k=1
  for (int k = 1; k <= 10; ++k) {
    acc += kB[k - 1] * (2 * k + 1) * pw;
    pw *= w;
  }
  return -w - w / x - acc;
}

}  // namespace

double log_gamma(double x) {
  require_positive(x, "log_gamma");
  if (x >= kShiftThreshold) {
    return (x - 0.5) * std::log(x) - x + kHalfLog2Pi + lgamma_series(x);
  }
  // ln Gamma(x) = ln Gamma(x + m) - ln prod_{i<m} (x + i); the product stays
  // below 13! so it is formed exactly enough in double.
  double prod = 1.0;
  double y = x;
  while (y < kShiftThreshold) {
    prod *= y;
    y += 1.0;
  }
  return (y - 0.5) * std::log(y) - y + kHalfLog2Pi + lgamma_series(y) - std::log(prod);
}

double digamma(double x) {
  require_positive(x, "digamma");
  double shift = 0.0;
  double y = x;
  while (y < kShiftThreshold) {
    shift += 1.0 / y;
    y += 1.0;
  }
  return digamma_series(y) - shift;
}

double trigamma(double x) {
  require_positive(x, "trigamma");
  double shift = 0.0;
  double y = x;
  while (y < kShiftThreshold) {
    shift += 1.0 / (y * y);
    y += 1.0;
  }
  return trigamma_series(y) + shift;
}

double tetragamma(double x) {
  require_positive(x, "tetragamma");
  double shift = 0.0;
  double y = x;
  while (y < kShiftThreshold) {
    shift += 2.0 / (y * y * y);
    y += 1.0;
  }
  return tetragamma_series(y) - shift;
}

double polygamma(int order, double x) {
  switch (order) {
    case 0:
      return digamma(x);
    case 1:
      return trigamma(x);
    case 2:
      return tetragamma(x);
    default:
      throw std::domain_error("polygamma: order must be 0, 1, or 2");
  }
}

}  // namespace polymerlab
