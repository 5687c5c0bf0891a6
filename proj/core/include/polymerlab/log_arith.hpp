#ifndef POLYMERLAB_LOG_ARITH_HPP
#define POLYMERLAB_LOG_ARITH_HPP

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>

namespace polymerlab {

// Empty sums are encoded as -infinity. Arithmetic never underflows to this
// value (log-space magnitudes stay far above -DBL_MAX), so the marker is
// unambiguous.
inline constexpr double log_zero() {
  return -std::numeric_limits<double>::infinity();
}

inline bool is_log_zero(double x) {
  return x == log_zero();
}

// ln(e^a + e^b), safe for any mix of finite values and -inf markers.
inline double logsumexp(double a, double b) {
  if (is_log_zero(a)) return b;
  if (is_log_zero(b)) return a;
  const double hi = a > b ? a : b;
  const double lo = a > b ? b : a;
  return hi + std::log1p(std::exp(lo - hi));
}

inline double logsumexp(std::span<const double> xs) {
  double hi = log_zero();
  for (double x : xs) hi = hi > x ? hi : x;
  if (is_log_zero(hi)) return hi;
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - hi);
  return hi + std::log(acc);
}

// ln(e^a - e^b) for a >= b; a == b gives -inf.
inline double logdiffexp(double a, double b) {
  if (b > a) throw std::domain_error("logdiffexp: requires a >= b");
  if (is_log_zero(b)) return a;
  if (a == b) return log_zero();
  return a + std::log(-std::expm1(b - a));
}

}  // namespace polymerlab

#endif
