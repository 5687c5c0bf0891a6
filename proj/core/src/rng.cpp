#include "polymerlab/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace polymerlab {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

CounterStream::CounterStream(const SeedSpec& seed, std::uint32_t family, std::int64_t i,
                             std::int64_t j) {
  std::uint64_t k = mix64(seed.master_seed);
  k = mix64(k ^ (static_cast<std::uint64_t>(seed.replica_index) + 0x1000000001ULL));
  k = mix64(k ^ (static_cast<std::uint64_t>(family) + 0x2000000002ULL));
  k = mix64(k ^ static_cast<std::uint64_t>(i));
  k = mix64(k ^ static_cast<std::uint64_t>(j));
  key_ = k;
}

std::uint64_t CounterStream::next_u64() {
  return mix64(key_ + (counter_++) * 0x9e3779b97f4a7c15ULL);
}

double CounterStream::next_uniform() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterStream::next_normal() {
  const double u1 = next_uniform();
  const double u2 = next_uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

namespace {

// Marsaglia-Tsang for shape >= 1.
double log_gamma_draw_ge1(double shape, CounterStream& stream) {
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = stream.next_normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = stream.next_uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return std::log(d * v);
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return std::log(d * v);
  }
}

}  // namespace

double sample_log_gamma(double shape, CounterStream& stream) {
  if (!(shape > 0.0)) throw std::domain_error("sample_log_gamma: shape must be > 0");
  if (shape >= 1.0) return log_gamma_draw_ge1(shape, stream);
  // Boost: G_a = G_{a+1} * U^(1/a), carried out in log space.
  const double boosted = log_gamma_draw_ge1(shape + 1.0, stream);
  return boosted + std::log(stream.next_uniform()) / shape;
}

double sample_log_inverse_gamma(double shape, CounterStream& stream) {
  return -sample_log_gamma(shape, stream);
}

double sample_inverse_gamma(double shape, CounterStream& stream) {
  return std::exp(sample_log_inverse_gamma(shape, stream));
}

}  // namespace polymerlab
