#ifndef POLYMERLAB_RNG_HPP
#define POLYMERLAB_RNG_HPP

#include <cstdint>

namespace polymerlab {

// (master_seed, replica_index) fully determines every sampled weight.
struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint32_t replica_index = 0;
};

std::uint64_t mix64(std::uint64_t x);

// Counter-based stream keyed by (master, replica, family, i, j). Outputs are
// a pure function of (key, counter), so sampling order across sites never
// matters and distinct replicas can run in parallel without shared state.
class CounterStream {
 public:
  CounterStream(const SeedSpec& seed, std::uint32_t family, std::int64_t i, std::int64_t j);

  std::uint64_t next_u64();
  double next_uniform();  // open interval (0, 1)
  double next_normal();   // standard normal, Box-Muller

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// ln G for G ~ Gamma(shape, 1); rejection sampling with the shape < 1 boost,
// valid for every shape > 0. Returned in log form so nothing underflows for
// tiny shapes.
double sample_log_gamma(double shape, CounterStream& stream);

// W with 1/W ~ Gamma(shape, 1), and its log form ln W = -ln G.
double sample_log_inverse_gamma(double shape, CounterStream& stream);
double sample_inverse_gamma(double shape, CounterStream& stream);

}  // namespace polymerlab

#endif
