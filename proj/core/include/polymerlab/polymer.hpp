#ifndef POLYMERLAB_POLYMER_HPP
#define POLYMERLAB_POLYMER_HPP

#include <cstdint>
#include <vector>

#include "polymerlab/sampling.hpp"

namespace polymerlab {

struct Endpoint {
  std::int64_t i = 0;
  std::int64_t j = 0;

  friend bool operator==(const Endpoint&, const Endpoint&) = default;
};

// Coordinatewise partial order on the lattice.
inline bool precedes_eq(const Endpoint& a, const Endpoint& b) {
  return a.i <= b.i && a.j <= b.j;
}

// Path sets, all over up-right lattice paths from one endpoint to another:
//   Full              every path
//   Half              paths within {i >= j}
//   In                paths within {i > j}
//   Boundary          half-space paths touching the diagonal {i = j}
//   Exit              unrestricted paths touching the diagonal
//   InParallelogram   paths inside a parallelogram around the endpoints
//   ExitParallelogram paths leaving it through the sides parallel to its axis
//   PointToLine       sum over the staircase endpoints of the trapezoid
//   InhomFull         Full on a tilted-column field
enum class Variant {
  Full,
  Half,
  In,
  Boundary,
  Exit,
  InParallelogram,
  ExitParallelogram,
  PointToLine,
  InhomFull
};

const char* variant_name(Variant v);

// Parallelogram with axis a -> b, half-width k in antidiagonal units: the
// vertices are a +- (-k, k) and b +- (-k, k). Boundary sites count as inside.
struct Parallelogram {
  Endpoint a;
  Endpoint b;
  std::int64_t k = 1;
};

// Membership test for p in the parallelogram; exact in integer arithmetic.
bool parallelogram_contains(const Parallelogram& para, std::int64_t i, std::int64_t j);

// ln sum over the variant's path set of the path weight products, or -inf
// when the path set is empty. Each DP cell uses pairwise log-sum-exp, never
// raw products.
double log_partition(const WeightField& field, Variant variant, Endpoint from, Endpoint to);

// One two-layer pass split by diagonal contact: log_in sums paths avoiding
// {i = j} entirely (and staying in {i > j}), log_touch sums paths that meet
// it. On a half-space field log_touch is the boundary part; on a full-space
// field it is the diagonal-touching (exit) part. No subtraction anywhere.
struct FlaggedParts {
  double log_in;
  double log_touch;
};
FlaggedParts log_partition_flagged(const WeightField& field, Endpoint from, Endpoint to);

enum class ParallelogramMode { Inside, Exiting };

// Inside: DP restricted to member sites. Exiting: log-difference of the
// unrestricted and inside values, recomputed by a flagged pass over the
// membership predicate whenever the difference is too small to subtract
// stably (relative magnitude below 1e-9).
double log_partition_parallelogram(const WeightField& field, const Parallelogram& para,
                                   ParallelogramMode mode);

// Half-space point-to-line value on the trapezoid weight geometry: the
// log-sum over k = 1..n of the point-to-point value (1,1) -> (2n-k+m+1, k).
double log_point_to_line(const WeightField& field, std::size_t n, std::size_t m);

// ln Z from (1,1) to (N,T) over the tilted-column rectangle (first column
// shape theta + alpha, elsewhere 2 alpha), sampled from the given seed.
double log_partition_inhom(const PolymerParams& params, std::int64_t N, std::int64_t T,
                           double theta, SeedSpec seed);

// Full DP table of one variant; unreachable sites carry the -inf marker.
struct LogPartitionTable {
  Variant variant;
  Endpoint origin;
  GridExtent extent;
  std::vector<double> values;

  double at(std::int64_t i, std::int64_t j) const;
};
LogPartitionTable log_partition_table(const WeightField& field, Variant variant, Endpoint from,
                                      Endpoint to);

}  // namespace polymerlab

#endif
