#ifndef POLYMERLAB_SAMPLING_HPP
#define POLYMERLAB_SAMPLING_HPP

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "polymerlab/rng.hpp"

namespace polymerlab {

// alpha: bulk half-parameter (bulk sites have shape 2*alpha).
// theta: boundary tilt, >= 0; diagonal sites of half-space fields have
//        shape alpha + theta.
// bw_*: parameter vectors of the two point-to-point / point-to-line
//        weight geometries (alpha0, alpha_1..alpha_n, beta_1..beta_m).
struct PolymerParams {
  double alpha = 0.5;
  double theta = 0.0;
  double bw_alpha0 = 0.0;
  std::vector<double> bw_alphas;
  std::vector<double> bw_betas;

  void validate(bool require_bw = false) const;  // throws std::invalid_argument
};

enum class Geometry { FullRect, HalfTrapezoid, BWRect, BWTrapezoid };

const char* geometry_name(Geometry g);

// Inclusive lattice bounds.
struct GridExtent {
  std::int64_t i_lo = 1;
  std::int64_t i_hi = 1;
  std::int64_t j_lo = 1;
  std::int64_t j_hi = 1;

  std::int64_t width() const { return i_hi - i_lo + 1; }
  std::int64_t height() const { return j_hi - j_lo + 1; }
  bool in_box(std::int64_t i, std::int64_t j) const {
    return i >= i_lo && i <= i_hi && j >= j_lo && j <= j_hi;
  }
};

GridExtent bw_rect_extent(std::size_t n, std::size_t m);
GridExtent bw_trapezoid_extent(std::size_t n, std::size_t m);

// A lattice of log-weights over the live sites of one geometry, together
// with the map recording which Gamma shape generated each site. Weights are
// stored as ln W; all downstream computation is in log space.
class WeightField {
 public:
  WeightField(const PolymerParams& params, Geometry geometry, GridExtent extent,
              SeedSpec seed, bool inhom_tilted_column = false);

  Geometry geometry() const { return geometry_; }
  const GridExtent& extent() const { return extent_; }
  const PolymerParams& params() const { return params_; }
  SeedSpec seed() const { return seed_; }
  bool inhom_tilted_column() const { return inhom_column_; }

  // Live-site predicate of the geometry.
  bool contains(std::int64_t i, std::int64_t j) const;

  // Gamma shape parameter that generated site (i, j); throws for dead sites.
  double site_shape(std::int64_t i, std::int64_t j) const;

  // Stream family of site (i, j); sites drawing from the same family and
  // coordinates receive identical values across fields with equal seeds.
  std::uint32_t site_family(std::int64_t i, std::int64_t j) const;

  double log_weight(std::int64_t i, std::int64_t j) const;
  void set_log_weight(std::int64_t i, std::int64_t j, double v);

 private:
  std::size_t index(std::int64_t i, std::int64_t j) const;
  void fill();

  PolymerParams params_;
  Geometry geometry_;
  GridExtent extent_;
  SeedSpec seed_;
  bool inhom_column_ = false;
  std::vector<double> log_w_;
};

// Deterministic given the seed. Fields built from one seed share their bulk
// family: the full-space rectangle and the half-space trapezoid over the
// same extent agree exactly on off-diagonal sites i > j, while the diagonal
// uses bulk draws in the full field and boundary draws (shape alpha + theta)
// in the half field.
WeightField build_field(const PolymerParams& params, Geometry geometry, GridExtent extent,
                        SeedSpec seed);

// {full, half} over one extent from one seed; their bulk families coincide
// site-by-site on i > j by construction.
std::pair<WeightField, WeightField> build_coupled_fields(const PolymerParams& params,
                                                         GridExtent extent, SeedSpec seed);

// Full-space rectangle (1..N) x (1..T) with site shape A_i + B_j, where
// A_1 = theta, A_2 = ... = A_N = alpha and every B_j = alpha.
WeightField build_inhom_field(const PolymerParams& params, std::int64_t N, std::int64_t T,
                              double theta, SeedSpec seed);

// Debug dump, one line per live site: i,j,ln_w,shape.
void dump_field_csv(const WeightField& field, std::ostream& os);

}  // namespace polymerlab

#endif
