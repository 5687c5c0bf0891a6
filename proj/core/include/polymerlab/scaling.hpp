#ifndef POLYMERLAB_SCALING_HPP
#define POLYMERLAB_SCALING_HPP

#include <cstdint>
#include <optional>

#include "polymerlab/sampling.hpp"

namespace polymerlab {

// Lattice-to-continuum frame. q and sigma_p are model constants kept as
// configuration (defaults 1.0); the centering slope p defaults to
// -Psi_0(alpha), which makes the two natural centerings agree at leading
// order, and may be overridden.
struct ScalingFrame {
  std::int64_t N = 100;
  double delta = 0.1;
  double q = 1.0;
  double sigma_p = 1.0;
  double alpha = 0.5;
  std::optional<double> p_override;

  double p() const;
  void validate() const;
};

struct ContinuumPoint {
  double x = 0.0;
  double s = 0.0;
  double y = 0.0;
  double t = 1.0;
};

// Images of a continuum point on the lattice: the raw operators
// x_bar = floor(N^(2/3) x q^-2) + 1 and t_n = floor(2 N t), and the shifted
// endpoints (x_tilde, s_tilde) -> (y_tilde, t_tilde) that move the polymer
// floor(N^(2/3+delta)) sites off the diagonal, with the -1 end offsets.
struct LatticeCoords {
  std::int64_t x_bar = 0;
  std::int64_t y_bar = 0;
  std::int64_t s_n = 0;
  std::int64_t t_n = 0;
  std::int64_t shift = 0;
  std::int64_t x_tilde = 0;
  std::int64_t s_tilde = 0;
  std::int64_t y_tilde = 0;
  std::int64_t t_tilde = 0;
};

LatticeCoords lattice_coords(const ScalingFrame& frame, const ContinuumPoint& pt);

// Floor that first snaps values within 1e-9 relative of an integer, so that
// expressions like 1000^(2/3) land on the intended integer.
std::int64_t floor_scaled(double v);

// Membership in Q_b = [-b, b]^4 with t - s > 1/b.
bool point_in_qb(const ContinuumPoint& pt, double b);

// Membership in the lattice-exact slice: N^(2/3) x q^-2, N^(2/3) y q^-2,
// 2 N s, 2 N t all integers (up to the snap tolerance).
bool point_on_lattice(const ScalingFrame& frame, const ContinuumPoint& pt);

enum class ScaledVariant { Full, FullDelta, HalfDelta };

// Centered, rescaled free energy
//   (q sigma_p / (sqrt(2) N^(1/3))) [ln Z(...) - p (y_bar - x_bar + 4Nt - 4Ns)],
// with Z read from the given field at the variant's lattice endpoints.
double h_scaled(const ScalingFrame& frame, ScaledVariant variant, const WeightField& field,
                const ContinuumPoint& pt);

// Gap of the deterministic shape inequality at one point:
//   -(t~ + y~ - s~ - x~) Psi_0(alpha)
//     - max_i [f(i - x~, i - s~) + f(t~ - i, y~ - i)],
// maximized over diagonal indices max{x~, s~} <= i <= min{y~, t~}. Divided
// by N^(1/3 + 2 delta) this yields the empirical gap constant.
double shape_inequality_margin(const ScalingFrame& frame, double b, const ContinuumPoint& pt);

}  // namespace polymerlab

#endif
