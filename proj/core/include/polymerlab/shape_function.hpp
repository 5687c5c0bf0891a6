#ifndef POLYMERLAB_SHAPE_FUNCTION_HPP
#define POLYMERLAB_SHAPE_FUNCTION_HPP

#include <cstdint>
#include <span>

namespace polymerlab {

// Bulk half-parameter; bulk weights carry shape 2*alpha.
struct ShapeContext {
  double alpha;

  explicit ShapeContext(double a);
};

// g(zeta) = Psi_1(2a - zeta) / Psi_1(zeta), a smooth increasing bijection
// (0, 2a) -> (0, inf).
double g(const ShapeContext& ctx, double zeta);

// Inverse of g by bracketed bisection; |g(result) - x| <= 1e-12 * max(1, x).
double g_inverse(const ShapeContext& ctx, double x);

// Slope free-energy density f(x) = x Psi_0(g^{-1}(x)) + Psi_0(2a - g^{-1}(x)).
double f_slope(const ShapeContext& ctx, double x);

// f'(x) = Psi_0(g^{-1}(x)); strictly increasing, so f is convex.
double f_prime(const ShapeContext& ctx, double x);

// Two-argument form f(x, y) = -y f(x/y), y > 0, x >= 0. Slopes below one
// lattice step are floored at 1/y: every ordered pair of distinct lattice
// points yields x >= 0 with y >= 1 steps, so the harness never needs finer.
double f_two(const ShapeContext& ctx, double x, double y);

// Symmetric shape function: the Psi_1-weighted average
//   F(zeta) = -[Psi_1(2a-zeta) Psi_0(zeta) + Psi_1(zeta) Psi_0(2a-zeta)]
//             / [Psi_1(zeta) + Psi_1(2a-zeta)],
// with F(a) = -Psi_0(a) and F(zeta) = F(2a - zeta).
double shape_F(const ShapeContext& ctx, double zeta);

// One point of a deterministic free-energy gap inequality.
struct SlopeGapReport {
  std::int64_t N = 0;
  std::int64_t T = 0;
  std::int64_t k = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;     // lhs - rhs, exactly as computed
  double fitted_c0 = 0.0;  // margin normalized by the inequality's gap scale
};

// lhs = -N f(T/N), rhs = -N f((T-k)/N) - k Psi_0(alpha); the gap scale is
// k N^(-1/3+delta). Requires 1 <= k <= T < N. kappa and delta enter the
// normalization only; slopes above 1 - kappa N^(-1/3+delta) still evaluate,
// the fitted constant is just not comparable there.
SlopeGapReport check_slope_gap(const ShapeContext& ctx, std::int64_t N, std::int64_t T,
                               std::int64_t k, double delta, double kappa);

// lhs as above, rhs = -(N+T-k) Psi_0(3a/2) - k Psi_0(alpha); gap scale N.
SlopeGapReport check_rect_gap(const ShapeContext& ctx, std::int64_t N, std::int64_t T,
                              std::int64_t k, double delta, double kappa);

// Local expansion of F around its peak and of g^{-1} around 1, fitted by
// central finite differences on the supplied z grid.
struct QuadExpansionReport {
  double c1 = 0.0;  // d g^{-1}/dm at m = 1
  double c2 = 0.0;  // max |g^{-1}(1+z) - alpha - c1 z| / z^2
  double c3 = 0.0;  // -F''(alpha)/2
  double c4 = 0.0;  // max |F(alpha+z) - F(alpha) + c3 z^2| / z^4
  bool peak_holds = false;    // F(alpha) >= F(alpha+z) on the whole grid
  double min_peak_gap = 0.0;  // min_z [F(alpha) - F(alpha+z)]
  double max_symmetry_gap = 0.0;  // max_z |F(alpha+z) - F(alpha-z)|
};

QuadExpansionReport check_quadratic_expansion(const ShapeContext& ctx,
                                              std::span<const double> z_grid);

}  // namespace polymerlab

#endif
