#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "polymerlab/polymer.hpp"
#include "polymerlab/sampling.hpp"
#include "polymerlab/scaling.hpp"
#include "polymerlab/special_functions.hpp"
#include "polymerlab/stats.hpp"

using namespace polymerlab;

namespace {

ScalingFrame frame_of(std::int64_t N, double delta, double alpha = 0.5) {
  ScalingFrame fr;
  fr.N = N;
  fr.delta = delta;
  fr.alpha = alpha;
  return fr;
}

}  // namespace

TEST_CASE("lattice coordinate fixtures") {
  SUBCASE("origin point at N = 100") {
    const auto c = lattice_coords(frame_of(100, 0.1), ContinuumPoint{0.0, 0.0, 0.0, 1.0});
    CHECK(c.x_bar == 1);
    CHECK(c.y_bar == 1);
    CHECK(c.s_n == 0);
    CHECK(c.t_n == 200);
    CHECK(c.shift == 34);
    CHECK(c.x_tilde == 35);
    CHECK(c.s_tilde == 0);
    CHECK(c.y_tilde == 234);
    CHECK(c.t_tilde == 199);
  }
  SUBCASE("unit x lands exactly on the intended integer") {
    const auto c = lattice_coords(frame_of(1000, 0.2), ContinuumPoint{1.0, 0.0, 1.0, 1.0});
    CHECK(c.x_bar == 101);  // floor(1000^(2/3)) + 1
    CHECK(c.y_bar == 101);
  }
  CHECK_THROWS_AS(lattice_coords(frame_of(100, 0.1), ContinuumPoint{0, 1.0, 0, 0.5}),
                  std::invalid_argument);
}

TEST_CASE("lattice coordinates are monotone in x and t") {
  const ScalingFrame fr = frame_of(300, 0.15);
  std::int64_t prev_x = lattice_coords(fr, {-2.0, 0.0, 0.0, 1.0}).x_bar;
  for (double x = -1.9; x <= 2.0; x += 0.1) {
    const auto c = lattice_coords(fr, {x, 0.0, 0.0, 1.0});
    CHECK(c.x_bar >= prev_x);
    prev_x = c.x_bar;
  }
  std::int64_t prev_t = lattice_coords(fr, {0.0, 0.0, 0.0, 0.1}).t_n;
  for (double t = 0.15; t <= 2.0; t += 0.05) {
    const auto c = lattice_coords(fr, {0.0, 0.0, 0.0, t});
    CHECK(c.t_n >= prev_t);
    prev_t = c.t_n;
  }
}

TEST_CASE("Q_b membership and lattice-exact slice") {
  CHECK(point_in_qb({0.0, 0.0, 0.0, 1.0}, 2.0));
  CHECK_FALSE(point_in_qb({0.0, 0.0, 0.0, 0.4}, 2.0));   // t - s too small
  CHECK_FALSE(point_in_qb({3.0, 0.0, 0.0, 1.0}, 2.0));   // |x| > b
  const ScalingFrame fr = frame_of(100, 0.1);
  CHECK(point_on_lattice(fr, {0.0, 0.0, 0.0, 1.0}));
  CHECK(point_on_lattice(fr, {0.0, 0.25, 0.0, 1.0}));    // 2*100*0.25 = 50
  CHECK_FALSE(point_on_lattice(fr, {0.0, 0.013, 0.0, 1.0}));
}

TEST_CASE("h on a single-row geometry") {
  // N = 8, t chosen so the time window has height one; the polymer reduces
  // to a single path whose log weight sum is exact.
  ScalingFrame fr = frame_of(8, 0.1);
  const double t = 1.0 / 16.0;  // t_n = 1
  const int K = 5;
  const double y = (K - 1) / 4.0;  // y_bar = K with N^(2/3) = 4
  const ContinuumPoint pt{0.0, 0.0, y, t};
  const auto c = lattice_coords(fr, pt);
  REQUIRE(c.t_tilde == c.s_tilde);
  REQUIRE(c.y_tilde - c.x_tilde + 1 == K);

  PolymerParams params;
  params.alpha = 0.5;
  const GridExtent ext{c.x_tilde, c.y_tilde, c.s_tilde, c.t_tilde};
  WeightField field = build_field(params, Geometry::FullRect, ext, SeedSpec{7, 0});
  const double h1 = h_scaled(fr, ScaledVariant::FullDelta, field, pt);

  SUBCASE("value matches the hand-computed centering") {
    double lnz = 0.0;
    for (std::int64_t i = c.x_tilde; i <= c.y_tilde; ++i) lnz += field.log_weight(i, c.s_tilde);
    const double centering = fr.p() * (static_cast<double>(c.y_bar - c.x_bar) +
                                       4.0 * fr.N * (pt.t - pt.s));
    const double scale = fr.q * fr.sigma_p / (std::sqrt(2.0) * std::cbrt(static_cast<double>(fr.N)));
    CHECK(h1 == doctest::Approx(scale * (lnz - centering)).epsilon(1e-13));
  }
  SUBCASE("constant weight shift moves h by scale * c * path length") {
    const double shift = 0.75;
    for (std::int64_t i = c.x_tilde; i <= c.y_tilde; ++i) {
      field.set_log_weight(i, c.s_tilde, field.log_weight(i, c.s_tilde) + shift);
    }
    const double h2 = h_scaled(fr, ScaledVariant::FullDelta, field, pt);
    const double scale = fr.q * fr.sigma_p / (std::sqrt(2.0) * std::cbrt(static_cast<double>(fr.N)));
    CHECK(h2 - h1 == doctest::Approx(scale * shift * K).epsilon(1e-12));
  }
  SUBCASE("h is linear in sigma_p") {
    ScalingFrame doubled = fr;
    doubled.sigma_p *= 2.0;
    CHECK(h_scaled(doubled, ScaledVariant::FullDelta, field, pt) ==
          doctest::Approx(2.0 * h1).epsilon(1e-14));
  }
}

TEST_CASE("full and half h agree when the boundary is unreachable far away") {
  // Small frame; the coupled gap is tiny but finite, and both variants run.
  ScalingFrame fr = frame_of(24, 0.2);
  const ContinuumPoint pt{0.0, 0.0, 0.0, 1.0};
  const auto c = lattice_coords(fr, pt);
  PolymerParams params;
  params.alpha = 0.5;
  params.theta = 0.5;
  const GridExtent ext{c.x_tilde, c.y_tilde, c.s_tilde, c.t_tilde};
  const auto [full, half] = build_coupled_fields(params, ext, SeedSpec{21, 0});
  const double hf = h_scaled(fr, ScaledVariant::FullDelta, full, pt);
  const double hh = h_scaled(fr, ScaledVariant::HalfDelta, half, pt);
  CHECK(std::isfinite(hf));
  CHECK(std::isfinite(hh));
}

TEST_CASE("translation invariance in law of the full partition value") {
  PolymerParams params;
  params.alpha = 0.5;
  const int reps = 10000;
  Sample s1;
  Sample s2;
  for (int r = 0; r < reps; ++r) {
    const SeedSpec seed{4242, static_cast<std::uint32_t>(r)};
    const WeightField f1 = build_field(params, Geometry::FullRect, GridExtent{0, 3, 0, 2}, seed);
    s1.values.push_back(log_partition(f1, Variant::Full, {0, 0}, {3, 2}));
    const WeightField f2 = build_field(params, Geometry::FullRect, GridExtent{5, 8, 3, 5}, seed);
    s2.values.push_back(log_partition(f2, Variant::Full, {5, 3}, {8, 5}));
  }
  const auto ks = ks_two_sample(s1, s2);
  CHECK(ks.d < ks.threshold_at(0.01));
}

TEST_CASE("shape inequality margin") {
  SUBCASE("positive at moderate size and growing") {
    ScalingFrame fr = frame_of(500, 0.1);
    const double m500 = shape_inequality_margin(fr, 2.0, {0.0, 0.0, 0.0, 1.0});
    CHECK(m500 > 0.0);
    ScalingFrame fr2 = frame_of(1000, 0.1);
    const double m1000 = shape_inequality_margin(fr2, 2.0, {0.0, 0.0, 0.0, 1.0});
    CHECK(m1000 > m500);
  }
  SUBCASE("empty diagonal index range") {
    // Time window ends before the shifted start column: no diagonal index.
    ScalingFrame fr = frame_of(100, 0.1);
    CHECK_THROWS_AS(shape_inequality_margin(fr, 20.0, {0.0, 0.0, 0.0, 0.1}),
                    std::invalid_argument);
  }
  SUBCASE("point outside Q_b is rejected") {
    ScalingFrame fr = frame_of(100, 0.1);
    CHECK_THROWS_AS(shape_inequality_margin(fr, 2.0, {0.0, 0.0, 0.0, 0.4}),
                    std::invalid_argument);
  }
}

TEST_CASE("frame validation and centering default") {
  ScalingFrame fr = frame_of(100, 0.1, 0.5);
  CHECK(fr.p() == doctest::Approx(-digamma(0.5)).epsilon(1e-15));
  fr.p_override = 1.25;
  CHECK(fr.p() == 1.25);
  ScalingFrame bad = frame_of(100, -0.1);
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  ScalingFrame bad2 = frame_of(0, 0.1);
  CHECK_THROWS_AS(bad2.validate(), std::invalid_argument);
}
