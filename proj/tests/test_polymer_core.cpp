#include <array>
#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "oracles.hpp"
#include "polymerlab/log_arith.hpp"
#include "polymerlab/polymer.hpp"
#include "polymerlab/sampling.hpp"

using namespace polymerlab;
namespace orc = polymerlab::testing;

namespace {

PolymerParams homogeneous(double alpha, double theta = 0.3) {
  PolymerParams p;
  p.alpha = alpha;
  p.theta = theta;
  return p;
}

}  // namespace

TEST_CASE("single site partition equals its own log weight") {
  const WeightField f =
      build_field(homogeneous(0.5), Geometry::FullRect, GridExtent{1, 1, 1, 1}, SeedSpec{1, 0});
  CHECK(log_partition(f, Variant::Full, {1, 1}, {1, 1}) == f.log_weight(1, 1));
}

TEST_CASE("two-by-two rectangle against enumeration") {
  const WeightField f =
      build_field(homogeneous(0.5), Geometry::FullRect, GridExtent{1, 2, 1, 2}, SeedSpec{2, 0});
  const double dp = log_partition(f, Variant::Full, {1, 1}, {2, 2});
  const double brute = orc::enumerate_log_partition(f, {1, 1}, {2, 2}, orc::live_all(f));
  CHECK(dp == doctest::Approx(brute).epsilon(1e-14));
}

TEST_CASE("empty path sets give the minus-infinity marker") {
  const WeightField h = build_field(homogeneous(0.5), Geometry::HalfTrapezoid,
                                    GridExtent{1, 4, 1, 4}, SeedSpec{3, 0});
  CHECK(is_log_zero(log_partition(h, Variant::In, {1, 1}, {4, 3})));  // start on the diagonal
  CHECK(is_log_zero(log_partition(h, Variant::Half, {2, 1}, {3, 4})));  // end below i >= j
}

TEST_CASE("all variants match enumeration on random coupled fields") {
  std::mt19937_64 gen(12345);
  for (int trial = 0; trial < 40; ++trial) {
    const double alpha = std::array{0.3, 0.5, 1.0}[trial % 3];
    std::uniform_int_distribution<int> size(2, 6);
    std::uniform_int_distribution<int> lo(-3, 3);
    const std::int64_t i_lo = lo(gen);
    const std::int64_t j_lo = i_lo - size(gen) / 2;
    const GridExtent ext{i_lo, i_lo + size(gen), j_lo, j_lo + size(gen)};
    const auto [full, half] =
        build_coupled_fields(homogeneous(alpha), ext, SeedSpec{77, static_cast<std::uint32_t>(trial)});
    const Endpoint from{ext.i_lo, ext.j_lo};
    const Endpoint to{ext.i_hi, ext.j_hi};

    const double z_full = log_partition(full, Variant::Full, from, to);
    CHECK(std::fabs(z_full - orc::enumerate_log_partition(full, from, to, orc::live_all(full))) <=
          1e-10);

    const double z_in = log_partition(full, Variant::In, from, to);
    const double brute_in = orc::enumerate_log_partition(full, from, to, orc::live_strict(full));
    if (is_log_zero(z_in)) {
      CHECK(is_log_zero(brute_in));
    } else {
      CHECK(std::fabs(z_in - brute_in) <= 1e-10);
    }

    const double z_half = log_partition(half, Variant::Half, from, to);
    const double brute_half = orc::enumerate_log_partition(half, from, to, orc::live_half(half));
    if (is_log_zero(z_half)) {
      CHECK(is_log_zero(brute_half));
    } else {
      CHECK(std::fabs(z_half - brute_half) <= 1e-10);
    }

    const double z_exit = log_partition(full, Variant::Exit, from, to);
    const auto [b_nt, b_t] =
        orc::enumerate_split(full, from, to, orc::live_all(full), orc::touch_diagonal());
    if (is_log_zero(z_exit)) {
      CHECK(is_log_zero(b_t));
    } else {
      CHECK(std::fabs(z_exit - b_t) <= 1e-10);
    }

    if (!is_log_zero(z_half)) {
      const double z_b = log_partition(half, Variant::Boundary, from, to);
      const auto [hb_nt, hb_t] =
          orc::enumerate_split(half, from, to, orc::live_half(half), orc::touch_diagonal());
      if (is_log_zero(z_b)) {
        CHECK(is_log_zero(hb_t));
      } else {
        CHECK(std::fabs(z_b - hb_t) <= 1e-10);
      }
    }
  }
}

TEST_CASE("flagged pass splits by diagonal contact without cancellation") {
  const auto [full, half] = build_coupled_fields(homogeneous(0.5), GridExtent{1, 3, 1, 3},
                                                 SeedSpec{9, 2});
  SUBCASE("path forced through the diagonal") {
    const auto parts = log_partition_flagged(half, {1, 1}, {1, 1});
    CHECK(is_log_zero(parts.log_in));
    CHECK(parts.log_touch == half.log_weight(1, 1));
  }
  SUBCASE("three-by-three trapezoid against enumeration") {
    const auto parts = log_partition_flagged(half, {1, 1}, {3, 2});
    const auto [b_in, b_touch] =
        orc::enumerate_split(half, {1, 1}, {3, 2}, orc::live_half(half), orc::touch_diagonal());
    CHECK(is_log_zero(parts.log_in) == is_log_zero(b_in));
    CHECK(parts.log_touch == doctest::Approx(b_touch).epsilon(1e-12));
  }
  SUBCASE("parts recombine to the unrestricted value") {
    std::mt19937_64 gen(5);
    for (int trial = 0; trial < 50; ++trial) {
      std::uniform_int_distribution<int> size(1, 5);
      const GridExtent ext{-2, -2 + size(gen), -4, -4 + size(gen)};
      const auto [f2, h2] = build_coupled_fields(homogeneous(0.4, 0.1), ext,
                                                 SeedSpec{100, static_cast<std::uint32_t>(trial)});
      const Endpoint from{ext.i_lo, ext.j_lo};
      const Endpoint to{ext.i_hi, ext.j_hi};
      const auto parts_full = log_partition_flagged(f2, from, to);
      const double recomposed = logsumexp(parts_full.log_in, parts_full.log_touch);
      CHECK(std::fabs(recomposed - log_partition(f2, Variant::Full, from, to)) <= 1e-10);
      const auto parts_half = log_partition_flagged(h2, from, to);
      const double z_half = log_partition(h2, Variant::Half, from, to);
      if (is_log_zero(z_half)) {
        CHECK(is_log_zero(logsumexp(parts_half.log_in, parts_half.log_touch)));
      } else {
        CHECK(std::fabs(logsumexp(parts_half.log_in, parts_half.log_touch) - z_half) <= 1e-10);
      }
    }
  }
}

TEST_CASE("partition identities on coupled fields") {
  std::mt19937_64 gen(31);
  for (int trial = 0; trial < 30; ++trial) {
    std::uniform_int_distribution<int> size(2, 6);
    const GridExtent ext{-1, -1 + size(gen), -3, -3 + size(gen)};
    const auto [full, half] = build_coupled_fields(homogeneous(0.5, 0.4), ext,
                                                   SeedSpec{200, static_cast<std::uint32_t>(trial)});
    const Endpoint from{ext.i_lo, ext.j_lo};
    const Endpoint to{ext.i_hi, ext.j_hi};
    const double z_full = log_partition(full, Variant::Full, from, to);
    const double z_in = log_partition(full, Variant::In, from, to);
    const double z_exit = log_partition(full, Variant::Exit, from, to);
    CHECK(std::fabs(logsumexp(z_in, z_exit) - z_full) <= 1e-10);

    const double z_half = log_partition(half, Variant::Half, from, to);
    if (!is_log_zero(z_half)) {
      const double z_b = log_partition(half, Variant::Boundary, from, to);
      const double z_in_h = log_partition(half, Variant::In, from, to);
      CHECK(std::fabs(logsumexp(z_in_h, z_b) - z_half) <= 1e-10);
      CHECK(z_in == z_in_h);  // the strict region never sees the diagonal
      CHECK(z_in <= std::min(z_half, z_full) + 1e-12);
    }
  }
}

TEST_CASE("concatenation lower bound through a midpoint") {
  const WeightField f =
      build_field(homogeneous(0.5), Geometry::FullRect, GridExtent{1, 6, 1, 5}, SeedSpec{44, 0});
  const Endpoint a{1, 1};
  const Endpoint c{6, 5};
  for (std::int64_t bi = 1; bi <= 6; ++bi) {
    for (std::int64_t bj = 1; bj <= 5; ++bj) {
      const Endpoint b{bi, bj};
      const double lhs = log_partition(f, Variant::Full, a, c);
      const double rhs = log_partition(f, Variant::Full, a, b) +
                         log_partition(f, Variant::Full, b, c) - f.log_weight(bi, bj);
      CHECK(lhs >= rhs - 1e-10);
    }
  }
}

TEST_CASE("boundary part is dominated by the diagonal splitting sum") {
  std::mt19937_64 gen(77);
  for (int trial = 0; trial < 20; ++trial) {
    std::uniform_int_distribution<int> size(3, 6);
    const std::int64_t w = size(gen);
    const GridExtent ext{-1, -1 + w, -3, -3 + size(gen)};
    const auto [full, half] = build_coupled_fields(homogeneous(0.5, 0.7), ext,
                                                   SeedSpec{300, static_cast<std::uint32_t>(trial)});
    const Endpoint from{ext.i_lo, ext.j_lo};
    const Endpoint to{ext.i_hi, ext.j_hi};
    if (from.i < from.j || to.i < to.j) continue;
    const double z_b = log_partition(half, Variant::Boundary, from, to);
    if (is_log_zero(z_b)) continue;
    double bound = log_zero();
    const std::int64_t lo = std::max(from.i, from.j);
    const std::int64_t hi = std::min(to.i, to.j);
    for (std::int64_t i = lo; i <= hi; ++i) {
      if (!half.contains(i, i)) continue;
      const double term = -half.log_weight(i, i) +
                          log_partition(half, Variant::Half, from, {i, i}) +
                          log_partition(half, Variant::Half, {i, i}, to);
      bound = logsumexp(bound, term);
    }
    CHECK(z_b <= bound + 1e-10);
  }
}

TEST_CASE("raising one site weight never lowers a partition value") {
  WeightField f =
      build_field(homogeneous(0.5), Geometry::FullRect, GridExtent{1, 5, 1, 4}, SeedSpec{50, 0});
  const double before = log_partition(f, Variant::Full, {1, 1}, {5, 4});
  const double before_exit = log_partition(f, Variant::Exit, {1, 1}, {5, 4});
  f.set_log_weight(3, 2, f.log_weight(3, 2) + 1.5);
  CHECK(log_partition(f, Variant::Full, {1, 1}, {5, 4}) >= before);
  CHECK(log_partition(f, Variant::Exit, {1, 1}, {5, 4}) >= before_exit - 1e-12);
}

TEST_CASE("parallelogram membership and modes") {
  const WeightField f =
      build_field(homogeneous(0.5), Geometry::FullRect, GridExtent{1, 4, 1, 4}, SeedSpec{60, 0});
  SUBCASE("inactive constraint reproduces the full value exactly") {
    const Parallelogram wide{{1, 1}, {4, 4}, 100};
    CHECK(log_partition_parallelogram(f, wide, ParallelogramMode::Inside) ==
          log_partition(f, Variant::Full, {1, 1}, {4, 4}));
    // nothing exits: the marker comes back
    CHECK(is_log_zero(log_partition_parallelogram(f, wide, ParallelogramMode::Exiting)));
  }
  SUBCASE("narrow corridor against enumeration") {
    const Parallelogram narrow{{1, 1}, {4, 4}, 1};
    const auto inside_pred = [&](std::int64_t i, std::int64_t j) {
      return f.contains(i, j) && parallelogram_contains(narrow, i, j);
    };
    const double inside = log_partition_parallelogram(f, narrow, ParallelogramMode::Inside);
    CHECK(inside ==
          doctest::Approx(orc::enumerate_log_partition(f, {1, 1}, {4, 4}, inside_pred))
              .epsilon(1e-12));
    const double exiting = log_partition_parallelogram(f, narrow, ParallelogramMode::Exiting);
    const auto [stay, leave] = orc::enumerate_split(
        f, {1, 1}, {4, 4}, orc::live_all(f),
        [&](std::int64_t i, std::int64_t j) { return !parallelogram_contains(narrow, i, j); });
    CHECK(std::fabs(exiting - leave) <= 1e-10);
    CHECK(std::fabs(logsumexp(inside, exiting) -
                    log_partition(f, Variant::Full, {1, 1}, {4, 4})) <= 1e-10);
    CHECK(inside <= log_partition(f, Variant::Full, {1, 1}, {4, 4}));
  }
  SUBCASE("fallback path when the exiting mass is tiny") {
    // Depress every site outside the corridor so the exit mass is far below
    // the subtraction noise floor; the flagged fallback must still match
    // enumeration.
    WeightField g = f;
    const Parallelogram narrow{{1, 1}, {4, 4}, 1};
    for (std::int64_t j = 1; j <= 4; ++j) {
      for (std::int64_t i = 1; i <= 4; ++i) {
        if (!parallelogram_contains(narrow, i, j)) {
          g.set_log_weight(i, j, g.log_weight(i, j) - 60.0);
        }
      }
    }
    const double exiting = log_partition_parallelogram(g, narrow, ParallelogramMode::Exiting);
    const auto [stay, leave] = orc::enumerate_split(
        g, {1, 1}, {4, 4}, orc::live_all(g),
        [&](std::int64_t i, std::int64_t j) { return !parallelogram_contains(narrow, i, j); });
    CHECK(exiting == doctest::Approx(leave).epsilon(1e-10));
  }
  SUBCASE("degenerate parallelogram is rejected") {
    CHECK_THROWS_AS(
        log_partition_parallelogram(f, Parallelogram{{2, 2}, {2, 2}, 1},
                                    ParallelogramMode::Inside),
        std::invalid_argument);
    CHECK_THROWS_AS(
        log_partition_parallelogram(f, Parallelogram{{1, 1}, {4, 4}, 0},
                                    ParallelogramMode::Inside),
        std::invalid_argument);
  }
}

TEST_CASE("point-to-line value on the trapezoid") {
  PolymerParams params;
  params.bw_alpha0 = 0.3;
  params.bw_betas = {0.6, 0.4};
  SUBCASE("single-row case is one path product") {
    params.bw_alphas = {0.5};
    const WeightField f =
        build_field(params, Geometry::BWTrapezoid, bw_trapezoid_extent(1, 2), SeedSpec{70, 0});
    double prod = 0.0;
    for (std::int64_t i = 1; i <= 4; ++i) prod += f.log_weight(i, 1);
    CHECK(log_point_to_line(f, 1, 2) == doctest::Approx(prod).epsilon(1e-13));
  }
  SUBCASE("two rows against enumeration and endpoint recombination") {
    params.bw_alphas = {0.5, 0.7};
    params.bw_betas = {0.6};
    const WeightField f =
        build_field(params, Geometry::BWTrapezoid, bw_trapezoid_extent(2, 1), SeedSpec{71, 0});
    // endpoints (2n - k + m + 1, k) for k = 1, 2
    const double z1 = orc::enumerate_log_partition(f, {1, 1}, {5, 1}, orc::live_half(f));
    const double z2 = orc::enumerate_log_partition(f, {1, 1}, {4, 2}, orc::live_half(f));
    CHECK(log_point_to_line(f, 2, 1) == doctest::Approx(logsumexp(z1, z2)).epsilon(1e-12));
    const double p1 = log_partition(f, Variant::Half, {1, 1}, {5, 1});
    const double p2 = log_partition(f, Variant::Half, {1, 1}, {4, 2});
    CHECK(log_point_to_line(f, 2, 1) == doctest::Approx(logsumexp(p1, p2)).epsilon(1e-12));
    CHECK_THROWS_AS(log_point_to_line(f, 1, 1), std::invalid_argument);
  }
}

TEST_CASE("tilted-column partition function") {
  PolymerParams params;
  params.alpha = 0.5;
  SUBCASE("single site has shape theta + alpha") {
    const WeightField f = build_inhom_field(params, 1, 1, 0.8, SeedSpec{80, 0});
    CHECK(f.site_shape(1, 1) == doctest::Approx(1.3));
    CHECK(log_partition_inhom(params, 1, 1, 0.8, SeedSpec{80, 0}) == f.log_weight(1, 1));
  }
  SUBCASE("three-by-two against enumeration") {
    const SeedSpec seed{81, 4};
    const WeightField f = build_inhom_field(params, 3, 2, 0.2, seed);
    const double brute = orc::enumerate_log_partition(f, {1, 1}, {3, 2}, orc::live_all(f));
    CHECK(log_partition_inhom(params, 3, 2, 0.2, seed) == doctest::Approx(brute).epsilon(1e-12));
  }
  CHECK_THROWS_AS(log_partition_inhom(params, 0, 3, 0.1, SeedSpec{0, 0}), std::invalid_argument);
}

TEST_CASE("table values and geometry errors") {
  const auto [full, half] =
      build_coupled_fields(homogeneous(0.5), GridExtent{1, 4, 1, 4}, SeedSpec{90, 0});
  const auto table = log_partition_table(full, Variant::Full, {1, 1}, {4, 4});
  CHECK(table.at(1, 1) == full.log_weight(1, 1));
  CHECK(table.at(4, 4) == log_partition(full, Variant::Full, {1, 1}, {4, 4}));
  CHECK_THROWS_AS(table.at(5, 5), std::out_of_range);
  CHECK_THROWS_AS(log_partition(half, Variant::Full, {1, 1}, {4, 4}), std::invalid_argument);
  CHECK_THROWS_AS(log_partition(full, Variant::Boundary, {1, 1}, {4, 4}), std::invalid_argument);
  CHECK_THROWS_AS(log_partition(full, Variant::Full, {3, 3}, {2, 2}), std::invalid_argument);
  CHECK_THROWS_AS(log_partition(full, Variant::Full, {0, 0}, {4, 4}), std::invalid_argument);
}
