#include "polymerlab/sampling.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace polymerlab {

namespace {

constexpr std::uint32_t kFamilyBulk = 0;
constexpr std::uint32_t kFamilyBoundary = 1;
constexpr std::uint32_t kFamilyBWRect = 2;
constexpr std::uint32_t kFamilyBWTrap = 3;
constexpr std::uint32_t kFamilyInhom = 4;

}  // namespace

void PolymerParams::validate(bool require_bw) const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("PolymerParams: alpha must be finite and > 0");
  }
  if (!(theta >= 0.0) || !std::isfinite(theta)) {
    throw std::invalid_argument("PolymerParams: theta must be finite and >= 0");
  }
  if (require_bw) {
    if (bw_alphas.empty()) {
      throw std::invalid_argument("PolymerParams: bw_alphas must be nonempty");
    }
    for (double ai : bw_alphas) {
      if (!(ai + bw_alpha0 > 0.0)) {
        throw std::invalid_argument("PolymerParams: need alpha_i + alpha0 > 0");
      }
      for (double aj : bw_alphas) {
        if (!(ai + aj > 0.0)) {
          throw std::invalid_argument("PolymerParams: need alpha_i + alpha_j > 0");
        }
      }
      for (double bk : bw_betas) {
        if (!(ai + bk > 0.0)) {
          throw std::invalid_argument("PolymerParams: need alpha_i + beta_k > 0");
        }
      }
    }
  }
}

const char* geometry_name(Geometry g) {
  switch (g) {
    case Geometry::FullRect:
      return "full_rect";
    case Geometry::HalfTrapezoid:
      return "half_trapezoid";
    case Geometry::BWRect:
      return "bw_rect";
    case Geometry::BWTrapezoid:
      return "bw_trapezoid";
  }
  return "?";
}

GridExtent bw_rect_extent(std::size_t n, std::size_t m) {
  return GridExtent{1, static_cast<std::int64_t>(n + m + 1), 1, static_cast<std::int64_t>(n)};
}

GridExtent bw_trapezoid_extent(std::size_t n, std::size_t m) {
  return GridExtent{1, static_cast<std::int64_t>(2 * n + m), 1, static_cast<std::int64_t>(n)};
}

WeightField::WeightField(const PolymerParams& params, Geometry geometry, GridExtent extent,
                         SeedSpec seed, bool inhom_tilted_column)
    : params_(params),
      geometry_(geometry),
      extent_(extent),
      seed_(seed),
      inhom_column_(inhom_tilted_column) {
  if (extent.width() < 1 || extent.height() < 1) {
    throw std::invalid_argument("WeightField: empty extent");
  }
  const bool bw = geometry == Geometry::BWRect || geometry == Geometry::BWTrapezoid;
  params_.validate(bw);
  if (bw) {
    const std::size_t n = params_.bw_alphas.size();
    const std::size_t m = params_.bw_betas.size();
    const GridExtent want =
        geometry == Geometry::BWRect ? bw_rect_extent(n, m) : bw_trapezoid_extent(n, m);
    if (extent.i_lo != want.i_lo || extent.i_hi != want.i_hi || extent.j_lo != want.j_lo ||
        extent.j_hi != want.j_hi) {
      throw std::invalid_argument("WeightField: extent does not match bw parameter sizes");
    }
  }
  if (inhom_column_ && geometry != Geometry::FullRect) {
    throw std::invalid_argument("WeightField: tilted column requires the full rectangle");
  }
  log_w_.assign(static_cast<std::size_t>(extent.width() * extent.height()),
                std::numeric_limits<double>::quiet_NaN());
  fill();
}

std::size_t WeightField::index(std::int64_t i, std::int64_t j) const {
  return static_cast<std::size_t>((j - extent_.j_lo) * extent_.width() + (i - extent_.i_lo));
}

bool WeightField::contains(std::int64_t i, std::int64_t j) const {
  if (!extent_.in_box(i, j)) return false;
  switch (geometry_) {
    case Geometry::FullRect:
    case Geometry::BWRect:
      return true;
    case Geometry::HalfTrapezoid:
      return i >= j;
    case Geometry::BWTrapezoid: {
      const auto n = static_cast<std::int64_t>(params_.bw_alphas.size());
      const auto m = static_cast<std::int64_t>(params_.bw_betas.size());
      return j >= 1 && j <= n && i >= j && i <= 2 * n + m - j + 1;
    }
  }
  return false;
}

double WeightField::site_shape(std::int64_t i, std::int64_t j) const {
  if (!contains(i, j)) throw std::out_of_range("site_shape: dead site");
  switch (geometry_) {
    case Geometry::FullRect:
      if (inhom_column_ && i == extent_.i_lo) return params_.theta + params_.alpha;
      return 2.0 * params_.alpha;
    case Geometry::HalfTrapezoid:
      return i == j ? params_.alpha + params_.theta : 2.0 * params_.alpha;
    case Geometry::BWRect: {
      const auto n = static_cast<std::int64_t>(params_.bw_alphas.size());
      if (i == 1) return params_.bw_alphas[j - 1] + params_.bw_alpha0;
      if (i <= n + 1) return params_.bw_alphas[i - 2] + params_.bw_alphas[j - 1];
      return params_.bw_alphas[j - 1] + params_.bw_betas[i - n - 2];
    }
    case Geometry::BWTrapezoid: {
      const auto n = static_cast<std::int64_t>(params_.bw_alphas.size());
      const auto m = static_cast<std::int64_t>(params_.bw_betas.size());
      if (i == j) return params_.bw_alphas[i - 1] + params_.bw_alpha0;
      if (i <= n) return params_.bw_alphas[i - 1] + params_.bw_alphas[j - 1];
      if (i <= n + m) return params_.bw_alphas[j - 1] + params_.bw_betas[i - n - 1];
      return params_.bw_alphas[j - 1] + params_.bw_alphas[2 * n + m - i];
    }
  }
  throw std::logic_error("site_shape: bad geometry");
}

std::uint32_t WeightField::site_family(std::int64_t i, std::int64_t j) const {
  switch (geometry_) {
    case Geometry::FullRect:
      return inhom_column_ ? kFamilyInhom : kFamilyBulk;
    case Geometry::HalfTrapezoid:
      return i == j ? kFamilyBoundary : kFamilyBulk;
    case Geometry::BWRect:
      return kFamilyBWRect;
    case Geometry::BWTrapezoid:
      return kFamilyBWTrap;
  }
  throw std::logic_error("site_family: bad geometry");
}

double WeightField::log_weight(std::int64_t i, std::int64_t j) const {
  if (!contains(i, j)) throw std::out_of_range("log_weight: dead site");
  return log_w_[index(i, j)];
}

void WeightField::set_log_weight(std::int64_t i, std::int64_t j, double v) {
  if (!contains(i, j)) throw std::out_of_range("set_log_weight: dead site");
  log_w_[index(i, j)] = v;
}

void WeightField::fill() {
  for (std::int64_t j = extent_.j_lo; j <= extent_.j_hi; ++j) {
    for (std::int64_t i = extent_.i_lo; i <= extent_.i_hi; ++i) {
      if (!contains(i, j)) continue;
      CounterStream stream(seed_, site_family(i, j), i, j);
      log_w_[index(i, j)] = sample_log_inverse_gamma(site_shape(i, j), stream);
    }
  }
}

WeightField build_field(const PolymerParams& params, Geometry geometry, GridExtent extent,
                        SeedSpec seed) {
  return WeightField(params, geometry, extent, seed);
}

std::pair<WeightField, WeightField> build_coupled_fields(const PolymerParams& params,
                                                         GridExtent extent, SeedSpec seed) {
  WeightField full(params, Geometry::FullRect, extent, seed);
  WeightField half(params, Geometry::HalfTrapezoid, extent, seed);
  return {std::move(full), std::move(half)};
}

WeightField build_inhom_field(const PolymerParams& params, std::int64_t N, std::int64_t T,
                              double theta, SeedSpec seed) {
  if (N < 1 || T < 1) throw std::invalid_argument("build_inhom_field: N, T must be >= 1");
  PolymerParams p = params;
  p.theta = theta;
  return WeightField(p, Geometry::FullRect, GridExtent{1, N, 1, T}, seed,
                     /*inhom_tilted_column=*/true);
}

void dump_field_csv(const WeightField& field, std::ostream& os) {
  os << "i,j,ln_w,shape\n";
  char buf[128];
  const GridExtent& e = field.extent();
  for (std::int64_t j = e.j_lo; j <= e.j_hi; ++j) {
    for (std::int64_t i = e.i_lo; i <= e.i_hi; ++i) {
      if (!field.contains(i, j)) continue;
      std::snprintf(buf, sizeof(buf), "%lld,%lld,%.17g,%.17g\n", static_cast<long long>(i),
                    static_cast<long long>(j), field.log_weight(i, j), field.site_shape(i, j));
      os << buf;
    }
  }
}

}  // namespace polymerlab
