#include "polymerlab/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "polymerlab/polymer.hpp"
#include "polymerlab/shape_function.hpp"
#include "polymerlab/special_functions.hpp"

namespace polymerlab {

double ScalingFrame::p() const {
  return p_override ? *p_override : -digamma(alpha);
}

void ScalingFrame::validate() const {
  if (N < 1) throw std::invalid_argument("ScalingFrame: N must be >= 1");
  if (!(delta > 0.0)) throw std::invalid_argument("ScalingFrame: delta must be > 0");
  if (!(q > 0.0) || !(sigma_p > 0.0)) {
    throw std::invalid_argument("ScalingFrame: q and sigma_p must be > 0");
  }
  if (!(alpha > 0.0)) throw std::invalid_argument("ScalingFrame: alpha must be > 0");
}

std::int64_t floor_scaled(double v) {
  const double r = std::nearbyint(v);
  if (std::fabs(v - r) <= 1e-9 * std::max(1.0, std::fabs(v))) {
    return static_cast<std::int64_t>(r);
  }
  return static_cast<std::int64_t>(std::floor(v));
}

LatticeCoords lattice_coords(const ScalingFrame& frame, const ContinuumPoint& pt) {
  frame.validate();
  if (!(pt.t > pt.s)) throw std::invalid_argument("lattice_coords: requires t > s");
  const double n23 = std::pow(static_cast<double>(frame.N), 2.0 / 3.0);
  const double q2 = frame.q * frame.q;
  LatticeCoords c;
  c.x_bar = floor_scaled(n23 * pt.x / q2) + 1;
  c.y_bar = floor_scaled(n23 * pt.y / q2) + 1;
  c.s_n = floor_scaled(2.0 * frame.N * pt.s);
  c.t_n = floor_scaled(2.0 * frame.N * pt.t);
  c.shift = floor_scaled(std::pow(static_cast<double>(frame.N), 2.0 / 3.0 + frame.delta));
  c.x_tilde = c.x_bar + c.s_n + c.shift;
  c.s_tilde = c.s_n;
  c.y_tilde = c.y_bar + c.t_n + c.shift - 1;
  c.t_tilde = c.t_n - 1;
  return c;
}

bool point_in_qb(const ContinuumPoint& pt, double b) {
  if (!(b > 0.0)) throw std::invalid_argument("point_in_qb: b must be > 0");
  const double vals[4] = {pt.x, pt.s, pt.y, pt.t};
  for (double v : vals) {
    if (std::fabs(v) > b) return false;
  }
  return pt.t - pt.s > 1.0 / b;
}

bool point_on_lattice(const ScalingFrame& frame, const ContinuumPoint& pt) {
  const double n23 = std::pow(static_cast<double>(frame.N), 2.0 / 3.0);
  const double q2 = frame.q * frame.q;
  const double vals[4] = {n23 * pt.x / q2, n23 * pt.y / q2, 2.0 * frame.N * pt.s,
                          2.0 * frame.N * pt.t};
  for (double v : vals) {
    const double r = std::nearbyint(v);
    if (std::fabs(v - r) > 1e-9 * std::max(1.0, std::fabs(v))) return false;
  }
  return true;
}

double h_scaled(const ScalingFrame& frame, ScaledVariant variant, const WeightField& field,
                const ContinuumPoint& pt) {
  const LatticeCoords c = lattice_coords(frame, pt);
  Endpoint from;
  Endpoint to;
  Variant dp_variant;
  switch (variant) {
    case ScaledVariant::Full:
      from = Endpoint{c.x_bar + c.s_n, c.s_n};
      to = Endpoint{c.y_bar + c.t_n - 1, c.t_n - 1};
      dp_variant = Variant::Full;
      break;
    case ScaledVariant::FullDelta:
      from = Endpoint{c.x_tilde, c.s_tilde};
      to = Endpoint{c.y_tilde, c.t_tilde};
      dp_variant = Variant::Full;
      break;
    case ScaledVariant::HalfDelta:
      from = Endpoint{c.x_tilde, c.s_tilde};
      to = Endpoint{c.y_tilde, c.t_tilde};
      dp_variant = Variant::Half;
      break;
    default:
      throw std::logic_error("h_scaled: bad variant");
  }
  const double log_z = log_partition(field, dp_variant, from, to);
  const double centering =
      frame.p() * (static_cast<double>(c.y_bar - c.x_bar) + 4.0 * frame.N * (pt.t - pt.s));
  const double scale =
      frame.q * frame.sigma_p /
      (std::sqrt(2.0) * std::pow(static_cast<double>(frame.N), 1.0 / 3.0));
  return scale * (log_z - centering);
}

double shape_inequality_margin(const ScalingFrame& frame, double b, const ContinuumPoint& pt) {
  frame.validate();
  if (!point_in_qb(pt, b)) {
    throw std::invalid_argument("shape_inequality_margin: point outside Q_b");
  }
  if (!point_on_lattice(frame, pt)) {
    throw std::invalid_argument("shape_inequality_margin: point not lattice-exact");
  }
  const LatticeCoords c = lattice_coords(frame, pt);
  const std::int64_t lo = std::max(c.x_tilde, c.s_tilde);
  const std::int64_t hi = std::min(c.y_tilde, c.t_tilde);
  if (lo > hi) {
    throw std::invalid_argument("shape_inequality_margin: empty diagonal index range");
  }
  const ShapeContext ctx(frame.alpha);
  const double lhs =
      -static_cast<double>(c.t_tilde + c.y_tilde - c.s_tilde - c.x_tilde) * digamma(frame.alpha);
  double best = -std::numeric_limits<double>::infinity();
  for (std::int64_t i = lo; i <= hi; ++i) {
    const double v = f_two(ctx, static_cast<double>(i - c.x_tilde),
                           static_cast<double>(i - c.s_tilde)) +
                     f_two(ctx, static_cast<double>(c.t_tilde - i),
                           static_cast<double>(c.y_tilde - i));
    if (v > best) best = v;
  }
  return lhs - best;
}

}  // namespace polymerlab
