#include "polymerlab/polymer.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "polymerlab/log_arith.hpp"

namespace polymerlab {

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::Full:
      return "full";
    case Variant::Half:
      return "half";
    case Variant::In:
      return "in";
    case Variant::Boundary:
      return "boundary";
    case Variant::Exit:
      return "exit";
    case Variant::InParallelogram:
      return "in_parallelogram";
    case Variant::ExitParallelogram:
      return "exit_parallelogram";
    case Variant::PointToLine:
      return "point_to_line";
    case Variant::InhomFull:
      return "inhom_full";
  }
  return "?";
}

bool parallelogram_contains(const Parallelogram& para, std::int64_t i, std::int64_t j) {
  const std::int64_t d1 = para.b.i - para.a.i;
  const std::int64_t d2 = para.b.j - para.a.j;
  const std::int64_t den = d1 + d2;
  const std::int64_t r1 = i - para.a.i;
  const std::int64_t r2 = j - para.a.j;
  // p = a + t (b - a) + s (-1, 1) with t = (r1 + r2)/den and
  // s = (r2 d1 - r1 d2)/den; inside iff t in [0, 1] and |s| <= k.
  const std::int64_t tden = r1 + r2;
  if (tden < 0 || tden > den) return false;
  const std::int64_t sden = r2 * d1 - r1 * d2;
  return std::llabs(sden) <= para.k * den;
}

namespace {

void check_para(const Parallelogram& para) {
  if (para.a == para.b) {
    throw std::invalid_argument("parallelogram: degenerate, a == b");
  }
  if (!precedes_eq(para.a, para.b)) {
    throw std::invalid_argument("parallelogram: requires a precedes b");
  }
  if (para.k < 1) throw std::invalid_argument("parallelogram: k must be >= 1");
}

void check_ends(const WeightField& field, Endpoint from, Endpoint to) {
  if (!precedes_eq(from, to)) {
    throw std::invalid_argument("log_partition: from must precede to");
  }
  if (!field.extent().in_box(from.i, from.j) || !field.extent().in_box(to.i, to.j)) {
    throw std::invalid_argument("log_partition: endpoints outside field extent");
  }
}

// Row-rolling DP over the rectangle spanned by from..to. live(i,j) carves
// out the path set; dead cells pin -inf. Cells within one row sweep depend
// only on finished values, so the result is schedule-independent.
template <class Live>
double dp_plain(const WeightField& field, Endpoint from, Endpoint to, Live live) {
  const std::int64_t w = to.i - from.i + 1;
  std::vector<double> row(static_cast<std::size_t>(w), log_zero());
  for (std::int64_t j = from.j; j <= to.j; ++j) {
    for (std::int64_t i = from.i; i <= to.i; ++i) {
      const std::size_t c = static_cast<std::size_t>(i - from.i);
      if (!live(i, j)) {
        row[c] = log_zero();
        continue;
      }
      double prev;
      if (i == from.i && j == from.j) {
        prev = 0.0;
      } else {
        const double up = row[c];                                // value at (i, j-1)
        const double left = c > 0 ? row[c - 1] : log_zero();     // value at (i-1, j)
        prev = logsumexp(up, left);
      }
      row[c] = is_log_zero(prev) ? log_zero() : field.log_weight(i, j) + prev;
    }
  }
  return row[static_cast<std::size_t>(w - 1)];
}

// Same sweep carrying a touched/untouched pair per cell. touch(i,j) marks
// the contact set; paths are split by whether they ever met it.
template <class Live, class Touch>
FlaggedParts dp_flagged(const WeightField& field, Endpoint from, Endpoint to, Live live,
                        Touch touch) {
  const std::int64_t w = to.i - from.i + 1;
  std::vector<double> in_row(static_cast<std::size_t>(w), log_zero());
  std::vector<double> touch_row(static_cast<std::size_t>(w), log_zero());
  for (std::int64_t j = from.j; j <= to.j; ++j) {
    for (std::int64_t i = from.i; i <= to.i; ++i) {
      const std::size_t c = static_cast<std::size_t>(i - from.i);
      if (!live(i, j)) {
        in_row[c] = log_zero();
        touch_row[c] = log_zero();
        continue;
      }
      double prev_in;
      double prev_touch;
      if (i == from.i && j == from.j) {
        prev_in = 0.0;
        prev_touch = log_zero();
      } else {
        const double up_in = in_row[c];
        const double left_in = c > 0 ? in_row[c - 1] : log_zero();
        const double up_t = touch_row[c];
        const double left_t = c > 0 ? touch_row[c - 1] : log_zero();
        prev_in = logsumexp(up_in, left_in);
        prev_touch = logsumexp(up_t, left_t);
      }
      if (touch(i, j)) {
        prev_touch = logsumexp(prev_touch, prev_in);
        prev_in = log_zero();
      }
      const double lw = field.log_weight(i, j);
      in_row[c] = is_log_zero(prev_in) ? log_zero() : lw + prev_in;
      touch_row[c] = is_log_zero(prev_touch) ? log_zero() : lw + prev_touch;
    }
  }
  const std::size_t last = static_cast<std::size_t>(w - 1);
  return FlaggedParts{in_row[last], touch_row[last]};
}

void require_full_geometry(const WeightField& field, const char* what) {
  if (field.geometry() != Geometry::FullRect) {
    throw std::invalid_argument(std::string(what) + ": requires a full-space rectangle field");
  }
}

void require_half_geometry(const WeightField& field, const char* what) {
  if (field.geometry() != Geometry::HalfTrapezoid && field.geometry() != Geometry::BWTrapezoid) {
    throw std::invalid_argument(std::string(what) + ": requires a half-space field");
  }
}

}  // namespace

double log_partition(const WeightField& field, Variant variant, Endpoint from, Endpoint to) {
  check_ends(field, from, to);
  const auto in_field = [&field](std::int64_t i, std::int64_t j) { return field.contains(i, j); };
  switch (variant) {
    case Variant::Full:
    case Variant::InhomFull:
      // Any rectangular weight geometry supports the unrestricted path set.
      if (field.geometry() != Geometry::FullRect && field.geometry() != Geometry::BWRect) {
        throw std::invalid_argument("log_partition(full): geometry mismatch");
      }
      return dp_plain(field, from, to, in_field);
    case Variant::Half:
      require_half_geometry(field, "log_partition(half)");
      return dp_plain(field, from, to, [&field](std::int64_t i, std::int64_t j) {
        return i >= j && field.contains(i, j);
      });
    case Variant::In:
      // The strict region never sees the diagonal, so coupled full/half
      // fields give identical values here; both geometries are accepted.
      if (field.geometry() != Geometry::FullRect &&
          field.geometry() != Geometry::HalfTrapezoid) {
        throw std::invalid_argument("log_partition(in): geometry mismatch");
      }
      return dp_plain(field, from, to, [&field](std::int64_t i, std::int64_t j) {
        return i > j && field.contains(i, j);
      });
    case Variant::Boundary: {
      if (field.geometry() != Geometry::HalfTrapezoid) {
        throw std::invalid_argument("log_partition(boundary): requires a half-space field");
      }
      const auto parts = dp_flagged(
          field, from, to,
          [&field](std::int64_t i, std::int64_t j) { return i >= j && field.contains(i, j); },
          [](std::int64_t i, std::int64_t j) { return i == j; });
      return parts.log_touch;
    }
    case Variant::Exit: {
      require_full_geometry(field, "log_partition(exit)");
      const auto parts =
          dp_flagged(field, from, to, in_field,
                     [](std::int64_t i, std::int64_t j) { return i == j; });
      return parts.log_touch;
    }
    case Variant::InParallelogram:
    case Variant::ExitParallelogram:
      throw std::invalid_argument(
          "log_partition: parallelogram variants go through log_partition_parallelogram");
    case Variant::PointToLine:
      throw std::invalid_argument("log_partition: use log_point_to_line");
  }
  throw std::logic_error("log_partition: bad variant");
}

FlaggedParts log_partition_flagged(const WeightField& field, Endpoint from, Endpoint to) {
  check_ends(field, from, to);
  if (field.geometry() == Geometry::HalfTrapezoid) {
    return dp_flagged(
        field, from, to,
        [&field](std::int64_t i, std::int64_t j) { return i >= j && field.contains(i, j); },
        [](std::int64_t i, std::int64_t j) { return i == j; });
  }
  require_full_geometry(field, "log_partition_flagged");
  return dp_flagged(
      field, from, to, [&field](std::int64_t i, std::int64_t j) { return field.contains(i, j); },
      [](std::int64_t i, std::int64_t j) { return i == j; });
}

double log_partition_parallelogram(const WeightField& field, const Parallelogram& para,
                                   ParallelogramMode mode) {
  check_para(para);
  check_ends(field, para.a, para.b);
  require_full_geometry(field, "log_partition_parallelogram");
  const auto live_inside = [&field, &para](std::int64_t i, std::int64_t j) {
    return field.contains(i, j) && parallelogram_contains(para, i, j);
  };
  const double inside = dp_plain(field, para.a, para.b, live_inside);
  if (mode == ParallelogramMode::Inside) return inside;

  const double full = log_partition(field, Variant::Full, para.a, para.b);
  const double diff = full - inside;
  // The exiting mass is 1 - e^(-diff) of the total; once that is below 1e-9
  // the subtraction has no trustworthy digits left, so redo it as a flagged
  // pass over the membership predicate.
  if (!(diff > 1e-9)) {
    const auto parts = dp_flagged(
        field, para.a, para.b,
        [&field](std::int64_t i, std::int64_t j) { return field.contains(i, j); },
        [&para](std::int64_t i, std::int64_t j) { return !parallelogram_contains(para, i, j); });
    return parts.log_touch;
  }
  return logdiffexp(full, inside);
}

double log_point_to_line(const WeightField& field, std::size_t n, std::size_t m) {
  if (field.geometry() != Geometry::BWTrapezoid) {
    throw std::invalid_argument("log_point_to_line: requires the trapezoid weight geometry");
  }
  if (field.params().bw_alphas.size() != n || field.params().bw_betas.size() != m) {
    throw std::invalid_argument("log_point_to_line: n, m do not match the field parameters");
  }
  const auto table =
      log_partition_table(field, Variant::Half, Endpoint{1, 1},
                          Endpoint{static_cast<std::int64_t>(2 * n + m),
                                   static_cast<std::int64_t>(n)});
  double acc = log_zero();
  for (std::size_t k = 1; k <= n; ++k) {
    const std::int64_t i = static_cast<std::int64_t>(2 * n - k + m + 1);
    const std::int64_t j = static_cast<std::int64_t>(k);
    acc = logsumexp(acc, table.at(i, j));
  }
  return acc;
}

double log_partition_inhom(const PolymerParams& params, std::int64_t N, std::int64_t T,
                           double theta, SeedSpec seed) {
  const WeightField field = build_inhom_field(params, N, T, theta, seed);
  return log_partition(field, Variant::Full, Endpoint{1, 1}, Endpoint{N, T});
}

double LogPartitionTable::at(std::int64_t i, std::int64_t j) const {
  if (!extent.in_box(i, j)) throw std::out_of_range("LogPartitionTable::at");
  return values[static_cast<std::size_t>((j - extent.j_lo) * extent.width() + (i - extent.i_lo))];
}

LogPartitionTable log_partition_table(const WeightField& field, Variant variant, Endpoint from,
                                      Endpoint to) {
  check_ends(field, from, to);
  auto live = [&field, variant](std::int64_t i, std::int64_t j) {
    switch (variant) {
      case Variant::Full:
      case Variant::InhomFull:
        return field.contains(i, j);
      case Variant::Half:
        return i >= j && field.contains(i, j);
      case Variant::In:
        return i > j && field.contains(i, j);
      default:
        throw std::invalid_argument("log_partition_table: only plain variants have tables");
    }
  };
  LogPartitionTable out;
  out.variant = variant;
  out.origin = from;
  out.extent = GridExtent{from.i, to.i, from.j, to.j};
  out.values.assign(static_cast<std::size_t>(out.extent.width() * out.extent.height()),
                    log_zero());
  const std::int64_t w = out.extent.width();
  for (std::int64_t j = from.j; j <= to.j; ++j) {
    for (std::int64_t i = from.i; i <= to.i; ++i) {
      const std::size_t idx = static_cast<std::size_t>((j - from.j) * w + (i - from.i));
      if (!live(i, j)) continue;
      double prev;
      if (i == from.i && j == from.j) {
        prev = 0.0;
      } else {
        const double up = j > from.j ? out.values[idx - static_cast<std::size_t>(w)] : log_zero();
        const double left = i > from.i ? out.values[idx - 1] : log_zero();
        prev = logsumexp(up, left);
      }
      out.values[idx] = is_log_zero(prev) ? log_zero() : field.log_weight(i, j) + prev;
    }
  }
  return out;
}

}  // namespace polymerlab
