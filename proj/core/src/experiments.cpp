#include "polymerlab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include "polymerlab/log_arith.hpp"
#include "polymerlab/polymer.hpp"
#include "polymerlab/rng.hpp"
#include "polymerlab/sampling.hpp"
#include "polymerlab/scaling.hpp"
#include "polymerlab/shape_function.hpp"
#include "polymerlab/special_functions.hpp"
#include "polymerlab/stats.hpp"

namespace polymerlab {

namespace {

using nlohmann::json;

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::uint64_t grid_seed(const ExperimentSpec& spec, std::size_t grid_index) {
  return mix64(spec.master_seed ^ mix64(0x9e3779b97f4a7c15ULL + grid_index));
}

std::string join_numbers(const json& arr) {
  std::string out;
  for (const auto& v : arr) {
    if (!out.empty()) out += '|';
    out += format_double(v.get<double>());
  }
  return out;
}

ScalingFrame frame_for(const ExperimentSpec& spec, std::int64_t N) {
  ScalingFrame fr;
  fr.N = N;
  fr.delta = spec.delta;
  fr.q = spec.q;
  fr.sigma_p = spec.sigma_p;
  fr.alpha = spec.alpha;
  fr.p_override = spec.p_override;
  return fr;
}

ContinuumPoint point_from(const json& arr) {
  return ContinuumPoint{arr[0].get<double>(), arr[1].get<double>(), arr[2].get<double>(),
                        arr[3].get<double>()};
}

double slope_cap(std::int64_t N, double delta, double kappa) {
  return 1.0 - kappa * std::pow(static_cast<double>(N), -1.0 / 3.0 + delta);
}

// Sorted-sample quantile, smallest value with rank >= p * n.
double quantile_sorted(const std::vector<double>& sorted, double p) {
  const std::size_t n = sorted.size();
  std::size_t idx = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n)));
  if (idx > 0) --idx;
  if (idx >= n) idx = n - 1;
  return sorted[idx];
}

std::vector<double> expansion_z_grid(double z_max, std::int64_t count, const std::string& sub) {
  std::vector<double> zs;
  for (std::int64_t i = 0; i < count; ++i) {
    if (sub == "even" && i % 2 != 0) continue;
    if (sub == "odd" && i % 2 != 1) continue;
    const double z = z_max * static_cast<double>(i + 1) / static_cast<double>(count);
    zs.push_back(z);
    zs.push_back(-z);
  }
  if (sub == "full") zs.push_back(0.0);
  return zs;
}

void push_gap_points(std::vector<GridPointDef>& out, const char* kind, const json& ns,
                     const json& ratios, double delta, double kappa) {
  for (const auto& nj : ns) {
    const std::int64_t N = nj.get<std::int64_t>();
    const double cap = slope_cap(N, delta, kappa);
    if (!(cap > 0.0)) continue;
    std::vector<std::int64_t> ts;
    for (const auto& rj : ratios) {
      const double r = rj.get<double>();
      const auto T = static_cast<std::int64_t>(static_cast<double>(N) * r);
      if (T >= 1 && static_cast<double>(T) / static_cast<double>(N) <= cap) ts.push_back(T);
    }
    const auto t_cap = static_cast<std::int64_t>(static_cast<double>(N) * cap);
    if (t_cap >= 1) ts.push_back(t_cap);
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    for (const std::int64_t T : ts) {
      std::vector<std::int64_t> ks{1, T / 2, T};
      std::sort(ks.begin(), ks.end());
      ks.erase(std::remove_if(ks.begin(), ks.end(), [](std::int64_t k) { return k < 1; }),
               ks.end());
      ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
      for (const std::int64_t k : ks) {
        GridPointDef def;
        def.labels = {{"kind", kind},
                      {"N", std::to_string(N)},
                      {"T", std::to_string(T)},
                      {"k", std::to_string(k)},
                      {"sub", "-"}};
        def.values = json{{"kind", kind}, {"N", N}, {"T", T}, {"k", k}};
        out.push_back(std::move(def));
      }
    }
  }
}

}  // namespace

std::vector<GridPointDef> experiment_grid(const ExperimentSpec& spec) {
  std::vector<GridPointDef> out;
  const json& g = spec.grid;
  switch (spec.name) {
    case ExperimentName::E1CouplingGap: {
      for (const auto& nj : g["N"]) {
        for (const auto& tj : g["theta"]) {
          GridPointDef def;
          const std::int64_t N = nj.get<std::int64_t>();
          const double theta = tj.get<double>();
          def.labels = {{"N", std::to_string(N)}, {"theta", format_double(theta)}};
          def.values = json{{"N", N}, {"theta", theta}, {"point", g["point"]}};
          out.push_back(std::move(def));
        }
      }
      break;
    }
    case ExperimentName::E2BwIdentity: {
      std::size_t case_idx = 0;
      for (const auto& c : g["cases"]) {
        for (int side = 1; side <= 2; ++side) {
          GridPointDef def;
          def.labels = {{"case", std::to_string(case_idx)},
                        {"n", std::to_string(c["n"].get<std::int64_t>())},
                        {"m", std::to_string(c["m"].get<std::int64_t>())},
                        {"alpha0", format_double(c["alpha0"].get<double>())},
                        {"alphas", join_numbers(c["alphas"])},
                        {"betas", join_numbers(c["betas"])},
                        {"side", std::to_string(side)}};
          def.values = c;
          def.values["side"] = side;
          def.values["case"] = case_idx;
          out.push_back(std::move(def));
        }
        ++case_idx;
      }
      break;
    }
    case ExperimentName::E3ThinTail: {
      GridPointDef def;
      const std::int64_t N = g["N"].get<std::int64_t>();
      const std::int64_t T = g["T"].get<std::int64_t>();
      def.labels = {{"N", std::to_string(N)}, {"T", std::to_string(T)}};
      def.values = json{{"N", N}, {"T", T}};
      out.push_back(std::move(def));
      break;
    }
    case ExperimentName::E4ShapeLemmas: {
      const double kappa = g["kappa"].get<double>();
      push_gap_points(out, "slope", g["slope_N"], g["ratios"], spec.delta, kappa);
      push_gap_points(out, "rect", g["slope_N"], g["rect_ratios"], spec.delta, kappa);
      for (const auto& nj : g["prop34_N"]) {
        const std::int64_t N = nj.get<std::int64_t>();
        GridPointDef def;
        def.labels = {{"kind", "prop34"},
                      {"N", std::to_string(N)},
                      {"T", "-"},
                      {"k", "-"},
                      {"sub", "-"}};
        def.values = json{{"kind", "prop34"}, {"N", N}, {"point", g["point"]}};
        out.push_back(std::move(def));
      }
      for (const char* sub : {"full", "even", "odd"}) {
        GridPointDef def;
        def.labels = {{"kind", "expansion"}, {"N", "-"}, {"T", "-"}, {"k", "-"}, {"sub", sub}};
        def.values = json{{"kind", "expansion"},
                          {"sub", sub},
                          {"z_max", g["z_max"]},
                          {"z_count", g["z_count"]}};
        out.push_back(std::move(def));
      }
      break;
    }
    case ExperimentName::E5StochDominance: {
      std::vector<double> thetas{0.0};
      for (const auto& th : g["thetas"]) thetas.push_back(th.get<double>());
      for (const double theta : thetas) {
        GridPointDef def;
        def.labels = {{"theta", format_double(theta)}};
        def.values = json{{"N", g["N"]}, {"T", g["T"]}, {"theta", theta}};
        out.push_back(std::move(def));
      }
      break;
    }
    case ExperimentName::E6LlnFluctuations: {
      for (const auto& nj : g["N"]) {
        const std::int64_t N = nj.get<std::int64_t>();
        GridPointDef def;
        def.labels = {{"N", std::to_string(N)}};
        def.values = json{{"N", N}};
        out.push_back(std::move(def));
      }
      break;
    }
    case ExperimentName::E7ExitVsIn: {
      const std::int64_t N = g["N"].get<std::int64_t>();
      const double m23 = std::pow(static_cast<double>(N), 2.0 / 3.0);
      for (const auto& sj : g["s_values"]) {
        for (const auto& tj : g["t_values"]) {
          const double s = sj.get<double>();
          const double t = tj.get<double>();
          const auto k = static_cast<std::int64_t>(t * m23);
          if (k < 1) continue;
          const auto r = static_cast<std::int64_t>(std::llround(s * m23));
          GridPointDef def;
          def.labels = {{"s", format_double(s)},
                        {"t", format_double(t)},
                        {"k", std::to_string(k)}};
          def.values = json{{"N", N},  {"s", s},      {"t", t},
                            {"k", k},  {"offset", r}, {"delta_scale", g["delta_scale"]}};
          out.push_back(std::move(def));
        }
      }
      break;
    }
    case ExperimentName::E8UniformUpperTail: {
      const std::int64_t N = g["N"].get<std::int64_t>();
      std::vector<double> slopes;
      for (const auto& sj : g["slopes"]) slopes.push_back(sj.get<double>());
      if (g["include_cap_slope"].get<bool>()) {
        slopes.push_back(slope_cap(N, spec.delta, g["kappa"].get<double>()));
      }
      std::vector<std::int64_t> ts;
      for (const double s : slopes) {
        const auto T = static_cast<std::int64_t>(static_cast<double>(N) * s);
        if (T >= 2 && T < N) ts.push_back(T);
      }
      std::sort(ts.begin(), ts.end());
      ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
      for (const std::int64_t T : ts) {
        GridPointDef def;
        def.labels = {{"N", std::to_string(N)}, {"T", std::to_string(T)}};
        def.values = json{{"N", N}, {"T", T}};
        out.push_back(std::move(def));
      }
      break;
    }
  }
  if (out.empty()) throw std::invalid_argument("experiment grid is empty");
  return out;
}

namespace {

std::vector<std::pair<std::string, double>> run_point(const ExperimentSpec& spec,
                                                      const GridPointDef& gp, SeedSpec seed) {
  const json& v = gp.values;
  switch (spec.name) {
    case ExperimentName::E1CouplingGap: {
      const std::int64_t N = v["N"].get<std::int64_t>();
      ScalingFrame fr = frame_for(spec, N);
      const ContinuumPoint pt = point_from(v["point"]);
      const LatticeCoords c = lattice_coords(fr, pt);
      PolymerParams params;
      params.alpha = spec.alpha;
      params.theta = v["theta"].get<double>();
      const GridExtent ext{c.x_tilde, c.y_tilde, c.s_tilde, c.t_tilde};
      const auto [full, half] = build_coupled_fields(params, ext, seed);
      const double hf = h_scaled(fr, ScaledVariant::FullDelta, full, pt);
      const double hh = h_scaled(fr, ScaledVariant::HalfDelta, half, pt);
      return {{"h_full", hf}, {"h_half", hh}, {"gap", std::fabs(hf - hh)}};
    }
    case ExperimentName::E2BwIdentity: {
      PolymerParams params;
      params.alpha = spec.alpha;
      params.bw_alpha0 = v["alpha0"].get<double>();
      params.bw_alphas = v["alphas"].get<std::vector<double>>();
      params.bw_betas = v["betas"].get<std::vector<double>>();
      const std::size_t n = params.bw_alphas.size();
      const std::size_t m = params.bw_betas.size();
      double lz;
      if (v["side"].get<int>() == 1) {
        const WeightField f = build_field(params, Geometry::BWRect, bw_rect_extent(n, m), seed);
        lz = log_partition(f, Variant::Full, {1, 1},
                           {static_cast<std::int64_t>(n + m + 1), static_cast<std::int64_t>(n)});
      } else {
        const WeightField f =
            build_field(params, Geometry::BWTrapezoid, bw_trapezoid_extent(n, m), seed);
        lz = log_point_to_line(f, n, m);
      }
      return {{"log_z", lz}};
    }
    case ExperimentName::E3ThinTail: {
      const std::int64_t N = v["N"].get<std::int64_t>();
      const std::int64_t T = v["T"].get<std::int64_t>();
      PolymerParams params;
      params.alpha = spec.alpha;
      const WeightField f = build_field(params, Geometry::FullRect, GridExtent{1, N, 1, T}, seed);
      return {{"log_z", log_partition(f, Variant::Full, {1, 1}, {N, T})}};
    }
    case ExperimentName::E4ShapeLemmas: {
      const ShapeContext ctx(spec.alpha);
      const double kappa = spec.grid["kappa"].get<double>();
      const std::string kind = v["kind"].get<std::string>();
      std::vector<std::pair<std::string, double>> obs = {
          {"margin", kNan}, {"lhs", kNan},      {"rhs", kNan}, {"c0", kNan},
          {"scaled", kNan}, {"c1", kNan},       {"c2", kNan},  {"c3", kNan},
          {"c4", kNan},     {"min_peak", kNan}, {"max_sym", kNan}};
      auto set = [&obs](const char* k, double val) {
        for (auto& [key, slot] : obs) {
          if (key == k) slot = val;
        }
      };
      if (kind == "slope" || kind == "rect") {
        const std::int64_t N = v["N"].get<std::int64_t>();
        const std::int64_t T = v["T"].get<std::int64_t>();
        const std::int64_t k = v["k"].get<std::int64_t>();
        const SlopeGapReport rep = kind == "slope"
                                       ? check_slope_gap(ctx, N, T, k, spec.delta, kappa)
                                       : check_rect_gap(ctx, N, T, k, spec.delta, kappa);
        set("margin", rep.margin);
        set("lhs", rep.lhs);
        set("rhs", rep.rhs);
        set("c0", rep.fitted_c0);
      } else if (kind == "prop34") {
        const std::int64_t N = v["N"].get<std::int64_t>();
        const ScalingFrame fr = frame_for(spec, N);
        const double margin = shape_inequality_margin(fr, spec.b, point_from(v["point"]));
        set("margin", margin);
        set("scaled", margin / std::pow(static_cast<double>(N), 1.0 / 3.0 + 2.0 * spec.delta));
      } else {
        const auto zs =
            expansion_z_grid(v["z_max"].get<double>(), v["z_count"].get<std::int64_t>(),
                             v["sub"].get<std::string>());
        const QuadExpansionReport rep = check_quadratic_expansion(ctx, zs);
        set("c1", rep.c1);
        set("c2", rep.c2);
        set("c3", rep.c3);
        set("c4", rep.c4);
        set("min_peak", rep.min_peak_gap);
        set("max_sym", rep.max_symmetry_gap);
      }
      return obs;
    }
    case ExperimentName::E5StochDominance: {
      PolymerParams params;
      params.alpha = spec.alpha;
      const double theta = v["theta"].get<double>();
      const double lz = log_partition_inhom(params, v["N"].get<std::int64_t>(),
                                            v["T"].get<std::int64_t>(), theta, seed);
      return {{"log_z", lz}};
    }
    case ExperimentName::E6LlnFluctuations: {
      const std::int64_t N = v["N"].get<std::int64_t>();
      PolymerParams params;
      params.alpha = spec.alpha;
      const WeightField f = build_field(params, Geometry::FullRect, GridExtent{1, N, 1, N}, seed);
      return {{"log_z", log_partition(f, Variant::Full, {1, 1}, {N, N})}};
    }
    case ExperimentName::E7ExitVsIn: {
      const std::int64_t N = v["N"].get<std::int64_t>();
      const std::int64_t k = v["k"].get<std::int64_t>();
      const std::int64_t r = v["offset"].get<std::int64_t>();
      const Endpoint a{-r, r};
      const Endpoint b{N, N};
      PolymerParams params;
      params.alpha = spec.alpha;
      const GridExtent ext{a.i, b.i, a.j, b.j};
      const WeightField f = build_field(params, Geometry::FullRect, ext, seed);
      const Parallelogram para{a, b, k};
      const double inside = log_partition_parallelogram(f, para, ParallelogramMode::Inside);
      const double exiting = log_partition_parallelogram(f, para, ParallelogramMode::Exiting);
      const double diff = exiting - inside;  // -inf when nothing exits
      const double margin =
          v["delta_scale"].get<double>() * std::pow(static_cast<double>(N), 1.0 / 3.0);
      return {{"log_in", inside},
              {"log_exit", exiting},
              {"diff", diff},
              {"exceed", diff >= -margin ? 1.0 : 0.0}};
    }
    case ExperimentName::E8UniformUpperTail: {
      const std::int64_t N = v["N"].get<std::int64_t>();
      const std::int64_t T = v["T"].get<std::int64_t>();
      PolymerParams params;
      params.alpha = spec.alpha;
      params.theta = spec.theta;
      const WeightField f =
          build_field(params, Geometry::HalfTrapezoid, GridExtent{1, N, 1, T}, seed);
      const double lz = log_partition(f, Variant::Half, {1, 1}, {N, T});
      const ShapeContext ctx(spec.alpha);
      const double centered =
          lz +
          static_cast<double>(N) * f_slope(ctx, static_cast<double>(T) / static_cast<double>(N));
      return {{"log_z", lz}, {"centered", centered}};
    }
  }
  throw std::logic_error("run_point: bad experiment");
}

}  // namespace

ExperimentRecord run_grid_point_replica(const ExperimentSpec& spec, std::size_t grid_index,
                                        std::int64_t replica) {
  const auto grid = experiment_grid(spec);
  if (grid_index >= grid.size()) throw std::out_of_range("grid index");
  const auto t0 = std::chrono::steady_clock::now();
  const SeedSpec seed{grid_seed(spec, grid_index), static_cast<std::uint32_t>(replica)};
  ExperimentRecord rec;
  rec.experiment = experiment_name(spec.name);
  rec.replica = replica;
  rec.seed = seed.master_seed;
  rec.grid_point = grid[grid_index].labels;
  rec.observables = run_point(spec, grid[grid_index], seed);
  rec.wall_time_ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0)
          .count();
  return rec;
}

namespace {

struct CompactRow {
  std::size_t grid_index = 0;
  std::int64_t replica = 0;
  std::vector<double> obs;
};

struct ObsIndex {
  std::vector<std::string> keys;

  std::size_t at(const std::string& k) const {
    for (std::size_t i = 0; i < keys.size(); ++i) {
      if (keys[i] == k) return i;
    }
    throw std::runtime_error("records missing observable \"" + k + "\"");
  }
};

std::vector<double> column_sorted(const std::vector<CompactRow>& rows, std::size_t obs_idx) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.obs[obs_idx]);
  std::sort(out.begin(), out.end());
  return out;
}

double mean_of(const std::vector<double>& xs) {
  double acc = 0.0;
  for (double x : xs) acc += x;
  return acc / static_cast<double>(xs.size());
}

bool stable_pair(double a, double b) {
  if (!std::isfinite(a) || !std::isfinite(b)) return false;
  const double scale = std::max(std::fabs(a), std::fabs(b));
  return scale == 0.0 || std::fabs(a - b) <= 0.2 * scale;
}

double label_number(const GridPointDef& def, const std::string& key) {
  for (const auto& [k, v] : def.labels) {
    if (k == key) return std::strtod(v.c_str(), nullptr);
  }
  throw std::runtime_error("grid label \"" + key + "\" not found");
}

std::string label_string(const GridPointDef& def, const std::string& key) {
  for (const auto& [k, v] : def.labels) {
    if (k == key) return v;
  }
  throw std::runtime_error("grid label \"" + key + "\" not found");
}

json summarize_e1(const std::vector<GridPointDef>& grid,
                  const std::vector<std::vector<CompactRow>>& by_grid, const ObsIndex& obs) {
  const std::size_t gap_idx = obs.at("gap");
  json points = json::array();
  std::map<std::string, std::vector<std::pair<std::int64_t, std::pair<double, double>>>> by_theta;
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    const auto gaps = column_sorted(by_grid[gi], gap_idx);
    const double med = quantile_sorted(gaps, 0.5);
    const double q99 = quantile_sorted(gaps, 0.99);
    const auto N = static_cast<std::int64_t>(label_number(grid[gi], "N"));
    const std::string theta = label_string(grid[gi], "theta");
    points.push_back(json{{"N", N},
                          {"theta", std::strtod(theta.c_str(), nullptr)},
                          {"median_gap", med},
                          {"q99_gap", q99},
                          {"replicas", gaps.size()}});
    by_theta[theta].push_back({N, {med, q99}});
  }
  bool ok = true;
  for (auto& [theta, seq] : by_theta) {
    std::sort(seq.begin(), seq.end());
    for (std::size_t i = 1; i < seq.size(); ++i) {
      if (seq[i].second.first > seq[i - 1].second.first) ok = false;
      if (seq[i].second.second > seq[i - 1].second.second) ok = false;
    }
  }
  return json{{"points", points}, {"monotone_in_N", ok}, {"verdict", ok}};
}

json summarize_e2(const std::vector<GridPointDef>& grid,
                  const std::vector<std::vector<CompactRow>>& by_grid, const ObsIndex& obs) {
  const std::size_t lz = obs.at("log_z");
  std::map<std::string, std::pair<std::size_t, std::size_t>> sides;
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    const std::string c = label_string(grid[gi], "case");
    if (label_string(grid[gi], "side") == "1") {
      sides[c].first = gi;
    } else {
      sides[c].second = gi;
    }
  }
  json cases = json::array();
  bool ok = true;
  for (const auto& [c, pair_gi] : sides) {
    Sample s1;
    Sample s2;
    for (const auto& r : by_grid[pair_gi.first]) s1.values.push_back(r.obs[lz]);
    for (const auto& r : by_grid[pair_gi.second]) s2.values.push_back(r.obs[lz]);
    const auto ks = ks_two_sample(s1, s2);
    const double thr = ks.threshold_at(0.01);
    const double m1 = s1.mean();
    const double m2 = s2.mean();
    const double v1 = s1.variance();
    const double v2 = s2.variance();
    const double n1 = static_cast<double>(s1.values.size());
    const double n2 = static_cast<double>(s2.values.size());
    const double se_mean = std::sqrt(v1 / n1 + v2 / n2);
    const double se_var =
        std::sqrt((s1.fourth_central() - v1 * v1) / n1 + (s2.fourth_central() - v2 * v2) / n2);
    const bool ks_ok = ks.d < thr;
    const bool mean_ok = std::fabs(m1 - m2) <= 3.0 * se_mean;
    const bool var_ok = std::fabs(v1 - v2) <= 3.0 * se_var;
    ok = ok && ks_ok && mean_ok && var_ok;
    cases.push_back(json{{"case", c},
                         {"n_point", s1.values.size()},
                         {"n_line", s2.values.size()},
                         {"ks_d", ks.d},
                         {"ks_threshold_1pct", thr},
                         {"ks_ok", ks_ok},
                         {"mean_point", m1},
                         {"mean_line", m2},
                         {"mean_ok", mean_ok},
                         {"var_point", v1},
                         {"var_line", v2},
                         {"var_ok", var_ok}});
  }
  return json{{"cases", cases}, {"verdict", ok}};
}

json summarize_e3(const ExperimentSpec& spec, const std::vector<GridPointDef>& grid,
                  const std::vector<std::vector<CompactRow>>& by_grid, const ObsIndex& obs) {
  const std::size_t lz = obs.at("log_z");
  const auto N = static_cast<std::int64_t>(label_number(grid[0], "N"));
  const auto T = static_cast<std::int64_t>(label_number(grid[0], "T"));
  const auto lambda_grid = static_cast<std::size_t>(spec.grid["lambda_grid"].get<std::int64_t>());
  const auto n_thresholds = spec.grid["thresholds"].get<std::int64_t>();

  Sample sample;
  for (const auto& r : by_grid[0]) sample.values.push_back(r.obs[lz]);
  std::vector<double> sorted = sample.values;
  std::sort(sorted.begin(), sorted.end());
  const double lo = quantile_sorted(sorted, 0.5);
  const double sd = std::sqrt(sample.variance());
  const double hi = sorted.back() + 2.0 * sd;
  std::vector<double> thresholds;
  for (std::int64_t i = 0; i < n_thresholds; ++i) {
    thresholds.push_back(lo + (hi - lo) * static_cast<double>(i) /
                                  static_cast<double>(n_thresholds - 1));
  }
  const TailCurve tail = empirical_tail(sample, thresholds);
  json points = json::array();
  bool ok = true;
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    const auto bound = chernoff_bound_thin_min(spec.alpha, N, T, thresholds[i], lambda_grid);
    const bool point_ok = tail.exceed_prob[i] <= bound.bound + 2.0 * tail.ci_half_width[i];
    ok = ok && point_ok;
    points.push_back(json{{"u", thresholds[i]},
                          {"empirical", tail.exceed_prob[i]},
                          {"ci_half_width", tail.ci_half_width[i]},
                          {"bound", bound.bound},
                          {"lambda", bound.lambda},
                          {"ok", point_ok}});
  }
  return json{{"N", N}, {"T", T}, {"points", points}, {"verdict", ok}};
}

json summarize_e4(const std::vector<GridPointDef>& grid,
                  const std::vector<std::vector<CompactRow>>& by_grid, const ObsIndex& obs) {
  const std::size_t margin_i = obs.at("margin");
  const std::size_t c0_i = obs.at("c0");
  const std::size_t scaled_i = obs.at("scaled");

  struct KindAgg {
    std::vector<double> margins;
    std::vector<double> c0s;
    std::vector<double> scaleds;
    std::vector<double> ns;
  };
  std::map<std::string, KindAgg> agg;
  std::map<std::string, std::vector<double>> expansion;
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    const std::string kind = label_string(grid[gi], "kind");
    const auto& row = by_grid[gi].front();
    if (kind == "expansion") {
      expansion[label_string(grid[gi], "sub")] = {
          row.obs[obs.at("c1")], row.obs[obs.at("c2")],       row.obs[obs.at("c3")],
          row.obs[obs.at("c4")], row.obs[obs.at("min_peak")], row.obs[obs.at("max_sym")]};
      continue;
    }
    auto& a = agg[kind];
    a.margins.push_back(row.obs[margin_i]);
    a.c0s.push_back(row.obs[c0_i]);
    a.scaleds.push_back(row.obs[scaled_i]);
    a.ns.push_back(label_number(grid[gi], "N"));
  }

  auto min_of = [](const std::vector<double>& xs) {
    double m = std::numeric_limits<double>::infinity();
    for (double x : xs) m = std::min(m, x);
    return m;
  };
  auto split_min = [&min_of](const std::vector<double>& xs) {
    std::vector<double> even;
    std::vector<double> odd;
    for (std::size_t i = 0; i < xs.size(); ++i) (i % 2 == 0 ? even : odd).push_back(xs[i]);
    return std::pair{min_of(even), min_of(odd)};
  };

  json details;
  bool ok = true;
  for (const char* kind : {"slope", "rect"}) {
    const auto& a = agg[kind];
    if (a.margins.empty()) throw std::runtime_error("E4: no grid points for a lemma");
    const double min_margin = min_of(a.margins);
    const double fitted_c0 = min_of(a.c0s);
    const auto [even_min, odd_min] = split_min(a.c0s);
    const bool margins_pos = min_margin > 0.0;
    const bool stable = stable_pair(even_min, odd_min);
    ok = ok && margins_pos && stable;
    details[kind] = json{{"points", a.margins.size()},
                         {"min_margin", min_margin},
                         {"fitted_c0", fitted_c0},
                         {"c0_even_half", even_min},
                         {"c0_odd_half", odd_min},
                         {"stable", stable},
                         {"margins_positive", margins_pos}};
  }
  {
    const auto& a = agg["prop34"];
    if (a.margins.empty()) throw std::runtime_error("E4: no shape-inequality grid points");
    const double min_margin = min_of(a.margins);
    const double fitted = min_of(a.scaleds);
    const auto [even_min, odd_min] = split_min(a.scaleds);
    const auto growth = fit_exponent(a.ns, a.margins);
    const bool margins_pos = min_margin > 0.0;
    const bool stable = stable_pair(even_min, odd_min);
    const bool grows = growth.slope > 0.0;
    ok = ok && margins_pos && stable && grows;
    details["shape_inequality"] = json{{"points", a.margins.size()},
                                       {"min_margin", min_margin},
                                       {"fitted_gap_constant", fitted},
                                       {"gap_even_half", even_min},
                                       {"gap_odd_half", odd_min},
                                       {"growth_exponent", growth.slope},
                                       {"growth_stderr", growth.stderr_slope},
                                       {"stable", stable},
                                       {"margins_positive", margins_pos}};
  }
  {
    if (!expansion.contains("full") || !expansion.contains("even") ||
        !expansion.contains("odd")) {
      throw std::runtime_error("E4: missing expansion grid points");
    }
    const auto& full = expansion["full"];
    const auto& even = expansion["even"];
    const auto& odd = expansion["odd"];
    bool finite = true;
    for (int i = 0; i < 4; ++i) finite = finite && std::isfinite(full[i]);
    const bool peak_ok = full[4] >= -1e-12 && even[4] >= -1e-12 && odd[4] >= -1e-12;
    const bool sym_ok = full[5] <= 1e-10;
    bool stable = true;
    for (int i = 0; i < 4; ++i) stable = stable && stable_pair(even[i], odd[i]);
    ok = ok && finite && peak_ok && sym_ok && stable;
    details["expansion"] = json{{"c1", full[0]},
                                {"c2", full[1]},
                                {"c3", full[2]},
                                {"c4", full[3]},
                                {"min_peak_gap", full[4]},
                                {"max_symmetry_gap", full[5]},
                                {"stable", stable},
                                {"peak_ok", peak_ok},
                                {"symmetry_ok", sym_ok}};
  }
  details["verdict"] = ok;
  return details;
}

json summarize_e5(const std::vector<GridPointDef>& grid,
                  const std::vector<std::vector<CompactRow>>& by_grid, const ObsIndex& obs) {
  const std::size_t lz = obs.at("log_z");
  std::size_t base_gi = grid.size();
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    if (label_number(grid[gi], "theta") == 0.0) base_gi = gi;
  }
  if (base_gi == grid.size()) throw std::runtime_error("E5: missing theta = 0 baseline");
  const auto base = column_sorted(by_grid[base_gi], lz);
  json points = json::array();
  bool ok = true;
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    if (gi == base_gi) continue;
    const auto tilted = column_sorted(by_grid[gi], lz);
    // One-sided excess of the baseline cdf over the tilted cdf; dominance of
    // the baseline in law keeps it within the null band.
    const double n = static_cast<double>(base.size());
    const double m = static_cast<double>(tilted.size());
    std::size_t ib = 0;
    std::size_t it = 0;
    double excess = 0.0;
    while (ib < base.size() && it < tilted.size()) {
      const double x = std::min(base[ib], tilted[it]);
      while (ib < base.size() && base[ib] <= x) ++ib;
      while (it < tilted.size() && tilted[it] <= x) ++it;
      excess = std::max(excess, static_cast<double>(ib) / n - static_cast<double>(it) / m);
    }
    const double band = std::sqrt(0.5 * std::log(2.0 / 0.01)) * std::sqrt((n + m) / (n * m));
    const bool point_ok = excess <= band;
    ok = ok && point_ok;
    points.push_back(json{{"theta", label_number(grid[gi], "theta")},
                          {"max_cdf_excess", excess},
                          {"band", band},
                          {"ok", point_ok}});
  }
  return json{{"points", points}, {"verdict", ok}};
}

json summarize_e6(const ExperimentSpec& spec, const std::vector<GridPointDef>& grid,
                  const std::vector<std::vector<CompactRow>>& by_grid, const ObsIndex& obs) {
  const std::size_t lz = obs.at("log_z");
  std::vector<double> ns;
  std::vector<double> vars;
  json points = json::array();
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    const double N = label_number(grid[gi], "N");
    Sample s;
    for (const auto& r : by_grid[gi]) s.values.push_back(r.obs[lz]);
    const double var = s.variance();
    const double centered_scaled = (s.mean() + 2.0 * N * digamma(spec.alpha)) / std::cbrt(N);
    ns.push_back(N);
    vars.push_back(var);
    points.push_back(json{{"N", static_cast<std::int64_t>(N)},
                          {"var_log_z", var},
                          {"mean_centered_over_cbrt_N", centered_scaled},
                          {"replicas", s.values.size()}});
  }
  const auto fit = fit_exponent(ns, vars);
  const bool ok = fit.slope >= 0.5 && fit.slope <= 0.85;
  return json{{"points", points},
              {"var_exponent", fit.slope},
              {"var_exponent_stderr", fit.stderr_slope},
              {"verdict", ok}};
}

json summarize_e7(const std::vector<GridPointDef>& grid,
                  const std::vector<std::vector<CompactRow>>& by_grid, const ObsIndex& obs) {
  const std::size_t ex = obs.at("exceed");
  std::map<std::string, std::vector<std::pair<std::int64_t, double>>> by_s;
  json points = json::array();
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    std::vector<double> flags;
    for (const auto& r : by_grid[gi]) flags.push_back(r.obs[ex]);
    const double p = mean_of(flags);
    const auto k = static_cast<std::int64_t>(label_number(grid[gi], "k"));
    by_s[label_string(grid[gi], "s")].push_back({k, p});
    points.push_back(json{{"s", label_number(grid[gi], "s")},
                          {"t", label_number(grid[gi], "t")},
                          {"k", k},
                          {"exceed_prob", p},
                          {"replicas", flags.size()}});
  }
  bool ok = true;
  for (auto& [s, seq] : by_s) {
    std::sort(seq.begin(), seq.end());
    for (std::size_t i = 1; i < seq.size(); ++i) {
      if (seq[i].second > seq[i - 1].second) ok = false;
    }
  }
  return json{{"points", points}, {"monotone_in_k", ok}, {"verdict", ok}};
}

json summarize_e8(const ExperimentSpec& spec, const std::vector<GridPointDef>& grid,
                  const std::vector<std::vector<CompactRow>>& by_grid, const ObsIndex& obs) {
  const std::size_t cen = obs.at("centered");
  const double x_max = spec.grid["x_max"].get<double>();
  const auto x_count = spec.grid["x_count"].get<std::int64_t>();
  json curves = json::array();
  bool ok = true;
  double c_min = std::numeric_limits<double>::infinity();
  struct CurvePoint {
    double x;
    double p;
  };
  std::vector<std::vector<CurvePoint>> all_curves;
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    const double N = label_number(grid[gi], "N");
    const double T = label_number(grid[gi], "T");
    Sample s;
    for (const auto& r : by_grid[gi]) s.values.push_back(r.obs[cen]);
    std::vector<double> thresholds;
    std::vector<double> xs;
    for (std::int64_t i = 0; i < x_count; ++i) {
      const double x = x_max * static_cast<double>(i) / static_cast<double>(x_count - 1);
      xs.push_back(x);
      thresholds.push_back(x * std::cbrt(N));
    }
    const TailCurve tail = empirical_tail(s, thresholds);
    // least squares of ln p on x^2 over the strictly positive tail points
    double sxx = 0.0;
    double sxy = 0.0;
    double sx = 0.0;
    double sy = 0.0;
    double cnt = 0.0;
    std::vector<CurvePoint> curve;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      curve.push_back({xs[i], tail.exceed_prob[i]});
      if (xs[i] <= 0.0 || tail.exceed_prob[i] <= 0.0) continue;
      const double u = xs[i] * xs[i];
      const double w = std::log(tail.exceed_prob[i]);
      sx += u;
      sy += w;
      sxx += u * u;
      sxy += u * w;
      cnt += 1.0;
    }
    bool fit_ok = cnt >= 3.0;
    double c = kNan;
    if (fit_ok) {
      const double det = cnt * sxx - sx * sx;
      fit_ok = det > 0.0;
      if (fit_ok) {
        c = -(cnt * sxy - sx * sy) / det;
        c_min = std::min(c_min, c);
      }
    }
    ok = ok && fit_ok;
    all_curves.push_back(curve);
    json jc;
    jc["N"] = static_cast<std::int64_t>(N);
    jc["T"] = static_cast<std::int64_t>(T);
    jc["slope"] = T / N;
    jc["decay_rate"] = c;
    jc["x"] = xs;
    jc["exceed_prob"] = tail.exceed_prob;
    curves.push_back(jc);
  }
  ok = ok && c_min > 0.0;
  double envelope_c = 0.0;
  if (ok) {
    for (const auto& curve : all_curves) {
      for (const auto& pt : curve) {
        envelope_c = std::max(envelope_c, pt.p * std::exp(c_min * pt.x * pt.x));
      }
    }
  }
  return json{{"curves", curves},
              {"gaussian_decay_rate", ok ? json(c_min) : json(nullptr)},
              {"envelope_constant", ok ? json(envelope_c) : json(nullptr)},
              {"verdict", ok}};
}

json summarize_compact(const ExperimentSpec& spec, const std::vector<GridPointDef>& grid,
                       const std::vector<std::vector<CompactRow>>& by_grid,
                       const ObsIndex& obs) {
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    if (by_grid[gi].empty()) {
      ExperimentRecord probe;
      probe.grid_point = grid[gi].labels;
      throw std::runtime_error("no records for grid point \"" + grid_key(probe) + "\"");
    }
  }
  json summary;
  switch (spec.name) {
    case ExperimentName::E1CouplingGap:
      summary = summarize_e1(grid, by_grid, obs);
      break;
    case ExperimentName::E2BwIdentity:
      summary = summarize_e2(grid, by_grid, obs);
      break;
    case ExperimentName::E3ThinTail:
      summary = summarize_e3(spec, grid, by_grid, obs);
      break;
    case ExperimentName::E4ShapeLemmas:
      summary = summarize_e4(grid, by_grid, obs);
      break;
    case ExperimentName::E5StochDominance:
      summary = summarize_e5(grid, by_grid, obs);
      break;
    case ExperimentName::E6LlnFluctuations:
      summary = summarize_e6(spec, grid, by_grid, obs);
      break;
    case ExperimentName::E7ExitVsIn:
      summary = summarize_e7(grid, by_grid, obs);
      break;
    case ExperimentName::E8UniformUpperTail:
      summary = summarize_e8(spec, grid, by_grid, obs);
      break;
  }
  summary["experiment"] = experiment_name(spec.name);
  summary["replicas"] = spec.replicas;
  summary["master_seed"] = spec.master_seed;
  return summary;
}

std::map<std::string, std::size_t> grid_key_index(const std::vector<GridPointDef>& grid) {
  std::map<std::string, std::size_t> out;
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    ExperimentRecord probe;
    probe.grid_point = grid[gi].labels;
    out[grid_key(probe)] = gi;
  }
  return out;
}

std::filesystem::path records_path_for(const ExperimentSpec& spec,
                                       const std::filesystem::path& out_dir) {
  return out_dir / (std::string(experiment_name(spec.name)) + ".records.csv");
}

}  // namespace

json summarize_records(const ExperimentSpec& spec,
                       const std::vector<ExperimentRecord>& records) {
  const auto grid = experiment_grid(spec);
  const auto key_index = grid_key_index(grid);
  if (records.empty()) throw std::runtime_error("summarize_records: no records");
  ObsIndex obs;
  for (const auto& [k, v] : records.front().observables) obs.keys.push_back(k);
  std::vector<std::vector<CompactRow>> by_grid(grid.size());
  for (const auto& rec : records) {
    const auto it = key_index.find(grid_key(rec));
    if (it == key_index.end()) {
      throw std::runtime_error("record grid point does not match the config grid");
    }
    CompactRow row;
    row.grid_index = it->second;
    row.replica = rec.replica;
    for (const auto& [k, v] : rec.observables) row.obs.push_back(v);
    by_grid[it->second].push_back(std::move(row));
  }
  return summarize_compact(spec, grid, by_grid, obs);
}

ExperimentOutcome run_experiment(const ExperimentSpec& spec, const RunOptions& options) {
  const auto grid = experiment_grid(spec);
  const auto key_index = grid_key_index(grid);
  std::filesystem::create_directories(options.out_dir);
  const auto rec_path = records_path_for(spec, options.out_dir);

  // A prototype row pins the CSV schema for this experiment.
  ExperimentRecord proto;
  proto.experiment = experiment_name(spec.name);
  proto.grid_point = grid[0].labels;
  proto.observables = run_point(spec, grid[0], SeedSpec{grid_seed(spec, 0), 0});
  const std::string header = records_csv_header(proto);

  ObsIndex obs;
  for (const auto& [k, v] : proto.observables) obs.keys.push_back(k);

  std::vector<std::vector<CompactRow>> by_grid(grid.size());
  std::vector<std::vector<char>> done(grid.size());
  for (auto& d : done) d.assign(static_cast<std::size_t>(spec.replicas), 0);

  bool had_file = false;
  if (std::filesystem::exists(rec_path)) {
    std::ifstream in(rec_path);
    std::string existing_header;
    std::getline(in, existing_header);
    existing_header += '\n';
    if (existing_header != header) {
      throw std::runtime_error("records file " + rec_path.string() +
                               " does not match this config's schema");
    }
    in.seekg(0);
    for_each_record_csv(in, [&](ExperimentRecord&& rec) {
      const auto it = key_index.find(grid_key(rec));
      if (it == key_index.end()) {
        throw std::runtime_error("records file contains a grid point not in this config");
      }
      if (rec.replica < 0 || rec.replica >= spec.replicas) {
        throw std::runtime_error("records file contains replicas beyond this config");
      }
      if (done[it->second][static_cast<std::size_t>(rec.replica)]) {
        throw std::runtime_error("records file contains duplicate (grid point, replica) rows");
      }
      done[it->second][static_cast<std::size_t>(rec.replica)] = 1;
      CompactRow row;
      row.grid_index = it->second;
      row.replica = rec.replica;
      for (const auto& [k, v] : rec.observables) row.obs.push_back(v);
      by_grid[it->second].push_back(std::move(row));
    });
    had_file = true;
  }

  std::ofstream out(rec_path, std::ios::app);
  if (!out) throw std::runtime_error("cannot open " + rec_path.string() + " for append");
  if (!had_file) out << header;

  const unsigned workers =
      options.workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : options.workers;
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    std::vector<std::int64_t> todo;
    for (std::int64_t r = 0; r < spec.replicas; ++r) {
      if (!done[gi][static_cast<std::size_t>(r)]) todo.push_back(r);
    }
    if (todo.empty()) continue;
    std::vector<std::string> lines(todo.size());
    std::vector<CompactRow> rows(todo.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mu;
    auto worker = [&]() {
      for (;;) {
        const std::size_t idx = next.fetch_add(1);
        if (idx >= todo.size()) return;
        try {
          const std::int64_t replica = todo[idx];
          const auto t0 = std::chrono::steady_clock::now();
          const SeedSpec seed{grid_seed(spec, gi), static_cast<std::uint32_t>(replica)};
          ExperimentRecord rec;
          rec.experiment = experiment_name(spec.name);
          rec.replica = replica;
          rec.seed = seed.master_seed;
          rec.grid_point = grid[gi].labels;
          rec.observables = run_point(spec, grid[gi], seed);
          rec.wall_time_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                 std::chrono::steady_clock::now() - t0)
                                 .count();
          lines[idx] = record_csv_line(rec);
          CompactRow row;
          row.grid_index = gi;
          row.replica = replica;
          for (const auto& [k, v] : rec.observables) row.obs.push_back(v);
          rows[idx] = std::move(row);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    };
    std::vector<std::thread> pool;
    const auto n_threads =
        static_cast<unsigned>(std::min<std::size_t>(workers, todo.size()));
    for (unsigned w = 0; w < n_threads; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
    for (std::size_t idx = 0; idx < todo.size(); ++idx) {
      out << lines[idx];
      by_grid[gi].push_back(std::move(rows[idx]));
    }
    out.flush();
    if (!out) throw std::runtime_error("write failure on " + rec_path.string());
  }
  out.close();

  ExperimentOutcome outcome;
  outcome.summary = summarize_compact(spec, grid, by_grid, obs);
  outcome.verdict = outcome.summary["verdict"].get<bool>();
  outcome.records_path = rec_path;
  outcome.summary_path =
      options.out_dir / (std::string(experiment_name(spec.name)) + ".summary.json");
  outcome.config_path =
      options.out_dir / (std::string(experiment_name(spec.name)) + ".config.json");
  {
    std::ofstream sf(outcome.summary_path);
    sf << outcome.summary.dump(2) << '\n';
    std::ofstream cf(outcome.config_path);
    cf << emit_config(spec).dump(2) << '\n';
  }
  return outcome;
}

ExperimentOutcome report_experiment(const ExperimentSpec& spec,
                                    const std::filesystem::path& out_dir) {
  const auto grid = experiment_grid(spec);
  const auto key_index = grid_key_index(grid);
  const auto rec_path = records_path_for(spec, out_dir);
  std::ifstream in(rec_path);
  if (!in) throw std::runtime_error("cannot open " + rec_path.string());
  std::vector<std::vector<CompactRow>> by_grid(grid.size());
  ObsIndex obs;
  for_each_record_csv(in, [&](ExperimentRecord&& rec) {
    if (obs.keys.empty()) {
      for (const auto& [k, v] : rec.observables) obs.keys.push_back(k);
    }
    const auto it = key_index.find(grid_key(rec));
    if (it == key_index.end()) {
      throw std::runtime_error("records file contains a grid point not in this config");
    }
    CompactRow row;
    row.grid_index = it->second;
    row.replica = rec.replica;
    for (const auto& [k, v] : rec.observables) row.obs.push_back(v);
    by_grid[it->second].push_back(std::move(row));
  });

  ExperimentOutcome outcome;
  outcome.summary = summarize_compact(spec, grid, by_grid, obs);
  outcome.verdict = outcome.summary["verdict"].get<bool>();
  outcome.records_path = rec_path;
  outcome.summary_path = out_dir / (std::string(experiment_name(spec.name)) + ".summary.json");
  outcome.config_path = out_dir / (std::string(experiment_name(spec.name)) + ".config.json");
  std::ofstream sf(outcome.summary_path);
  sf << outcome.summary.dump(2) << '\n';
  return outcome;
}

}  // namespace polymerlab
