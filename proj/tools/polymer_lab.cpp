#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "polymerlab/config.hpp"
#include "polymerlab/experiments.hpp"
#include "polymerlab/log_arith.hpp"
#include "polymerlab/polymer.hpp"
#include "polymerlab/records.hpp"
#include "polymerlab/sampling.hpp"
#include "polymerlab/shape_function.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace polymerlab;

namespace {

json number_or_marker(double v) {
  if (std::isfinite(v)) return v;
  return is_log_zero(v) ? json("-inf") : json(nullptr);
}

int cmd_run(const std::string& config_path, const std::string& out_dir, unsigned workers) {
  ExperimentSpec spec = parse_config_file(config_path);
  if (const char* env = std::getenv("POLYMER_LAB_SEED")) {
    spec.master_seed = std::strtoull(env, nullptr, 10);
  }
  RunOptions options;
  options.out_dir = out_dir;
  options.workers = workers;
  const ExperimentOutcome outcome = run_experiment(spec, options);
  std::cout << experiment_name(spec.name) << ": " << (outcome.verdict ? "PASS" : "FAIL") << "\n"
            << "records: " << outcome.records_path.string() << "\n"
            << "summary: " << outcome.summary_path.string() << "\n";
  return outcome.verdict ? 0 : 1;
}

int cmd_report(const std::string& in_dir, const std::string& only) {
  std::vector<fs::path> configs;
  for (const auto& entry : fs::directory_iterator(in_dir)) {
    const std::string name = entry.path().filename().string();
    if (!name.ends_with(".config.json")) continue;
    if (!only.empty() && name != only + ".config.json") continue;
    configs.push_back(entry.path());
  }
  if (configs.empty()) {
    std::cerr << "report: no matching *.config.json under " << in_dir << "\n";
    return 2;
  }
  std::sort(configs.begin(), configs.end());
  bool all_ok = true;
  for (const auto& cfg : configs) {
    const ExperimentSpec spec = parse_config_file(cfg);
    const ExperimentOutcome outcome = report_experiment(spec, in_dir);
    all_ok = all_ok && outcome.verdict;
    std::cout << experiment_name(spec.name) << ": " << (outcome.verdict ? "PASS" : "FAIL")
              << "\n";
  }
  return all_ok ? 0 : 1;
}

int cmd_shape_table(double alpha, double from, double to, int steps,
                    const std::string& out_path) {
  const ShapeContext ctx(alpha);
  std::ostream* os = &std::cout;
  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) {
      std::cerr << "shape table: cannot open " << out_path << "\n";
      return 2;
    }
    os = &file;
  }
  (*os) << "x,g_inverse,f,F,f_prime\n";
  for (int i = 0; i < steps; ++i) {
    const double x = steps == 1 ? from : from + (to - from) * static_cast<double>(i) / (steps - 1);
    const double zeta = g_inverse(ctx, x);
    (*os) << format_double(x) << ',' << format_double(zeta) << ','
          << format_double(f_slope(ctx, x)) << ',' << format_double(shape_F(ctx, zeta)) << ','
          << format_double(f_prime(ctx, x)) << "\n";
  }
  return 0;
}

struct DpArgs {
  std::string variant = "full";
  double alpha = 0.5;
  double theta = 0.0;
  std::int64_t N = 4;
  std::int64_t T = 4;
  std::uint64_t seed = 1;
  std::uint32_t replica = 0;
  std::int64_t k = 1;
  std::int64_t from_i = 1;
  std::int64_t from_j = 1;
  std::int64_t to_i = 0;  // 0 = default (N, T)
  std::int64_t to_j = 0;
  double bw_alpha0 = 0.3;
  std::vector<double> bw_alphas;
  std::vector<double> bw_betas;
  std::string dump_field;
};

int cmd_dp(const DpArgs& a) {
  PolymerParams params;
  params.alpha = a.alpha;
  params.theta = a.theta;
  params.bw_alpha0 = a.bw_alpha0;
  params.bw_alphas = a.bw_alphas;
  params.bw_betas = a.bw_betas;
  const SeedSpec seed{a.seed, a.replica};
  const Endpoint from{a.from_i, a.from_j};
  const Endpoint to{a.to_i == 0 ? a.N : a.to_i, a.to_j == 0 ? a.T : a.to_j};

  json out;
  out["variant"] = a.variant;
  out["alpha"] = a.alpha;
  out["theta"] = a.theta;
  out["seed"] = a.seed;

  auto dump_if_asked = [&](const WeightField& f) {
    if (a.dump_field.empty()) return;
    std::ofstream df(a.dump_field);
    dump_field_csv(f, df);
    out["field_dump"] = a.dump_field;
  };

  if (a.variant == "full" || a.variant == "exit") {
    const WeightField f =
        build_field(params, Geometry::FullRect, GridExtent{from.i, to.i, from.j, to.j}, seed);
    dump_if_asked(f);
    const Variant v = a.variant == "full" ? Variant::Full : Variant::Exit;
    out["log_z"] = number_or_marker(log_partition(f, v, from, to));
  } else if (a.variant == "half" || a.variant == "in" || a.variant == "boundary") {
    const WeightField f = build_field(params, Geometry::HalfTrapezoid,
                                      GridExtent{from.i, to.i, from.j, to.j}, seed);
    dump_if_asked(f);
    const Variant v =
        a.variant == "half" ? Variant::Half : (a.variant == "in" ? Variant::In : Variant::Boundary);
    out["log_z"] = number_or_marker(log_partition(f, v, from, to));
  } else if (a.variant == "in_parallelogram" || a.variant == "exit_parallelogram") {
    const WeightField f =
        build_field(params, Geometry::FullRect, GridExtent{from.i, to.i, from.j, to.j}, seed);
    dump_if_asked(f);
    const Parallelogram para{from, to, a.k};
    const auto mode =
        a.variant == "in_parallelogram" ? ParallelogramMode::Inside : ParallelogramMode::Exiting;
    out["k"] = a.k;
    out["log_z"] = number_or_marker(log_partition_parallelogram(f, para, mode));
  } else if (a.variant == "point_to_line") {
    if (a.bw_alphas.empty()) {
      std::cerr << "dp: point_to_line requires --bw-alphas (and --bw-betas)\n";
      return 2;
    }
    const std::size_t n = a.bw_alphas.size();
    const std::size_t m = a.bw_betas.size();
    const WeightField f =
        build_field(params, Geometry::BWTrapezoid, bw_trapezoid_extent(n, m), seed);
    dump_if_asked(f);
    out["n"] = n;
    out["m"] = m;
    out["log_z"] = number_or_marker(log_point_to_line(f, n, m));
  } else if (a.variant == "inhom_full") {
    const WeightField f = build_inhom_field(params, a.N, a.T, a.theta, seed);
    dump_if_asked(f);
    out["log_z"] = number_or_marker(log_partition(f, Variant::Full, {1, 1}, {a.N, a.T}));
  } else {
    std::cerr << "dp: unknown variant \"" << a.variant << "\"\n";
    return 2;
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"half-space and full-space log-gamma polymer laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "runs";
  unsigned workers = 0;
  auto* run = app.add_subcommand("run", "run an experiment from a JSON config");
  run->add_option("--config", config_path, "config file")->required();
  run->add_option("--workers", workers, "worker threads (0 = hardware)");
  run->add_option("--out", out_dir, "output directory");

  std::string in_dir;
  std::string only;
  auto* report = app.add_subcommand("report", "re-derive summaries from stored records");
  report->add_option("--in", in_dir, "directory with records and config echoes")->required();
  report->add_option("--experiment", only, "restrict to one experiment name");

  auto* shape = app.add_subcommand("shape", "deterministic shape-function utilities");
  double alpha = 0.5;
  double from = 0.1;
  double to = 2.0;
  int steps = 20;
  std::string table_out;
  auto* table = shape->add_subcommand("table", "emit x, g_inverse, f, F, f_prime as CSV");
  table->add_option("--alpha", alpha, "bulk half-parameter")->required();
  table->add_option("--from", from, "first slope value")->required();
  table->add_option("--to", to, "last slope value")->required();
  table->add_option("--steps", steps, "number of rows")->required();
  table->add_option("--out", table_out, "write CSV here instead of stdout");
  shape->require_subcommand(1);

  DpArgs dp;
  auto* dpc = app.add_subcommand("dp", "one partition-function evaluation as JSON");
  dpc->add_option("--variant", dp.variant,
                  "full|half|in|boundary|exit|in_parallelogram|exit_parallelogram|"
                  "point_to_line|inhom_full");
  dpc->add_option("--alpha", dp.alpha, "bulk half-parameter");
  dpc->add_option("--theta", dp.theta, "boundary tilt");
  dpc->add_option("--N", dp.N, "end column");
  dpc->add_option("--T", dp.T, "end row");
  dpc->add_option("--seed", dp.seed, "master seed");
  dpc->add_option("--replica", dp.replica, "replica index");
  dpc->add_option("--k", dp.k, "parallelogram half-width");
  dpc->add_option("--from-i", dp.from_i, "start column");
  dpc->add_option("--from-j", dp.from_j, "start row");
  dpc->add_option("--to-i", dp.to_i, "end column override");
  dpc->add_option("--to-j", dp.to_j, "end row override");
  dpc->add_option("--bw-alpha0", dp.bw_alpha0, "corner parameter");
  dpc->add_option("--bw-alphas", dp.bw_alphas, "row parameters")->delimiter(',');
  dpc->add_option("--bw-betas", dp.bw_betas, "column parameters")->delimiter(',');
  dpc->add_option("--dump-field", dp.dump_field, "write the sampled field as CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, out_dir, workers);
    if (report->parsed()) return cmd_report(in_dir, only);
    if (shape->parsed()) return cmd_shape_table(alpha, from, to, steps, table_out);
    if (dpc->parsed()) return cmd_dp(dp);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
