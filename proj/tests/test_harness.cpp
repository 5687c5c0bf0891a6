#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "doctest.h"
#include "json.hpp"
#include "polymerlab/config.hpp"
#include "polymerlab/experiments.hpp"
#include "polymerlab/records.hpp"
#include "polymerlab/shape_function.hpp"

using namespace polymerlab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Temp dir per test, removed on scope exit.
struct TempDir {
  fs::path path;

  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("polymerlab_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Records file with the wall_time_ms column blanked out.
std::string records_without_timing(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::string out;
  while (std::getline(in, line)) {
    int commas = 0;
    std::string filtered;
    for (char c : line) {
      if (c == ',') ++commas;
      if (commas == 3 && c != ',') continue;  // wall_time_ms cell
      filtered += c;
    }
    out += filtered;
    out += '\n';
  }
  return out;
}

json tiny_e6_config(std::uint64_t seed) {
  return json{{"experiment", "E6_lln_fluctuations"},
              {"alpha", 0.5},
              {"replicas", 12},
              {"master_seed", seed},
              {"grid", json{{"N", json::array({4, 6, 8, 12})}}}};
}

}  // namespace

TEST_CASE("config defaults, validation, round trip") {
  SUBCASE("minimal config gets documented defaults") {
    const auto spec = parse_config_json(json{{"experiment", "E3_thin_tail"},
                                             {"alpha", 0.5},
                                             {"replicas", 777},
                                             {"master_seed", 9}});
    CHECK(spec.name == ExperimentName::E3ThinTail);
    CHECK(spec.replicas == 777);
    CHECK(spec.master_seed == 9);
    CHECK(spec.grid["N"].get<int>() == 50);
    CHECK(spec.grid["T"].get<int>() == 5);
    CHECK(spec.delta == 0.1);
    CHECK(spec.q == 1.0);
  }
  SUBCASE("alpha must be positive") {
    CHECK_THROWS_AS(parse_config_json(json{{"experiment", "E3_thin_tail"}, {"alpha", -1.0}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse_config_json(json{{"experiment", "E3_thin_tail"}, {"alpha", 0.0}}),
                    std::invalid_argument);
  }
  SUBCASE("unknown keys are rejected with their name") {
    try {
      parse_config_json(json{{"experiment", "E3_thin_tail"}, {"alhpa", 0.5}});
      FAIL("expected a validation error");
    } catch (const std::invalid_argument& e) {
      CHECK(std::string(e.what()).find("alhpa") != std::string::npos);
    }
    CHECK_THROWS_AS(
        parse_config_json(json{{"experiment", "E6_lln_fluctuations"},
                               {"grid", json{{"sizes", json::array({4})}}}}),
        std::invalid_argument);
  }
  SUBCASE("replicas must be >= 1") {
    CHECK_THROWS_AS(parse_config_json(json{{"experiment", "E3_thin_tail"}, {"replicas", 0}}),
                    std::invalid_argument);
  }
  SUBCASE("unknown experiment") {
    CHECK_THROWS_AS(parse_config_json(json{{"experiment", "E9_unknown"}}),
                    std::invalid_argument);
  }
  SUBCASE("emit-parse round trip is idempotent") {
    const auto spec = parse_config_json(tiny_e6_config(77));
    const json emitted = emit_config(spec);
    const auto spec2 = parse_config_json(emitted);
    CHECK(emit_config(spec2) == emitted);
  }
}

TEST_CASE("record csv round trip preserves keys and markers") {
  ExperimentRecord rec;
  rec.experiment = "E7_exit_vs_in";
  rec.replica = 3;
  rec.seed = 123456789;
  rec.wall_time_ms = 42;
  rec.grid_point = {{"s", "0"}, {"t", "1.5"}, {"k", "25"}};
  rec.observables = {{"diff", -std::numeric_limits<double>::infinity()},
                     {"exceed", 0.0},
                     {"log_in", 17.25}};
  const std::string text = records_csv_header(rec) + record_csv_line(rec);
  std::istringstream in(text);
  const auto back = read_records_csv(in);
  REQUIRE(back.size() == 1);
  CHECK(back[0].experiment == rec.experiment);
  CHECK(back[0].replica == 3);
  CHECK(back[0].seed == 123456789);
  CHECK(grid_key(back[0]) == "s=0;t=1.5;k=25");
  CHECK(back[0].observables[0].second == -std::numeric_limits<double>::infinity());
  CHECK(back[0].observables[2].second == 17.25);
}

TEST_CASE("runs are deterministic across worker counts") {
  const auto spec = parse_config_json(tiny_e6_config(2026));
  TempDir d1("workers1");
  TempDir d2("workers2");
  RunOptions o1{d1.path, 1};
  RunOptions o2{d2.path, 2};
  const auto r1 = run_experiment(spec, o1);
  const auto r2 = run_experiment(spec, o2);
  CHECK(records_without_timing(r1.records_path) == records_without_timing(r2.records_path));
  CHECK(r1.summary == r2.summary);
}

TEST_CASE("reruns reuse completed records and change nothing") {
  const auto spec = parse_config_json(tiny_e6_config(445));
  TempDir dir("rerun");
  RunOptions opts{dir.path, 2};
  const auto first = run_experiment(spec, opts);
  const std::string bytes_before = slurp(first.records_path);
  const auto second = run_experiment(spec, opts);
  CHECK(slurp(second.records_path) == bytes_before);  // nothing recomputed or appended
  CHECK(second.summary == first.summary);
}

TEST_CASE("partial record files are resumed by key") {
  const auto spec = parse_config_json(tiny_e6_config(91));
  TempDir full_dir("full");
  TempDir part_dir("partial");
  const auto full = run_experiment(spec, RunOptions{full_dir.path, 1});

  // Truncate to the header plus the first 7 rows, then resume.
  {
    std::ifstream in(full.records_path);
    std::ofstream out(part_dir.path / full.records_path.filename());
    std::string line;
    for (int k = 0; k < 8 && std::getline(in, line); ++k) out << line << '\n';
  }
  const auto resumed = run_experiment(spec, RunOptions{part_dir.path, 2});
  CHECK(resumed.summary == full.summary);
  // Same multiset of rows modulo timings: compare sorted lines.
  auto sorted_lines = [](const std::string& text) {
    std::vector<std::string> lines;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) lines.push_back(line);
    std::sort(lines.begin(), lines.end());
    return lines;
  };
  CHECK(sorted_lines(records_without_timing(resumed.records_path)) ==
        sorted_lines(records_without_timing(full.records_path)));
}

TEST_CASE("mismatched record files are refused") {
  const auto spec = parse_config_json(tiny_e6_config(7));
  TempDir dir("mismatch");
  run_experiment(spec, RunOptions{dir.path, 1});
  // Same experiment, but a different grid: the stored rows no longer match.
  auto cfg = tiny_e6_config(7);
  cfg["grid"]["N"] = json::array({3, 5, 7});
  const auto other = parse_config_json(cfg);
  CHECK_THROWS_AS(run_experiment(other, RunOptions{dir.path, 1}), std::runtime_error);
}

TEST_CASE("summaries can be re-derived from stored records") {
  const auto spec = parse_config_json(tiny_e6_config(314));
  TempDir dir("report");
  const auto run = run_experiment(spec, RunOptions{dir.path, 2});
  fs::remove(run.summary_path);
  const auto rep = report_experiment(spec, dir.path);
  CHECK(rep.summary == run.summary);
  CHECK(fs::exists(run.summary_path));
}

TEST_CASE("summarize_records matches the engine's summary") {
  const auto spec = parse_config_json(tiny_e6_config(21));
  TempDir dir("sumrec");
  const auto run = run_experiment(spec, RunOptions{dir.path, 1});
  std::ifstream in(run.records_path);
  const auto records = read_records_csv(in);
  CHECK(summarize_records(spec, records) == run.summary);
}

TEST_CASE("grid-point runs delegate to the deterministic checkers verbatim") {
  const auto spec = parse_config_json(json{{"experiment", "E4_shape_lemmas"}});
  const auto grid = experiment_grid(spec);
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    std::string kind;
    std::int64_t N = 0;
    std::int64_t T = 0;
    std::int64_t k = 0;
    for (const auto& [key, val] : grid[gi].labels) {
      if (key == "kind") kind = val;
      if (key == "N" && val != "-") N = std::strtoll(val.c_str(), nullptr, 10);
      if (key == "T" && val != "-") T = std::strtoll(val.c_str(), nullptr, 10);
      if (key == "k" && val != "-") k = std::strtoll(val.c_str(), nullptr, 10);
    }
    if (kind != "slope") continue;
    const auto rec = run_grid_point_replica(spec, gi, 0);
    const auto want = check_slope_gap(ShapeContext(spec.alpha), N, T, k, spec.delta,
                                      spec.grid["kappa"].get<double>());
    double got_margin = 0.0;
    double got_c0 = 0.0;
    for (const auto& [key, val] : rec.observables) {
      if (key == "margin") got_margin = val;
      if (key == "c0") got_c0 = val;
    }
    CHECK(got_margin == want.margin);
    CHECK(got_c0 == want.fitted_c0);
    break;  // one verbatim comparison is the contract
  }
}

TEST_CASE("every experiment runs end to end at toy scale") {
  struct Case {
    const char* name;
    json grid;
    std::int64_t replicas;
  };
  const std::vector<Case> cases = {
      {"E1_coupling_gap",
       json{{"N", json::array({6, 10})}, {"theta", json::array({0.0, 0.5})}},
       25},
      {"E2_bw_identity", json(nullptr), 400},
      {"E3_thin_tail", json{{"N", 12}, {"T", 3}}, 400},
      {"E4_shape_lemmas",
       json{{"slope_N", json::array({100, 400})},
            {"prop34_N", json::array({100, 200, 400})}},
       1},
      {"E5_stoch_dominance", json{{"N", 8}, {"T", 8}}, 500},
      {"E6_lln_fluctuations", json{{"N", json::array({4, 8, 16})}}, 30},
      {"E7_exit_vs_in", json{{"N", 27}, {"t_values", json::array({1.0, 2.0})}}, 60},
      {"E8_uniform_upper_tail", json{{"N", 32}, {"x_count", 6}, {"x_max", 1.5}}, 400},
  };
  for (const auto& c : cases) {
    CAPTURE(c.name);
    json cfg{{"experiment", c.name}, {"alpha", 0.5}, {"replicas", c.replicas},
             {"master_seed", 555}};
    if (!c.grid.is_null()) cfg["grid"] = c.grid;
    const auto spec = parse_config_json(cfg);
    TempDir dir(std::string("toy_") + c.name);
    const auto outcome = run_experiment(spec, RunOptions{dir.path, 2});
    CHECK(outcome.summary.contains("verdict"));
    CHECK(fs::exists(outcome.records_path));
    CHECK(fs::exists(outcome.summary_path));
    CHECK(fs::exists(outcome.config_path));
  }
}
