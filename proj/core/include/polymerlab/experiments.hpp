#ifndef POLYMERLAB_EXPERIMENTS_HPP
#define POLYMERLAB_EXPERIMENTS_HPP

#include <cstdint>
#include <filesystem>
#include <vector>

#include "polymerlab/config.hpp"
#include "polymerlab/records.hpp"

namespace polymerlab {

// One point of an experiment's parameter grid: the canonical labels that go
// into record rows, plus the typed values the compute step reads.
struct GridPointDef {
  std::vector<std::pair<std::string, std::string>> labels;
  nlohmann::json values;
};

std::vector<GridPointDef> experiment_grid(const ExperimentSpec& spec);

// Computes one (grid point, replica) record. Deterministic given
// (spec.master_seed, grid_index, replica); wall_time_ms is the only
// nondeterministic field.
ExperimentRecord run_grid_point_replica(const ExperimentSpec& spec, std::size_t grid_index,
                                        std::int64_t replica);

// Derives the experiment's verdict and detail fields from its records; used
// both at the end of a run and by the standalone report pass.
nlohmann::json summarize_records(const ExperimentSpec& spec,
                                 const std::vector<ExperimentRecord>& records);

struct RunOptions {
  std::filesystem::path out_dir = "runs";
  unsigned workers = 0;  // 0 = hardware concurrency
};

struct ExperimentOutcome {
  bool verdict = false;
  nlohmann::json summary;
  std::filesystem::path records_path;
  std::filesystem::path summary_path;
  std::filesystem::path config_path;
};

// Runs every (grid point, replica) pair not already present in the records
// file, appending rows grid-point-major and replica-minor so the bytes do
// not depend on the worker count; writes the summary and the config echo,
// and returns the verdict. Completed pairs found on disk are reused as-is.
ExperimentOutcome run_experiment(const ExperimentSpec& spec, const RunOptions& options);

// Re-derives the summary for an experiment whose records already exist.
ExperimentOutcome report_experiment(const ExperimentSpec& spec,
                                    const std::filesystem::path& out_dir);

}  // namespace polymerlab

#endif
