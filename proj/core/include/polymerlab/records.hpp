#ifndef POLYMERLAB_RECORDS_HPP
#define POLYMERLAB_RECORDS_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace polymerlab {

// One replica's outputs in a flat persistable row. The grid point and
// observable key sets are fixed per experiment; rows are reproducible given
// (master_seed, replica, grid_point) except for wall_time_ms.
struct ExperimentRecord {
  std::string experiment;
  std::int64_t replica = 0;
  std::uint64_t seed = 0;
  std::int64_t wall_time_ms = 0;
  std::vector<std::pair<std::string, std::string>> grid_point;
  std::vector<std::pair<std::string, double>> observables;
};

// Canonical "k=v;k=v" label of the grid point, the resume key together with
// the replica index.
std::string grid_key(const ExperimentRecord& rec);

std::string format_double(double v);  // %.17g; round-trips through strtod

// CSV layout: experiment,replica,seed,wall_time_ms,g:<key>...,o:<key>...
std::string records_csv_header(const ExperimentRecord& prototype);
std::string record_csv_line(const ExperimentRecord& rec);
std::vector<ExperimentRecord> read_records_csv(std::istream& is);
void for_each_record_csv(std::istream& is,
                         const std::function<void(ExperimentRecord&&)>& fn);

}  // namespace polymerlab

#endif
