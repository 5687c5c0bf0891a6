#ifndef POLYMERLAB_CONFIG_HPP
#define POLYMERLAB_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"

namespace polymerlab {

enum class ExperimentName {
  E1CouplingGap,
  E2BwIdentity,
  E3ThinTail,
  E4ShapeLemmas,
  E5StochDominance,
  E6LlnFluctuations,
  E7ExitVsIn,
  E8UniformUpperTail,
};

const char* experiment_name(ExperimentName name);
ExperimentName experiment_from_string(const std::string& s);

// A fully validated experiment description with every default applied. The
// grid member holds the experiment-specific parameter grid in canonical
// form; unknown keys anywhere are rejected at parse time.
struct ExperimentSpec {
  ExperimentName name = ExperimentName::E1CouplingGap;
  double alpha = 0.5;
  double theta = 0.5;
  double delta = 0.1;
  double q = 1.0;
  double sigma_p = 1.0;
  double b = 2.0;
  std::optional<double> p_override;
  std::int64_t replicas = 1;
  std::uint64_t master_seed = 20260810;
  nlohmann::json grid;
};

ExperimentSpec parse_config_json(const nlohmann::json& j);
ExperimentSpec parse_config_file(const std::filesystem::path& path);

// Inverse of parsing: emits the spec with all defaults materialized, so
// emit(parse(emit(parse(x)))) == emit(parse(x)).
nlohmann::json emit_config(const ExperimentSpec& spec);

}  // namespace polymerlab

#endif
