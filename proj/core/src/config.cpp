#include "polymerlab/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

namespace polymerlab {

const char* experiment_name(ExperimentName name) {
  switch (name) {
    case ExperimentName::E1CouplingGap:
      return "E1_coupling_gap";
    case ExperimentName::E2BwIdentity:
      return "E2_bw_identity";
    case ExperimentName::E3ThinTail:
      return "E3_thin_tail";
    case ExperimentName::E4ShapeLemmas:
      return "E4_shape_lemmas";
    case ExperimentName::E5StochDominance:
      return "E5_stoch_dominance";
    case ExperimentName::E6LlnFluctuations:
      return "E6_lln_fluctuations";
    case ExperimentName::E7ExitVsIn:
      return "E7_exit_vs_in";
    case ExperimentName::E8UniformUpperTail:
      return "E8_uniform_upper_tail";
  }
  return "?";
}

ExperimentName experiment_from_string(const std::string& s) {
  for (int k = 0; k <= static_cast<int>(ExperimentName::E8UniformUpperTail); ++k) {
    const auto name = static_cast<ExperimentName>(k);
    if (s == experiment_name(name)) return name;
  }
  throw std::invalid_argument("config: unknown experiment \"" + s + "\"");
}

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) {
  throw std::invalid_argument("config: " + msg);
}

void require_keys(const json& obj, const std::set<std::string>& allowed,
                  const std::string& where) {
  for (const auto& [k, v] : obj.items()) {
    if (!allowed.contains(k)) fail("unknown key \"" + k + "\" in " + where);
  }
}

double get_positive(const json& obj, const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) fail("\"" + key + "\" must be a number");
  const double v = obj[key].get<double>();
  if (!(v > 0.0) || !std::isfinite(v)) fail("\"" + key + "\" must be finite and > 0");
  return v;
}

double get_nonneg(const json& obj, const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const double v = obj[key].get<double>();
  if (!(v >= 0.0) || !std::isfinite(v)) fail("\"" + key + "\" must be finite and >= 0");
  return v;
}

json positive_int_array(const json& obj, const std::string& key, json fallback) {
  if (!obj.contains(key)) return fallback;
  const json& a = obj[key];
  if (!a.is_array() || a.empty()) fail("\"" + key + "\" must be a nonempty array");
  for (const auto& v : a) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 1) {
      fail("\"" + key + "\" entries must be integers >= 1");
    }
  }
  return a;
}

json number_array(const json& obj, const std::string& key, json fallback) {
  if (!obj.contains(key)) return fallback;
  const json& a = obj[key];
  if (!a.is_array() || a.empty()) fail("\"" + key + "\" must be a nonempty array");
  for (const auto& v : a) {
    if (!v.is_number()) fail("\"" + key + "\" entries must be numbers");
  }
  return a;
}

json default_bw_cases() {
  return json::array({
      json{{"n", 2},
           {"m", 2},
           {"alpha0", 0.3},
           {"alphas", json::array({0.5, 0.7})},
           {"betas", json::array({0.6, 0.4})}},
      json{{"n", 1},
           {"m", 2},
           {"alpha0", 0.3},
           {"alphas", json::array({0.5})},
           {"betas", json::array({0.6, 0.4})}},
  });
}

json validate_grid(ExperimentName name, const json& in) {
  json g = json::object();
  switch (name) {
    case ExperimentName::E1CouplingGap: {
      require_keys(in, {"N", "theta", "point"}, "grid");
      g["N"] = positive_int_array(in, "N", json::array({50, 100, 200, 400}));
      g["theta"] = number_array(in, "theta", json::array({0.0, 0.5}));
      for (const auto& th : g["theta"]) {
        if (th.get<double>() < 0.0) fail("grid theta entries must be >= 0");
      }
      json pt = in.contains("point") ? in["point"] : json::array({0.0, 0.0, 0.0, 1.0});
      if (!pt.is_array() || pt.size() != 4) fail("\"point\" must be [x, s, y, t]");
      if (!(pt[3].get<double>() > pt[1].get<double>())) fail("\"point\" needs t > s");
      g["point"] = pt;
      break;
    }
    case ExperimentName::E2BwIdentity: {
      require_keys(in, {"cases"}, "grid");
      json cases = in.contains("cases") ? in["cases"] : default_bw_cases();
      if (!cases.is_array() || cases.empty()) fail("\"cases\" must be a nonempty array");
      for (auto& c : cases) {
        require_keys(c, {"n", "m", "alpha0", "alphas", "betas"}, "grid case");
        if (!c.contains("n") || !c.contains("m") || !c.contains("alphas") ||
            !c.contains("betas") || !c.contains("alpha0")) {
          fail("each case needs n, m, alpha0, alphas, betas");
        }
        const auto n = c["n"].get<std::int64_t>();
        const auto m = c["m"].get<std::int64_t>();
        if (n < 1 || m < 0) fail("case needs n >= 1 and m >= 0");
        if (c["alphas"].size() != static_cast<std::size_t>(n)) fail("case alphas must have n entries");
        if (c["betas"].size() != static_cast<std::size_t>(m)) fail("case betas must have m entries");
      }
      g["cases"] = cases;
      break;
    }
    case ExperimentName::E3ThinTail: {
      require_keys(in, {"N", "T", "lambda_grid", "thresholds"}, "grid");
      g["N"] = in.value("N", 50);
      g["T"] = in.value("T", 5);
      g["lambda_grid"] = in.value("lambda_grid", 64);
      g["thresholds"] = in.value("thresholds", 20);
      if (g["N"].get<std::int64_t>() < 1 || g["T"].get<std::int64_t>() < 1) {
        fail("E3 needs N, T >= 1");
      }
      if (g["thresholds"].get<std::int64_t>() < 3) fail("E3 needs >= 3 thresholds");
      if (g["lambda_grid"].get<std::int64_t>() < 2) fail("E3 needs lambda_grid >= 2");
      break;
    }
    case ExperimentName::E4ShapeLemmas: {
      require_keys(in,
                   {"kappa", "slope_N", "ratios", "rect_ratios", "prop34_N", "point", "z_max",
                    "z_count"},
                   "grid");
      g["kappa"] = get_positive(in, "kappa", 1.0);
      g["slope_N"] = positive_int_array(in, "slope_N", json::array({100, 1000, 10000}));
      g["ratios"] = number_array(in, "ratios", json::array({0.1, 0.3, 0.5, 0.7, 0.9}));
      g["rect_ratios"] =
          number_array(in, "rect_ratios", json::array({0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.9}));
      g["prop34_N"] = positive_int_array(in, "prop34_N", json::array({200, 400, 800, 1600, 3200}));
      json pt = in.contains("point") ? in["point"] : json::array({0.0, 0.0, 0.0, 1.0});
      if (!pt.is_array() || pt.size() != 4) fail("\"point\" must be [x, s, y, t]");
      g["point"] = pt;
      g["z_max"] = get_positive(in, "z_max", 0.2);
      g["z_count"] = in.value("z_count", 20);
      if (g["z_count"].get<std::int64_t>() < 4) fail("E4 needs z_count >= 4");
      break;
    }
    case ExperimentName::E5StochDominance: {
      require_keys(in, {"N", "T", "thetas"}, "grid");
      g["N"] = in.value("N", 64);
      g["T"] = in.value("T", 64);
      g["thetas"] = number_array(in, "thetas", json::array({0.2, 1.0}));
      if (g["N"].get<std::int64_t>() < 1 || g["T"].get<std::int64_t>() < 1) {
        fail("E5 needs N, T >= 1");
      }
      for (const auto& th : g["thetas"]) {
        if (!(th.get<double>() > 0.0)) fail("E5 thetas must be > 0 (0 is the baseline)");
      }
      break;
    }
    case ExperimentName::E6LlnFluctuations: {
      require_keys(in, {"N"}, "grid");
      g["N"] = positive_int_array(in, "N", json::array({64, 128, 256, 512, 1024}));
      if (g["N"].size() < 3) fail("E6 needs >= 3 sizes for the exponent fit");
      break;
    }
    case ExperimentName::E7ExitVsIn: {
      require_keys(in, {"N", "t_values", "s_values", "delta_scale"}, "grid");
      g["N"] = in.value("N", 125);
      if (g["N"].get<std::int64_t>() < 8) fail("E7 needs N >= 8");
      g["t_values"] = number_array(in, "t_values", json::array({1.0, 2.0, 2.4}));
      g["s_values"] = number_array(in, "s_values", json::array({0.0}));
      g["delta_scale"] = get_positive(in, "delta_scale", 1.0);
      break;
    }
    case ExperimentName::E8UniformUpperTail: {
      require_keys(in, {"N", "slopes", "kappa", "include_cap_slope", "x_max", "x_count"},
                   "grid");
      g["N"] = in.value("N", 216);
      if (g["N"].get<std::int64_t>() < 8) fail("E8 needs N >= 8");
      g["slopes"] = number_array(in, "slopes", json::array({0.5, 0.8}));
      g["kappa"] = get_positive(in, "kappa", 0.5);
      g["include_cap_slope"] = in.value("include_cap_slope", true);
      g["x_max"] = get_positive(in, "x_max", 3.0);
      g["x_count"] = in.value("x_count", 13);
      if (g["x_count"].get<std::int64_t>() < 4) fail("E8 needs x_count >= 4");
      break;
    }
  }
  return g;
}

std::int64_t default_replicas(ExperimentName name) {
  switch (name) {
    case ExperimentName::E1CouplingGap:
      return 1000;
    case ExperimentName::E2BwIdentity:
      return 100000;
    case ExperimentName::E3ThinTail:
      return 100000;
    case ExperimentName::E4ShapeLemmas:
      return 1;
    case ExperimentName::E5StochDominance:
      return 10000;
    case ExperimentName::E6LlnFluctuations:
      return 200;
    case ExperimentName::E7ExitVsIn:
      return 400;
    case ExperimentName::E8UniformUpperTail:
      return 2000;
  }
  return 1;
}

double default_delta(ExperimentName name) {
  return name == ExperimentName::E1CouplingGap ? 0.2 : 0.1;
}

}  // namespace

ExperimentSpec parse_config_json(const nlohmann::json& j) {
  if (!j.is_object()) fail("top level must be a JSON object");
  require_keys(j,
               {"experiment", "alpha", "theta", "delta", "q", "sigma_p", "b", "p_override",
                "replicas", "master_seed", "grid"},
               "top level");
  if (!j.contains("experiment") || !j["experiment"].is_string()) {
    fail("\"experiment\" is required and must be a string");
  }
  ExperimentSpec spec;
  spec.name = experiment_from_string(j["experiment"].get<std::string>());
  spec.alpha = get_positive(j, "alpha", 0.5);
  spec.theta = get_nonneg(j, "theta", 0.5);
  spec.delta = get_positive(j, "delta", default_delta(spec.name));
  spec.q = get_positive(j, "q", 1.0);
  spec.sigma_p = get_positive(j, "sigma_p", 1.0);
  spec.b = get_positive(j, "b", 2.0);
  if (j.contains("p_override") && !j["p_override"].is_null()) {
    if (!j["p_override"].is_number()) fail("\"p_override\" must be a number or null");
    spec.p_override = j["p_override"].get<double>();
  }
  if (j.contains("replicas")) {
    if (!j["replicas"].is_number_integer()) fail("\"replicas\" must be an integer");
    spec.replicas = j["replicas"].get<std::int64_t>();
  } else {
    spec.replicas = default_replicas(spec.name);
  }
  if (spec.replicas < 1) fail("\"replicas\" must be >= 1");
  if (j.contains("master_seed")) {
    if (!j["master_seed"].is_number_integer()) fail("\"master_seed\" must be an integer");
    spec.master_seed = j["master_seed"].get<std::uint64_t>();
  }
  spec.grid = validate_grid(spec.name, j.contains("grid") ? j["grid"] : json::object());
  return spec;
}

ExperimentSpec parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(path.string() + ": " + e.what());
  }
  return parse_config_json(j);
}

nlohmann::json emit_config(const ExperimentSpec& spec) {
  json j;
  j["experiment"] = experiment_name(spec.name);
  j["alpha"] = spec.alpha;
  j["theta"] = spec.theta;
  j["delta"] = spec.delta;
  j["q"] = spec.q;
  j["sigma_p"] = spec.sigma_p;
  j["b"] = spec.b;
  j["p_override"] = spec.p_override ? json(*spec.p_override) : json(nullptr);
  j["replicas"] = spec.replicas;
  j["master_seed"] = spec.master_seed;
  j["grid"] = spec.grid;
  return j;
}

}  // namespace polymerlab
