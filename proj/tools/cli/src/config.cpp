#include "msv_cli/config.hpp"

#include <fstream>
#include <sstream>

namespace msv::cli {

namespace {

using nlohmann::json;

std::string expr_string(const json& e, const std::string& where) {
  if (e.is_string()) return e.get<std::string>();
  if (e.is_number()) {
    std::ostringstream os;
    os.precision(17);
    os << e.get<double>();
    return os.str();
  }
  throw ConfigError(where + ": expected an expression string or a number");
}

std::vector<std::vector<std::string>> matrix_of(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ConfigError(where + ": expected a nonempty array of rows");
  std::vector<std::vector<std::string>> out;
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != j.size()) throw ConfigError(where + ": rows must form a square array");
    out.emplace_back();
    for (std::size_t c = 0; c < j[r].size(); ++c)
      out.back().push_back(expr_string(j[r][c], where + "[" + std::to_string(r) + "][" + std::to_string(c) + "]"));
  }
  return out;
}

template <class T>
T get_or(const json& obj, const char* key, T fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

double p_value(const json& e) {
  if (e.is_string() && (e == "inf" || e == "infinity")) return std::numeric_limits<double>::infinity();
  if (e.is_number()) return e.get<double>();
  throw ConfigError("evolve.p_grid: entries must be numbers or \"inf\"");
}

}  // namespace

SystemSpec build_system(const SystemConfig& s) {
  try {
    return make_system(s.d, s.Q, s.V, s.v, s.alpha);
  } catch (const expr::ParseError& e) {
    throw ConfigError(std::string("system: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("system: ") + e.what());
  }
}

RunConfig parse_config(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  if (!j.contains("system")) throw ConfigError("config.system is required");
  RunConfig c;

  const json& s = j.at("system");
  c.system.d = get_or<int>(s, "d", 1, "system");
  if (c.system.d < 1) throw ConfigError("system.d must be >= 1");
  if (!s.contains("V")) throw ConfigError("system.V is required");
  c.system.V = matrix_of(s.at("V"), "system.V");
  c.system.m = get_or<int>(s, "m", static_cast<int>(c.system.V.size()), "system");
  if (c.system.m != static_cast<int>(c.system.V.size())) throw ConfigError("system.m differs from the size of V");
  if (s.contains("Q")) {
    c.system.Q = matrix_of(s.at("Q"), "system.Q");
    if (static_cast<int>(c.system.Q.size()) != c.system.d) throw ConfigError("system.Q must be d x d");
  }
  if (!s.contains("v")) throw ConfigError("system.v is required");
  c.system.v = expr_string(s.at("v"), "system.v");
  if (s.contains("alpha") && !s.at("alpha").is_null()) c.system.alpha = get_or<double>(s, "alpha", 0.0, "system");
  build_system(c.system);  // surfaces parse errors now

  if (j.contains("grid")) {
    const json& g = j.at("grid");
    c.grid.R = get_or<double>(g, "R", c.grid.R, "grid");
    c.grid.N = get_or<int>(g, "N", c.grid.N, "grid");
    c.grid.dump_matrix = get_or<bool>(g, "dump_matrix", false, "grid");
  }
  if (!(c.grid.R > 0.0)) throw ConfigError("grid.R must be positive");
  if (c.grid.N < 3 || c.grid.N % 2 == 0) throw ConfigError("grid.N must be odd and >= 3");

  if (j.contains("spectral")) {
    const json& sp = j.at("spectral");
    c.spectral.k = get_or<int>(sp, "k", c.spectral.k, "spectral");
    if (sp.contains("t_trace")) {
      const json& t = sp.at("t_trace");
      c.spectral.t_trace = t.is_array() ? t.get<std::vector<double>>() : std::vector<double>{t.get<double>()};
    }
  }
  if (c.spectral.k < 1) throw ConfigError("spectral.k must be >= 1");

  if (j.contains("evolve")) {
    const json& e = j.at("evolve");
    c.evolve.t_grid = get_or(e, "t_grid", c.evolve.t_grid, "evolve");
    c.evolve.sources = get_or(e, "sources", c.evolve.sources, "evolve");
    c.evolve.trials = get_or(e, "trials", c.evolve.trials, "evolve");
    c.evolve.seed = get_or(e, "seed", c.evolve.seed, "evolve");
    c.evolve.n_grid = get_or(e, "n_grid", c.evolve.n_grid, "evolve");
    c.evolve.trotter_t = get_or(e, "trotter_t", c.evolve.trotter_t, "evolve");
    c.evolve.maximal_p = get_or(e, "maximal_p", c.evolve.maximal_p, "evolve");
    c.evolve.decay_t = get_or(e, "decay_t", c.evolve.decay_t, "evolve");
    if (e.contains("p_grid")) {
      c.evolve.p_grid.clear();
      for (const auto& p : e.at("p_grid")) c.evolve.p_grid.push_back(p_value(p));
    }
  }
  for (double t : c.evolve.t_grid)
    if (!(t > 0.0)) throw ConfigError("evolve.t_grid entries must be positive");
  for (const auto& y : c.evolve.sources)
    if (static_cast<int>(y.size()) != c.system.d) throw ConfigError("evolve.sources entries must have d coordinates");

  c.checks = get_or(j, "checks", c.checks, "config");
  if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  try {
    return parse_config(j);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config has a field of the wrong type: ") + e.what());
  }
}

nlohmann::ordered_json system_to_json(const SystemConfig& s) {
  nlohmann::ordered_json j;
  j["d"] = s.d;
  j["m"] = s.m;
  if (!s.Q.empty()) j["Q"] = s.Q;
  j["V"] = s.V;
  j["v"] = s.v;
  if (s.alpha) j["alpha"] = *s.alpha;
  return j;
}

}  // namespace msv::cli
