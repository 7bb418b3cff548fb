#pragma once

#include "msv/model.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace msv::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SystemConfig {
  int d = 1;
  int m = 1;
  std::vector<std::vector<std::string>> Q;  // empty: identity
  std::vector<std::vector<std::string>> V;
  std::string v;
  std::optional<double> alpha;
};

struct GridConfig {
  double R = 8.0;
  int N = 321;
  bool dump_matrix = false;
};

struct SpectralConfig {
  int k = 20;
  std::vector<double> t_trace{0.5};
};

struct EvolveConfig {
  std::vector<double> t_grid{0.1, 0.5, 1.0};
  std::vector<std::vector<double>> sources;  // empty: center plus +-R/4, +-R/2 per axis
  int trials = 4;
  std::uint64_t seed = 1;
  std::vector<double> p_grid{1.0, 2.0, 4.0, std::numeric_limits<double>::infinity()};
  std::vector<int> n_grid{4, 8, 16, 32, 64, 128, 256};
  double trotter_t = 0.5;
  double maximal_p = 2.0;
  double decay_t = 0.5;
};

struct RunConfig {
  SystemConfig system;
  GridConfig grid;
  SpectralConfig spectral;
  EvolveConfig evolve;
  std::vector<std::string> checks;  // empty: default suite
  std::filesystem::path output_dir = "msv-out";
};

/// Validates structure and parses every expression; throws ConfigError with
/// a message naming the offending field.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);

/// SystemSpec built from the expression strings; throws ConfigError.
SystemSpec build_system(const SystemConfig& s);

/// Expression-string form of the system, for the report.
nlohmann::ordered_json system_to_json(const SystemConfig& s);

}  // namespace msv::cli
