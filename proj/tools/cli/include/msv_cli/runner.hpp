#pragma once

// Check registry and orchestration. Every check runs in isolation: an
// exception inside one check marks it INCONCLUSIVE and the rest still run.

#include "msv_cli/config.hpp"

#include "msv/grid.hpp"
#include "msv/propagator.hpp"
#include "msv/spectral.hpp"

#include <functional>
#include <memory>
#include <mutex>

namespace msv::cli {

enum class Outcome { Pass, Fail, Inconclusive, Skipped };
const char* to_string(Outcome o) noexcept;

struct CheckResult {
  Outcome outcome = Outcome::Pass;
  std::string reason;
  nlohmann::ordered_json constants = nlohmann::ordered_json::object();
  nlohmann::ordered_json witness;  // null unless the check failed
  std::vector<std::string> artifacts;
  std::vector<std::string> notes;
};

/// Shared, lazily built state for one run. Thread-safe.
class Context {
 public:
  explicit Context(RunConfig cfg);

  const RunConfig& config() const noexcept { return cfg_; }
  const SystemSpec& spec() const noexcept { return spec_; }
  const GridSpec& grid() const noexcept { return grid_; }
  const DiscreteOperator& op();
  const Propagator& propagator();
  const SpectralResult& spectrum();
  std::vector<Eigen::Index> sources();

  /// Path inside the output directory; creates the directory.
  std::filesystem::path artifact(const std::string& file);

 private:
  RunConfig cfg_;
  SystemSpec spec_;
  GridSpec grid_;
  std::once_flag op_once_, prop_once_, spec_once_;
  std::unique_ptr<DiscreteOperator> op_;
  std::unique_ptr<Propagator> prop_;
  std::unique_ptr<SpectralResult> spectrum_;
};

using CheckFn = std::function<CheckResult(Context&)>;

struct CheckDef {
  std::string name;
  std::string group;   // model, grid, spectral, evolve
  std::string anchor;  // the inequality or identity being checked
  CheckFn fn;
};

class Registry {
 public:
  void add(CheckDef def);
  const CheckDef* find(const std::string& name) const;
  const std::vector<CheckDef>& all() const noexcept { return defs_; }

  static Registry builtin();

 private:
  std::vector<CheckDef> defs_;
};

/// Checks run when the config lists none.
std::vector<std::string> default_suite(const Registry& reg);
std::vector<std::string> group_names(const Registry& reg, const std::string& group);

struct RunOutcome {
  nlohmann::ordered_json report;
  int exit_code = 0;  // 0 ok, 1 some FAIL, 3 some runtime error
};

/// Runs `names` (validated against `reg`; unknown names throw ConfigError)
/// in dependency order and writes report.json into the output directory.
RunOutcome run_checks(const RunConfig& cfg, const Registry& reg, const std::vector<std::string>& names,
                      int threads = 1);

/// Serializes a double, mapping non-finite values to "inf", "-inf", "nan".
nlohmann::ordered_json number(double v);

}  // namespace msv::cli
