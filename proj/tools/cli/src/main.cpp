#include "msv_cli/runner.hpp"

#include "msv/expr.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>

namespace {

using namespace msv::cli;

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  int threads = 1;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "JSON run configuration")->required()->check(CLI::ExistingFile);
  sub->add_option("--out", c.out, "Output directory (overrides the config)");
  sub->add_option("--seed", c.seed, "Seed for randomized probes (overrides the config)");
  sub->add_option("--threads", c.threads, "Checks run concurrently")->check(CLI::PositiveNumber);
}

void print_summary(const nlohmann::ordered_json& report) {
  for (const auto& c : report["checks"]) {
    std::printf("%-13s %-20s", c["verdict"].get<std::string>().c_str(), c["name"].get<std::string>().c_str());
    if (c.contains("reason")) std::printf(" %s", c["reason"].get<std::string>().c_str());
    std::printf("\n");
  }
  const auto& s = report["summary"];
  std::printf("%d passed, %d failed, %d inconclusive, %d skipped\n", s["pass"].get<int>(), s["fail"].get<int>(),
              s["inconclusive"].get<int>(), s["skipped"].get<int>());
}

int run(const Common& c, std::vector<std::string> names) {
  try {
    RunConfig cfg = load_config(c.config);
    if (!c.out.empty()) cfg.output_dir = c.out;
    if (c.seed) cfg.evolve.seed = *c.seed;
    const Registry reg = Registry::builtin();
    if (names.empty()) names = cfg.checks.empty() ? default_suite(reg) : cfg.checks;
    const RunOutcome res = run_checks(cfg, reg, names, c.threads);
    print_summary(res.report);
    std::printf("report: %s\n", (cfg.output_dir / "report.json").string().c_str());
    return res.exit_code;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}

int parse_check(const std::string& text, int dim) {
  try {
    const auto e = msv::expr::parse(text, dim);
    std::printf("normal form: %s\n%s", msv::expr::print(e).c_str(), msv::expr::dump_tree(e).c_str());
    return 0;
  } catch (const msv::expr::ParseError& e) {
    std::fprintf(stderr, "%s\n%s\n%s^\n", e.what(), text.c_str(), std::string(e.offset(), ' ').c_str());
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hypothesis checks and numerical experiments for matrix Schrodinger-type operators"};
  app.require_subcommand(1);

  std::string expr_text;
  int dim = 1;
  auto* pc = app.add_subcommand("parse-check", "Parse an expression and print its normal form and tree");
  pc->add_option("EXPR", expr_text, "Expression")->required();
  pc->add_option("--dim", dim, "Spatial dimension")->check(CLI::Range(1, 3));

  struct Sub {
    const char* name;
    const char* help;
    std::vector<std::string> checks;  // empty: config list or the default suite
  };
  const std::vector<Sub> subs = {
      {"check-hypotheses", "Pointwise hypothesis checks on sample points", group_names(Registry::builtin(), "model")},
      {"eigen", "Low eigenpairs and the trace identity", {"assemble", "eigen", "trace"}},
      {"weyl", "Eigenvalue counting against the Weyl asymptotics", {"weyl"}},
      {"evolve", "Semigroup norm estimates", {"contraction", "ultracontractivity", "trotter_kato",
                                              "maximal_inequality"}},
      {"kernel", "Heat kernel slices and pointwise kernel estimates",
       {"kernel", "gaussian", "dia_nondia", "positivity", "lower_bound", "decay"}},
      {"verify-all", "Every check listed in the config, or the full suite", {}},
  };
  std::vector<Common> common(subs.size());
  std::vector<CLI::App*> apps;
  for (std::size_t k = 0; k < subs.size(); ++k) {
    apps.push_back(app.add_subcommand(subs[k].name, subs[k].help));
    add_common(apps.back(), common[k]);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (pc->parsed()) return parse_check(expr_text, dim);
  for (std::size_t k = 0; k < subs.size(); ++k)
    if (apps[k]->parsed()) return run(common[k], subs[k].checks);
  return 2;
}
