// hypmass: evaluates the hyperbolic mass functional of asymptotically
// hyperbolic metrics over polyhedra in the upper half-space model and checks
// the polyhedral mass formula and its error-term decay numerically.
//
// Subcommands: theorem-check, cone-sweep, mass-compare, decay-check.
// Exit codes: 0 all assertions pass, 1 assertion failure, 2 configuration
// error.

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "hypmass/hypmass.hpp"

namespace {

struct CliOverrides {
  std::string config_path;
  double tau_prime = -1.0;
  double mass_param = std::nan("");
  std::string eps_schedule;
  std::string out_dir;
  int threads = -1;
  bool verbose = false;
};

void add_common(CLI::App* cmd, CliOverrides& ov) {
  cmd->add_option("--config", ov.config_path, "key-value config file (see README for the schema)");
  cmd->add_option("--tau-prime", ov.tau_prime, "override field.tau_prime");
  cmd->add_option("--mass-param", ov.mass_param, "override field.m");
  cmd->add_option("--eps-schedule", ov.eps_schedule,
                  "override poly.eps_schedule (comma separated, decreasing)");
  cmd->add_option("--out-dir", ov.out_dir, "override run.out_dir");
  cmd->add_option("--threads", ov.threads, "override run.threads");
  cmd->add_flag("--verbose", ov.verbose, "print per-row detail");
}

hypmass::ExperimentConfig resolve(const CliOverrides& ov) {
  hypmass::ExperimentConfig cfg;
  if (!ov.config_path.empty()) cfg = hypmass::load_config(ov.config_path);
  if (ov.tau_prime > 0.0) cfg.tau_prime = ov.tau_prime;
  if (!std::isnan(ov.mass_param)) cfg.m = ov.mass_param;
  if (!ov.eps_schedule.empty())
    hypmass::apply_config_key(cfg, "poly.eps_schedule", ov.eps_schedule);
  if (!ov.out_dir.empty()) cfg.out_dir = ov.out_dir;
  if (ov.threads > 0) cfg.threads = ov.threads;
  if (ov.verbose) cfg.verbose = true;
  return cfg;
}

int finish(const hypmass::RunReport& rep, const hypmass::ExperimentConfig& cfg) {
  hypmass::emit_report(rep, cfg.out_dir, cfg.emit_svg);
  if (cfg.verbose) {
    for (const auto& [suffix, table] : rep.tables) {
      std::printf("# table %s%s\n", rep.name.c_str(), suffix.c_str());
      for (std::size_t i = 0; i < table.columns.size(); ++i)
        std::printf("%s%s", i ? "," : "", table.columns[i].c_str());
      std::printf("\n");
      for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
          std::printf("%s%s", i ? "," : "", hypmass::format_double(row[i]).c_str());
        std::printf("\n");
      }
    }
  }
  for (const auto& a : rep.assertions)
    std::printf("[%s] %s\n", a.passed ? "pass" : "FAIL", a.text.c_str());
  std::printf("%s: %s (reports in %s/)\n", rep.name.c_str(),
              rep.passed() ? "all assertions passed" : "ASSERTION FAILURE", cfg.out_dir.c_str());
  return rep.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hyperbolic mass over polyhedra in the upper half-space model"};
  app.require_subcommand(1);

  CliOverrides ov;
  auto* theorem = app.add_subcommand(
      "theorem-check", "mass formula residual vs error bounds over a box schedule");
  auto* cone = app.add_subcommand(
      "cone-sweep", "error-integral decay over the cone family (base on a horosphere)");
  auto* compare = app.add_subcommand(
      "mass-compare", "polyhedral fluxes vs the geodesic-sphere mass oracle");
  auto* decay = app.add_subcommand("decay-check", "verify the field's declared decay rate");
  for (auto* cmd : {theorem, cone, compare, decay}) add_common(cmd, ov);

  CLI11_PARSE(app, argc, argv);

  try {
    const hypmass::ExperimentConfig cfg = resolve(ov);
    hypmass::RunReport rep;
    if (theorem->parsed()) rep = hypmass::run_theorem_check(cfg);
    else if (cone->parsed()) rep = hypmass::run_cone_sweep(cfg);
    else if (compare->parsed()) rep = hypmass::run_mass_compare(cfg);
    else rep = hypmass::run_decay_check(cfg);
    return finish(rep, cfg);
  } catch (const hypmass::ConfigError& ex) {
    std::fprintf(stderr, "configuration error: %s\n", ex.what());
    return 2;
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return 1;
  }
}
