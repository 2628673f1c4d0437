#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "aicmss/commands.hpp"
#include "aicmss/errors.hpp"

namespace {

struct Common {
  std::string config_path;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> runs;
  std::optional<std::size_t> horizon;
  std::optional<std::size_t> workers;
  std::optional<std::string> out;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "INI configuration file");
  cmd->add_option("--preset", c.preset, "built-in plant")->check(CLI::IsMember({"system1", "system2", "system3"}));
  cmd->add_option("--seed", c.seed, "master seed");
  cmd->add_option("--runs", c.runs, "number of Monte-Carlo runs")->check(CLI::PositiveNumber);
  cmd->add_option("--horizon", c.horizon, "steps per run")->check(CLI::Range(2, 100'000'000));
  cmd->add_option("--workers", c.workers, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--out", c.out, "output directory");
}

aicmss::ExperimentConfig resolve(const Common& c, bool allow_default) {
  using aicmss::ErrorKind;
  aicmss::require(c.config_path.empty() || c.preset.empty(), ErrorKind::config,
                  "--config and --preset are mutually exclusive");
  std::optional<aicmss::ExperimentConfig> cfg;
  if (!c.config_path.empty())
    cfg = aicmss::load_config(c.config_path);
  else if (!c.preset.empty())
    cfg = aicmss::preset(c.preset);
  else if (allow_default)
    cfg = aicmss::preset("system1");
  else
    aicmss::fail(ErrorKind::config, "either --config or --preset is required");
  if (c.seed) cfg->master_seed = *c.seed;
  if (c.runs) cfg->n_runs = *c.runs;
  if (c.horizon) cfg->horizon = *c.horizon;
  if (c.workers) cfg->workers = *c.workers;
  if (c.out) cfg->output_dir = *c.out;
  return *cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Input-constrained adaptive control of scalar stochastic systems"};
  app.require_subcommand(1);

  Common simulate_opts, ensemble_opts, bounds_opts, bmsb_opts, fig1_opts;
  auto* simulate = app.add_subcommand("simulate", "one closed-loop trajectory -> trajectory.csv");
  add_common(simulate, simulate_opts);
  auto* ensemble = app.add_subcommand("ensemble", "Monte-Carlo ensemble -> msq/theta/td/tailcmp CSVs");
  add_common(ensemble, ensemble_opts);
  auto* bounds = app.add_subcommand("bounds", "excitation certificate and stable-case bound");
  add_common(bounds, bounds_opts);
  auto* bmsb = app.add_subcommand("bmsb", "branching Monte-Carlo small-ball check");
  add_common(bmsb, bmsb_opts);
  aicmss::BmsbOptions branch;
  bmsb->add_option("--prefix-times", branch.prefix_times, "prefix lengths t");
  bmsb->add_option("--phi-count", branch.phi_count, "number of directions")->check(CLI::Range(4, 1'000'000));
  bmsb->add_option("--branches", branch.n_branches, "branches per direction")->check(CLI::PositiveNumber);
  auto* fig1 = app.add_subcommand("reproduce-fig1", "Systems 1-3 and uncontrolled System 3");
  add_common(fig1, fig1_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: usage: " << e.what() << '\n';
    return 2;
  }

  try {
    aicmss::CommandResult result;
    if (simulate->parsed()) {
      const auto cfg = resolve(simulate_opts, false);
      result = aicmss::cmd_simulate(cfg, cfg.output_dir);
    } else if (ensemble->parsed()) {
      const auto cfg = resolve(ensemble_opts, false);
      result = aicmss::cmd_ensemble(cfg, cfg.output_dir);
    } else if (bounds->parsed()) {
      const auto cfg = resolve(bounds_opts, false);
      result = aicmss::cmd_bounds(cfg, cfg.output_dir);
    } else if (bmsb->parsed()) {
      const auto cfg = resolve(bmsb_opts, false);
      result = aicmss::cmd_bmsb(cfg, branch, cfg.output_dir);
    } else {
      const auto cfg = resolve(fig1_opts, true);
      result = aicmss::cmd_reproduce_fig1(cfg, cfg.output_dir);
    }
    std::cout << aicmss::manifest_text(result);
    return result.exit_code();
  } catch (const aicmss::Error& e) {
    std::cerr << "error: " << aicmss::to_string(e.kind()) << ": " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << '\n';
    return 2;
  }
}
