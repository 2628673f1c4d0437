#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "aicmss/config.hpp"

namespace aicmss {

struct Check {
  std::string name;
  bool pass;
  std::string detail;
};

struct CommandResult {
  std::vector<Check> checks;
  std::vector<std::filesystem::path> files;

  bool ok() const;
  int exit_code() const { return ok() ? 0 : 1; }
};

struct BmsbOptions {
  std::vector<std::size_t> prefix_times{5, 50, 500};
  std::size_t phi_count = 64;
  std::size_t n_branches = 10'000;
};

CommandResult cmd_simulate(const ExperimentConfig& cfg, const std::filesystem::path& out);
CommandResult cmd_ensemble(const ExperimentConfig& cfg, const std::filesystem::path& out);
CommandResult cmd_bounds(const ExperimentConfig& cfg, const std::filesystem::path& out);
CommandResult cmd_bmsb(const ExperimentConfig& cfg, const BmsbOptions& opts,
                       const std::filesystem::path& out);
// Systems 1-3 plus uncontrolled System 3 with the preset settings; only
// horizon, n_runs, seed and workers are taken from cfg.
CommandResult cmd_reproduce_fig1(const ExperimentConfig& cfg, const std::filesystem::path& out);

std::string manifest_text(const CommandResult& result);

}  // namespace aicmss
