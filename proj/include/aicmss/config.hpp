#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

#include "aicmss/sim.hpp"

namespace aicmss {

struct ExperimentConfig {
  SystemParams system;
  ControllerConfig controller;
  std::size_t horizon = 1000;
  std::size_t n_runs = 1000;
  std::uint64_t master_seed = 20240611;
  double psi = 0.5;
  std::optional<double> d;
  std::optional<double> lambda;
  std::string output_dir = "out";
  std::size_t workers = 1;
};

// INI document with sections [system], [controller], [run].
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// "system1", "system2", "system3": the three plants of the numerical study.
ExperimentConfig preset(const std::string& name);

}  // namespace aicmss
