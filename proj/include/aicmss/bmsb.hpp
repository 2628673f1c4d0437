#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "aicmss/bounds.hpp"

namespace aicmss {

// State of a closed-loop run just before W_t is drawn: X_t and U_t are known
// and the dataset holds the pairs s = 1 .. t-1.
struct TrajectoryPrefix {
  SystemParams params;
  ControllerConfig config;
  std::size_t t;
  double x_t;
  double u_t;
  double gain_t;
  RegressorDataset dataset;
  std::uint64_t id;
};

TrajectoryPrefix make_prefix(const Trajectory& trajectory, std::size_t t);

struct BranchStep {
  double x_next;
  double u_next;
  double gain_next;
  ParameterEstimate estimate;
};

// One branched continuation given the draws (W_t, V_{t+1}).
BranchStep branch_step(const TrajectoryPrefix& prefix, double w, double v_next);

std::vector<double> branch_next_step(const TrajectoryPrefix& prefix, const Vec2& zeta,
                                     std::size_t n_branches, const RandomStreams& streams,
                                     std::uint64_t direction_index = 0);

struct DirectionStats {
  double phi;
  double p_hat;
  double p_se;
  double mean_abs;
  double mean_se;
  bool p_violation;
  bool mean_violation;

  bool violation() const { return p_violation || mean_violation; }
};

struct BranchReport {
  std::size_t t;
  std::size_t n_branches;
  double threshold;  // sqrt(gamma_sb)
  double p;
  double gamma;
  std::vector<DirectionStats> directions;

  std::size_t p_violations() const;
  std::size_t mean_violations() const;
};

// Uniform grid on [-pi, pi) plus the axis angles, sorted.
std::vector<double> direction_grid(std::size_t phi_count);

BranchReport verify_small_ball(const TrajectoryPrefix& prefix, const ExcitationCertificate& cert,
                               std::size_t phi_count, std::size_t n_branches,
                               const RandomStreams& streams);

std::string branch_report_csv(const BranchReport& report);

}  // namespace aicmss
