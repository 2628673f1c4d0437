#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "aicmss/estimator.hpp"
#include "aicmss/random_streams.hpp"

namespace aicmss {

// True plant X_{t+1} = a X_t + b U_t + W_t with W_t ~ N(0, sigma_w^2).
class SystemParams {
 public:
  SystemParams(double a, double b, double sigma_w, double x0 = 0.0);

  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }
  double sigma_w() const noexcept { return sigma_w_; }
  double x0() const noexcept { return x0_; }
  Vec2 theta() const noexcept { return {a_, b_}; }

  bool operator==(const SystemParams&) const = default;

 private:
  double a_, b_, sigma_w_, x0_;
};

class ControllerConfig {
 public:
  ControllerConfig(double u_max, double c_excite, double a_init, double b_init);

  double u_max() const noexcept { return u_max_; }
  double c_excite() const noexcept { return c_excite_; }
  double d_sat() const noexcept { return d_sat_; }
  double a_init() const noexcept { return a_init_; }
  double b_init() const noexcept { return b_init_; }

  bool operator==(const ControllerConfig&) const = default;

 private:
  double u_max_, c_excite_, d_sat_, a_init_, b_init_;
};

inline constexpr double kGainDenominatorGuard = 1e-12;

struct StepRecord {
  std::size_t t;
  double x;
  double u;
  double v;
  double w;
  double gain;
  double a_hat;
  double b_hat;

  bool operator==(const StepRecord&) const = default;
};

struct Trajectory {
  SystemParams params;
  std::optional<ControllerConfig> config;  // empty for uncontrolled runs
  std::size_t horizon = 0;
  std::vector<StepRecord> records;  // t = 0 .. horizon-1
  double final_x = 0.0;             // X_horizon
  // estimates[t] holds theta_hat_t (data through X_{t+1}); empty for t = 0
  // and for trajectories that do not estimate.
  std::vector<std::optional<ParameterEstimate>> estimates;
  RegressorDataset dataset;

  double x(std::size_t t) const { return t < records.size() ? records[t].x : final_x; }

  bool operator==(const Trajectory&) const = default;
};

double saturate(double x, double r);

double compute_gain(const ControllerConfig& config,
                    const std::optional<ParameterEstimate>& latest_estimate,
                    std::size_t t, double previous_gain);

double control_input(double gain, double x, double v, const ControllerConfig& config);

struct SimulationOptions {
  bool keep_raw_log = true;
  std::size_t raw_log_cap = RegressorDataset::kDefaultRawLogCap;
  bool record_estimates = true;
  // Replaces every estimate in the gain with this value (tests).
  std::optional<Vec2> pinned_estimate;
};

Trajectory simulate_closed_loop(const SystemParams& params, const ControllerConfig& config,
                                std::size_t horizon, const RandomStreams& streams,
                                const SimulationOptions& options = {});

Trajectory simulate_reference(const SystemParams& params, const ControllerConfig& config,
                              std::size_t horizon, const RandomStreams& streams);

Trajectory simulate_uncontrolled(const SystemParams& params, std::size_t horizon,
                                 const RandomStreams& streams);

}  // namespace aicmss
