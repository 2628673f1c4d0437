#include "aicmss/sim.hpp"

#include <cmath>
#include <sstream>

#include "aicmss/errors.hpp"

namespace aicmss {

SystemParams::SystemParams(double a, double b, double sigma_w, double x0)
    : a_(a), b_(b), sigma_w_(sigma_w), x0_(x0) {
  require(std::isfinite(a) && std::isfinite(b) && std::isfinite(sigma_w) && std::isfinite(x0),
          ErrorKind::invalid_argument, "system parameters must be finite");
  require(std::abs(a) <= 1.0, ErrorKind::invalid_argument, "assumption A2 requires |a| <= 1");
  require(b != 0.0, ErrorKind::invalid_argument, "assumption A2 requires b != 0");
  require(sigma_w > 0.0, ErrorKind::invalid_argument, "assumption A1 requires sigma_w > 0");
}

ControllerConfig::ControllerConfig(double u_max, double c_excite, double a_init, double b_init)
    : u_max_(u_max), c_excite_(c_excite), d_sat_(u_max - c_excite), a_init_(a_init), b_init_(b_init) {
  require(std::isfinite(u_max) && std::isfinite(c_excite) && std::isfinite(a_init) &&
              std::isfinite(b_init),
          ErrorKind::invalid_argument, "controller parameters must be finite");
  require(u_max > 0.0, ErrorKind::invalid_argument, "U_max must be > 0");
  require(c_excite > 0.0 && c_excite < u_max, ErrorKind::invalid_argument,
          "C must satisfy 0 < C < U_max");
  require(b_init != 0.0, ErrorKind::invalid_argument, "b_init must be != 0");
}

double saturate(double x, double r) {
  require(r > 0.0, ErrorKind::invalid_argument, "saturate: level must be > 0");
  if (std::abs(x) <= r) return x;
  return std::copysign(r, x);
}

double compute_gain(const ControllerConfig& config,
                    const std::optional<ParameterEstimate>& latest_estimate, std::size_t t,
                    double previous_gain) {
  if (t <= 1) return -config.a_init() / config.b_init();
  require(latest_estimate.has_value(), ErrorKind::invalid_argument,
          "compute_gain: an estimate is required for t >= 2");
  if (std::abs(latest_estimate->b_hat) < kGainDenominatorGuard) return previous_gain;
  return -latest_estimate->a_hat / latest_estimate->b_hat;
}

double control_input(double gain, double x, double v, const ControllerConfig& config) {
  if (!(std::abs(v) <= config.c_excite())) {
    std::ostringstream msg;
    msg << "control_input: |v| = " << std::abs(v) << " exceeds C = " << config.c_excite();
    fail(ErrorKind::invalid_argument, msg.str());
  }
  return saturate(gain * x, config.d_sat()) + v;
}

Trajectory simulate_closed_loop(const SystemParams& params, const ControllerConfig& config,
                                std::size_t horizon, const RandomStreams& streams,
                                const SimulationOptions& options) {
  require(horizon >= 1, ErrorKind::invalid_argument, "horizon must be >= 1");
  Trajectory tr{params, config, horizon, {}, 0.0, {},
                RegressorDataset(options.keep_raw_log, options.raw_log_cap)};
  tr.records.reserve(horizon);
  if (options.record_estimates) tr.estimates.resize(horizon);

  const double a = params.a(), b = params.b();
  double x = params.x0();
  double gain = 0.0;
  std::optional<ParameterEstimate> latest;

  for (std::size_t t = 0; t < horizon; ++t) {
    const double v = streams.excitation(t, config.c_excite());
    const double w = streams.disturbance(t, params.sigma_w());

    double a_used = config.a_init(), b_used = config.b_init();
    if (options.pinned_estimate) {
      a_used = (*options.pinned_estimate)[0];
      b_used = (*options.pinned_estimate)[1];
      gain = -a_used / b_used;
    } else {
      gain = compute_gain(config, latest, t, gain);
      if (t >= 2) {
        a_used = latest->a_hat;
        b_used = latest->b_hat;
      }
    }

    const double u = control_input(gain, x, v, config);
    const double x_next = a * x + b * u + w;
    tr.records.push_back({t, x, u, v, w, gain, a_used, b_used});

    if (t >= 1) {
      tr.dataset.ingest({x, u}, x_next);
      latest = solve_ols(tr.dataset);
      if (options.record_estimates) tr.estimates[t] = latest;
    }
    x = x_next;
  }
  tr.final_x = x;
  return tr;
}

Trajectory simulate_reference(const SystemParams& params, const ControllerConfig& config,
                              std::size_t horizon, const RandomStreams& streams) {
  require(horizon >= 1, ErrorKind::invalid_argument, "horizon must be >= 1");
  Trajectory tr{params, config, horizon, {}, 0.0, {}, RegressorDataset(false, 0)};
  tr.records.reserve(horizon);
  const double a = params.a(), b = params.b();
  const double gain = -a / b;
  double x = params.x0();
  for (std::size_t t = 0; t < horizon; ++t) {
    const double v = streams.excitation(t, config.c_excite());
    const double w = streams.disturbance(t, params.sigma_w());
    const double u = control_input(gain, x, v, config);
    const double x_next = a * x + b * u + w;
    tr.records.push_back({t, x, u, v, w, gain, a, b});
    x = x_next;
  }
  tr.final_x = x;
  return tr;
}

Trajectory simulate_uncontrolled(const SystemParams& params, std::size_t horizon,
                                 const RandomStreams& streams) {
  require(horizon >= 1, ErrorKind::invalid_argument, "horizon must be >= 1");
  Trajectory tr{params, std::nullopt, horizon, {}, 0.0, {}, RegressorDataset(false, 0)};
  tr.records.reserve(horizon);
  const double a = params.a(), b = params.b();
  double x = params.x0();
  for (std::size_t t = 0; t < horizon; ++t) {
    const double w = streams.disturbance(t, params.sigma_w());
    const double u = 0.0;
    const double x_next = a * x + b * u + w;
    tr.records.push_back({t, x, u, 0.0, w, 0.0, 0.0, 0.0});
    x = x_next;
  }
  tr.final_x = x;
  return tr;
}

}  // namespace aicmss
