#include "aicmss/bmsb.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "aicmss/csv.hpp"
#include "aicmss/errors.hpp"

namespace aicmss {

TrajectoryPrefix make_prefix(const Trajectory& trajectory, std::size_t t) {
  require(trajectory.config.has_value() && !trajectory.estimates.empty(), ErrorKind::invalid_argument,
          "prefix needs a closed-loop trajectory with recorded estimates");
  require(t >= 1, ErrorKind::invalid_argument, "prefix must contain at least one step (t >= 1)");
  require(t < trajectory.records.size(), ErrorKind::invalid_argument,
          "prefix time must be below the trajectory horizon");
  RegressorDataset dataset(false, 0);
  for (std::size_t s = 1; s < t; ++s) {
    const StepRecord& r = trajectory.records[s];
    dataset.ingest({r.x, r.u}, trajectory.x(s + 1));
  }
  const StepRecord& now = trajectory.records[t];
  return {trajectory.params, *trajectory.config, t, now.x, now.u, now.gain, std::move(dataset), t};
}

BranchStep branch_step(const TrajectoryPrefix& prefix, double w, double v_next) {
  const SystemParams& sys = prefix.params;
  BranchStep out{};
  out.x_next = sys.a() * prefix.x_t + sys.b() * prefix.u_t + w;
  RegressorDataset data = prefix.dataset;
  data.ingest({prefix.x_t, prefix.u_t}, out.x_next);
  out.estimate = solve_ols(data);
  out.gain_next = compute_gain(prefix.config, out.estimate, prefix.t + 1, prefix.gain_t);
  out.u_next = control_input(out.gain_next, out.x_next, v_next, prefix.config);
  return out;
}

std::vector<double> branch_next_step(const TrajectoryPrefix& prefix, const Vec2& zeta,
                                     std::size_t n_branches, const RandomStreams& streams,
                                     std::uint64_t direction_index) {
  require(prefix.t >= 1, ErrorKind::invalid_argument, "empty prefix");
  require(n_branches >= 1, ErrorKind::invalid_argument, "n_branches must be >= 1");
  require(std::abs(std::hypot(zeta[0], zeta[1]) - 1.0) <= 1e-12, ErrorKind::invalid_argument,
          "zeta must be a unit vector");
  std::vector<double> samples;
  samples.reserve(n_branches);
  for (std::size_t j = 0; j < n_branches; ++j) {
    const RandomStreams s = streams.branch(prefix.id, direction_index, j);
    const double w = s.disturbance(0, prefix.params.sigma_w());
    const double v = s.excitation(0, prefix.config.c_excite());
    const BranchStep step = branch_step(prefix, w, v);
    samples.push_back(std::abs(zeta[0] * step.x_next + zeta[1] * step.u_next));
  }
  return samples;
}

std::size_t BranchReport::p_violations() const {
  return static_cast<std::size_t>(
      std::count_if(directions.begin(), directions.end(), [](const DirectionStats& d) { return d.p_violation; }));
}

std::size_t BranchReport::mean_violations() const {
  return static_cast<std::size_t>(std::count_if(directions.begin(), directions.end(),
                                                [](const DirectionStats& d) { return d.mean_violation; }));
}

std::vector<double> direction_grid(std::size_t phi_count) {
  require(phi_count >= 1, ErrorKind::invalid_argument, "phi_count must be >= 1");
  const double pi = std::numbers::pi;
  std::vector<double> grid;
  for (std::size_t k = 0; k < phi_count; ++k)
    grid.push_back(-pi + 2.0 * pi * static_cast<double>(k) / static_cast<double>(phi_count));
  for (double axis : {-pi, -pi / 2.0, 0.0, pi / 2.0}) {
    const bool present = std::any_of(grid.begin(), grid.end(),
                                     [&](double phi) { return std::abs(phi - axis) <= 1e-12; });
    if (!present) grid.push_back(axis);
  }
  std::sort(grid.begin(), grid.end());
  return grid;
}

BranchReport verify_small_ball(const TrajectoryPrefix& prefix, const ExcitationCertificate& cert,
                               std::size_t phi_count, std::size_t n_branches,
                               const RandomStreams& streams) {
  require(phi_count >= 4, ErrorKind::invalid_argument, "phi_count must be >= 4");
  require(cert.gamma_sb > 0.0 && cert.p > 0.0 && cert.p < 1.0, ErrorKind::invalid_argument,
          "invalid certificate");
  BranchReport report{prefix.t, n_branches, std::sqrt(cert.gamma_sb), cert.p, cert.gamma, {}};
  const std::vector<double> grid = direction_grid(phi_count);
  const double n = static_cast<double>(n_branches);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double phi = grid[k];
    const std::vector<double> s =
        branch_next_step(prefix, {std::cos(phi), std::sin(phi)}, n_branches, streams, k);
    std::size_t hits = 0;
    double mean = 0.0, m2 = 0.0;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (s[j] >= report.threshold) ++hits;
      const double delta = s[j] - mean;
      mean += delta / static_cast<double>(j + 1);
      m2 += delta * (s[j] - mean);
    }
    DirectionStats d{};
    d.phi = phi;
    d.p_hat = static_cast<double>(hits) / n;
    d.p_se = std::sqrt(d.p_hat * (1.0 - d.p_hat) / n);
    d.mean_abs = mean;
    d.mean_se = n_branches > 1 ? std::sqrt(m2 / (n - 1.0)) / std::sqrt(n) : 0.0;
    d.p_violation = d.p_hat + 3.0 * d.p_se < cert.p;
    d.mean_violation = d.mean_abs + 3.0 * d.mean_se < cert.gamma;
    report.directions.push_back(d);
  }
  return report;
}

std::string branch_report_csv(const BranchReport& report) {
  std::ostringstream out;
  out << "phi,p_hat,p_se,mean_abs,mean_se,violation\n";
  for (const DirectionStats& d : report.directions) {
    out << format_double(d.phi) << ',' << format_double(d.p_hat) << ',' << format_double(d.p_se) << ','
        << format_double(d.mean_abs) << ',' << format_double(d.mean_se) << ',' << (d.violation() ? 1 : 0)
        << '\n';
  }
  return out.str();
}

}  // namespace aicmss
