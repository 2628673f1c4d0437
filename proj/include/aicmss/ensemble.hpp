#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aicmss/bounds.hpp"

namespace aicmss {

// Streaming mean/variance (Welford) with Chan's merge.
class RunningMoments {
 public:
  void add(double x);
  void merge(const RunningMoments& other);

  std::uint64_t count() const noexcept { return n_; }
  double mean() const noexcept { return mean_; }
  double variance() const;  // sample variance, 0 for n < 2
  double stddev() const;

  bool operator==(const RunningMoments&) const = default;

 private:
  std::uint64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct CommitmentTime {
  double d;
  std::optional<std::size_t> value;  // empty when censored
  std::size_t horizon;

  bool censored() const { return !value.has_value(); }
  bool operator==(const CommitmentTime&) const = default;
};

CommitmentTime commitment_time(const Trajectory& trajectory, double d, const Vec2& theta_star);

struct EnsembleOptions {
  bool paired_reference = false;
  bool uncontrolled = false;
  std::size_t workers = 1;
  std::size_t chunk_size = 32;
  // Radius for per-run commitment times; none when absent.
  std::optional<double> commitment_radius;
  // Estimate indices at which per-run errors are kept.
  std::vector<std::size_t> error_checkpoints;
};

struct SeriesStats {
  std::vector<double> mean;
  std::vector<double> std;

  // Bitwise, so the NaN placeholders compare equal.
  bool operator==(const SeriesStats& other) const;
};

struct EnsembleStats {
  SystemParams params;
  std::optional<ControllerConfig> config;
  std::size_t horizon = 0;
  std::size_t n_runs = 0;
  bool uncontrolled = false;
  bool paired = false;

  SeriesStats x2;         // t = 0 .. horizon
  SeriesStats a_hat;      // t = 1 .. horizon-1 (index 0 unused, NaN)
  SeriesStats b_hat;
  SeriesStats est_error;  // ||theta_hat_t - theta*||
  std::vector<double> mean_dev2;  // paired only, t = 0 .. horizon

  std::vector<CommitmentTime> commitment;  // per run
  std::vector<double> max_abs_dev;         // per run, paired only
  std::vector<std::size_t> checkpoints;
  std::vector<std::vector<double>> checkpoint_errors;  // [checkpoint][run]

  std::uint64_t control_steps = 0;
  std::uint64_t control_violations = 0;  // |U_t| > u_max
  double max_abs_u = 0.0;

  double x2_se(std::size_t t) const;
  bool operator==(const EnsembleStats&) const = default;
};

EnsembleStats run_ensemble(const SystemParams& params, const ControllerConfig& config,
                           std::size_t horizon, std::size_t n_runs, std::uint64_t master_seed,
                           const EnsembleOptions& options = {});

struct TailComparisonRow {
  BigIndex i;
  bool observed;
  double freq;  // NaN when not observed
  double se;
  double bound;
  bool pass;
};

std::vector<TailComparisonRow> compare_tail_bound(const EnsembleStats& stats,
                                                  const ExcitationCertificate& cert,
                                                  const std::vector<BigIndex>& checkpoints);

struct StableBoundReport {
  bool pass;
  double max_ratio;  // max_t (mean + 3 SE) / bound
  std::size_t worst_t;
  double bound;
};

StableBoundReport verify_stable_bound(const EnsembleStats& stats, const StableCaseBound& bound);

struct PlateauReport {
  bool pass;
  double early_max;
  double late_max;
  double late_se;
};

// Late-time growth check on the mean X_t^2 curve.
PlateauReport check_plateau(const EnsembleStats& stats);

std::string msq_csv(const EnsembleStats& stats);
std::string theta_csv(const EnsembleStats& stats);
std::string td_csv(const EnsembleStats& stats);
std::string tailcmp_csv(const std::vector<TailComparisonRow>& rows);

}  // namespace aicmss
