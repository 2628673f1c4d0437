#include "aicmss/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cstdint>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "aicmss/csv.hpp"
#include "aicmss/errors.hpp"

namespace aicmss {

void RunningMoments::add(double x) {
  ++n_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
}

void RunningMoments::merge(const RunningMoments& other) {
  if (other.n_ == 0) return;
  if (n_ == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(n_), nb = static_cast<double>(other.n_);
  const double n = na + nb;
  const double delta = other.mean_ - mean_;
  mean_ += delta * nb / n;
  m2_ += other.m2_ + delta * delta * na * nb / n;
  n_ += other.n_;
}

double RunningMoments::variance() const {
  return n_ < 2 ? 0.0 : std::max(0.0, m2_ / static_cast<double>(n_ - 1));
}

double RunningMoments::stddev() const { return std::sqrt(variance()); }

namespace {

double distance(const ParameterEstimate& e, const Vec2& theta) {
  return std::hypot(e.a_hat - theta[0], e.b_hat - theta[1]);
}

}  // namespace

bool SeriesStats::operator==(const SeriesStats& other) const {
  auto same = [](const std::vector<double>& x, const std::vector<double>& y) {
    return x.size() == y.size() &&
           std::equal(x.begin(), x.end(), y.begin(), [](double a, double b) {
             return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
           });
  };
  return same(mean, other.mean) && same(std, other.std);
}

CommitmentTime commitment_time(const Trajectory& trajectory, double d, const Vec2& theta_star) {
  require(d > 0.0, ErrorKind::invalid_argument, "commitment radius d must be > 0");
  const auto& est = trajectory.estimates;
  require(est.size() >= 2, ErrorKind::invalid_argument, "trajectory carries no estimates");
  for (std::size_t i = 1; i < est.size(); ++i)
    require(est[i].has_value(), ErrorKind::invalid_argument, "trajectory has a missing estimate");

  CommitmentTime out{d, std::nullopt, trajectory.horizon};
  std::size_t k = est.size();
  while (k > 1 && distance(*est[k - 1], theta_star) <= d) --k;
  if (k < est.size()) out.value = k;
  return out;
}

double EnsembleStats::x2_se(std::size_t t) const {
  return x2.std.at(t) / std::sqrt(static_cast<double>(n_runs));
}

namespace {

struct ChunkAccumulator {
  std::vector<RunningMoments> x2, a_hat, b_hat, err;
  std::vector<RunningMoments> dev2;
  std::uint64_t steps = 0;
  std::uint64_t violations = 0;
  double max_abs_u = 0.0;

  explicit ChunkAccumulator(std::size_t horizon, bool estimates, bool paired)
      : x2(horizon + 1),
        a_hat(estimates ? horizon : 0),
        b_hat(estimates ? horizon : 0),
        err(estimates ? horizon : 0),
        dev2(paired ? horizon + 1 : 0) {}

  void merge(const ChunkAccumulator& o) {
    for (std::size_t i = 0; i < x2.size(); ++i) x2[i].merge(o.x2[i]);
    for (std::size_t i = 0; i < a_hat.size(); ++i) {
      a_hat[i].merge(o.a_hat[i]);
      b_hat[i].merge(o.b_hat[i]);
      err[i].merge(o.err[i]);
    }
    for (std::size_t i = 0; i < dev2.size(); ++i) dev2[i].merge(o.dev2[i]);
    steps += o.steps;
    violations += o.violations;
    max_abs_u = std::max(max_abs_u, o.max_abs_u);
  }
};

SeriesStats to_series(const std::vector<RunningMoments>& m, std::size_t first_valid) {
  SeriesStats s;
  s.mean.assign(m.size(), std::numeric_limits<double>::quiet_NaN());
  s.std.assign(m.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = first_valid; i < m.size(); ++i) {
    s.mean[i] = m[i].mean();
    s.std[i] = m[i].stddev();
  }
  return s;
}

}  // namespace

EnsembleStats run_ensemble(const SystemParams& params, const ControllerConfig& config,
                           std::size_t horizon, std::size_t n_runs, std::uint64_t master_seed,
                           const EnsembleOptions& options) {
  require(n_runs >= 1, ErrorKind::invalid_argument, "n_runs must be >= 1");
  require(horizon >= 2, ErrorKind::invalid_argument, "horizon must be >= 2");
  require(options.chunk_size >= 1, ErrorKind::invalid_argument, "chunk_size must be >= 1");
  require(!(options.uncontrolled && options.paired_reference), ErrorKind::invalid_argument,
          "paired reference runs need a controlled system");
  for (std::size_t c : options.error_checkpoints)
    require(c >= 1 && c < horizon, ErrorKind::invalid_argument,
            "error checkpoints must lie in [1, horizon - 1]");

  const bool estimates = !options.uncontrolled;
  const bool paired = options.paired_reference;
  const Vec2 theta = params.theta();

  EnsembleStats stats{params};
  stats.horizon = horizon;
  stats.n_runs = n_runs;
  stats.uncontrolled = options.uncontrolled;
  stats.paired = paired;
  if (!options.uncontrolled) stats.config = config;
  stats.checkpoints = options.error_checkpoints;
  stats.checkpoint_errors.assign(options.error_checkpoints.size(), std::vector<double>(n_runs));
  if (options.commitment_radius) stats.commitment.resize(n_runs, CommitmentTime{});
  if (paired) stats.max_abs_dev.resize(n_runs);

  const std::size_t n_chunks = (n_runs + options.chunk_size - 1) / options.chunk_size;
  std::vector<ChunkAccumulator> chunks(n_chunks, ChunkAccumulator(horizon, estimates, paired));

  auto run_chunk = [&](std::size_t c) {
    ChunkAccumulator& acc = chunks[c];
    const std::size_t begin = c * options.chunk_size;
    const std::size_t end = std::min(n_runs, begin + options.chunk_size);
    for (std::size_t r = begin; r < end; ++r) {
      const RandomStreams streams(master_seed, r);
      SimulationOptions sim_opts;
      sim_opts.keep_raw_log = false;
      const Trajectory tr = options.uncontrolled ? simulate_uncontrolled(params, horizon, streams)
                                                 : simulate_closed_loop(params, config, horizon, streams, sim_opts);
      for (std::size_t t = 0; t <= horizon; ++t) {
        const double x = tr.x(t);
        acc.x2[t].add(x * x);
      }
      if (!options.uncontrolled) {
        for (const StepRecord& rec : tr.records) {
          const double au = std::abs(rec.u);
          acc.max_abs_u = std::max(acc.max_abs_u, au);
          if (!(au <= config.u_max())) ++acc.violations;
        }
        acc.steps += tr.records.size();
      }
      if (estimates) {
        for (std::size_t t = 1; t < horizon; ++t) {
          const ParameterEstimate& e = *tr.estimates[t];
          acc.a_hat[t].add(e.a_hat);
          acc.b_hat[t].add(e.b_hat);
          acc.err[t].add(distance(e, theta));
        }
        for (std::size_t k = 0; k < options.error_checkpoints.size(); ++k)
          stats.checkpoint_errors[k][r] = distance(*tr.estimates[options.error_checkpoints[k]], theta);
        if (options.commitment_radius)
          stats.commitment[r] = commitment_time(tr, *options.commitment_radius, theta);
      }
      if (paired) {
        const Trajectory ref = simulate_reference(params, config, horizon, streams);
        double worst = 0.0;
        for (std::size_t t = 0; t <= horizon; ++t) {
          const double dev = tr.x(t) - ref.x(t);
          acc.dev2[t].add(dev * dev);
          worst = std::max(worst, std::abs(dev));
        }
        stats.max_abs_dev[r] = worst;
      }
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(options.workers, n_chunks));
  if (workers == 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) run_chunk(c);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t c = next++; c < n_chunks; c = next++) run_chunk(c);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  ChunkAccumulator total(horizon, estimates, paired);
  for (const ChunkAccumulator& c : chunks) total.merge(c);

  stats.x2 = to_series(total.x2, 0);
  if (estimates) {
    stats.a_hat = to_series(total.a_hat, 1);
    stats.b_hat = to_series(total.b_hat, 1);
    stats.est_error = to_series(total.err, 1);
  }
  if (paired) {
    stats.mean_dev2.resize(horizon + 1);
    for (std::size_t t = 0; t <= horizon; ++t) stats.mean_dev2[t] = total.dev2[t].mean();
  }
  stats.control_steps = total.steps;
  stats.control_violations = total.violations;
  stats.max_abs_u = total.max_abs_u;
  return stats;
}

std::vector<TailComparisonRow> compare_tail_bound(const EnsembleStats& stats,
                                                  const ExcitationCertificate& cert,
                                                  const std::vector<BigIndex>& checkpoints) {
  std::vector<TailComparisonRow> rows;
  const double n = static_cast<double>(stats.n_runs);
  for (const BigIndex& i : checkpoints) {
    const TailBound bound = estimation_tail_bound(i, cert);
    TailComparisonRow row{i, false, std::numeric_limits<double>::quiet_NaN(),
                          std::numeric_limits<double>::quiet_NaN(), bound.raw, false};
    for (std::size_t k = 0; k < stats.checkpoints.size(); ++k) {
      if (BigIndex(stats.checkpoints[k]) != i) continue;
      const auto& errs = stats.checkpoint_errors[k];
      const auto exceed = std::count_if(errs.begin(), errs.end(), [&](double e) { return e > cert.d; });
      row.observed = true;
      row.freq = static_cast<double>(exceed) / n;
      row.se = std::sqrt(row.freq * (1.0 - row.freq) / n);
      break;
    }
    // An unobserved index can only be confirmed when the bound is vacuous.
    row.pass = row.observed ? row.freq <= bound.raw + 3.0 * row.se : bound.raw >= 1.0;
    rows.push_back(row);
  }
  return rows;
}

StableBoundReport verify_stable_bound(const EnsembleStats& stats, const StableCaseBound& bound) {
  require(std::abs(stats.params.a()) < 1.0, ErrorKind::inapplicable,
          "stable-case bound requires |a| < 1");
  StableBoundReport rep{true, 0.0, 0, bound.bound};
  for (std::size_t t = 0; t < stats.x2.mean.size(); ++t) {
    const double upper = stats.x2.mean[t] + 3.0 * stats.x2_se(t);
    const double ratio = upper / bound.bound;
    if (ratio > rep.max_ratio || t == 0) {
      rep.max_ratio = ratio;
      rep.worst_t = t;
    }
    if (!(upper <= bound.bound)) rep.pass = false;
  }
  return rep;
}

PlateauReport check_plateau(const EnsembleStats& stats) {
  const std::size_t mid = stats.horizon / 2;
  PlateauReport rep{false, 0.0, 0.0, 0.0};
  for (std::size_t t = 0; t <= mid; ++t) rep.early_max = std::max(rep.early_max, stats.x2.mean[t]);
  std::size_t late_t = mid;
  for (std::size_t t = mid; t <= stats.horizon; ++t) {
    if (stats.x2.mean[t] >= rep.late_max) {
      rep.late_max = stats.x2.mean[t];
      late_t = t;
    }
  }
  rep.late_se = stats.x2_se(late_t);
  rep.pass = rep.late_max <= rep.early_max + 3.0 * rep.late_se;
  return rep;
}

std::string msq_csv(const EnsembleStats& stats) {
  std::ostringstream out;
  out << "t,mean_x2,std_x2" << (stats.paired ? ",mean_dev2" : "") << '\n';
  for (std::size_t t = 0; t <= stats.horizon; ++t) {
    out << t << ',' << format_double(stats.x2.mean[t]) << ',' << format_double(stats.x2.std[t]);
    if (stats.paired) out << ',' << format_double(stats.mean_dev2[t]);
    out << '\n';
  }
  return out.str();
}

std::string theta_csv(const EnsembleStats& stats) {
  std::ostringstream out;
  out << "t,mean_a_hat,std_a_hat,mean_b_hat,std_b_hat\n";
  if (stats.uncontrolled) return out.str();
  for (std::size_t t = 1; t < stats.horizon; ++t) {
    out << t << ',' << format_double(stats.a_hat.mean[t]) << ',' << format_double(stats.a_hat.std[t]) << ','
        << format_double(stats.b_hat.mean[t]) << ',' << format_double(stats.b_hat.std[t]) << '\n';
  }
  return out.str();
}

std::string td_csv(const EnsembleStats& stats) {
  std::ostringstream out;
  out << "run,T_d,censored\n";
  for (std::size_t r = 0; r < stats.commitment.size(); ++r) {
    const CommitmentTime& c = stats.commitment[r];
    out << r << ',';
    if (c.value) out << *c.value;
    out << ',' << (c.censored() ? 1 : 0) << '\n';
  }
  return out.str();
}

std::string tailcmp_csv(const std::vector<TailComparisonRow>& rows) {
  std::ostringstream out;
  out << "i,freq,se,bound,pass\n";
  for (const TailComparisonRow& r : rows) {
    out << to_string(r.i) << ',' << format_double(r.freq) << ',' << format_double(r.se) << ','
        << format_double(r.bound) << ',' << (r.pass ? 1 : 0) << '\n';
  }
  return out.str();
}

}  // namespace aicmss
