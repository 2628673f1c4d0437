#include "aicmss/commands.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "aicmss/bmsb.hpp"
#include "aicmss/csv.hpp"
#include "aicmss/ensemble.hpp"
#include "aicmss/errors.hpp"
#include "aicmss/normal.hpp"

namespace aicmss {

namespace fs = std::filesystem;

bool CommandResult::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

std::string manifest_text(const CommandResult& result) {
  std::ostringstream out;
  out << "status=" << (result.ok() ? "pass" : "fail") << '\n';
  for (const Check& c : result.checks)
    out << (c.pass ? "PASS " : "FAIL ") << c.name << (c.detail.empty() ? "" : ": " + c.detail) << '\n';
  for (const fs::path& f : result.files) out << "file " << f.generic_string() << '\n';
  return out.str();
}

namespace {

std::string num(double x) { return format_double(x); }

void emit(CommandResult& result, const fs::path& path, const std::string& content) {
  write_file(path, content);
  result.files.push_back(path);
}

void finish(CommandResult& result, const fs::path& out) {
  const fs::path manifest = out / "manifest.txt";
  result.files.push_back(manifest);
  write_file(manifest, manifest_text(result));
}

std::string trajectory_csv(const Trajectory& tr) {
  std::ostringstream out;
  out << "t,x,u,v,w,gain,a_hat,b_hat\n";
  for (const StepRecord& r : tr.records) {
    out << r.t << ',' << num(r.x) << ',' << num(r.u) << ',' << num(r.v) << ',' << num(r.w) << ','
        << num(r.gain) << ',' << num(r.a_hat) << ',' << num(r.b_hat) << '\n';
  }
  out << tr.horizon << ',' << num(tr.final_x) << ",,,,,,\n";
  return out.str();
}

double default_lambda(const ExperimentConfig& cfg) {
  if (cfg.lambda) return *cfg.lambda;
  const double a = cfg.system.a();
  return 0.5 * (a * a + 1.0);
}

std::string stable_bound_text(const StableCaseBound& s) {
  std::ostringstream out;
  out.precision(17);
  out << "lambda=" << s.lambda << "\ns1=" << s.s1 << "\ns2=" << s.s2 << "\nd1=" << s.d1 << "\nd2=" << s.d2
      << "\ne_lambda=" << s.e_lambda << "\nbeta=" << s.beta << "\nbound=" << s.bound << '\n';
  return out.str();
}

// Closed-loop ensemble plus every check that applies to the plant.
void ensemble_block(const ExperimentConfig& cfg, const fs::path& dir, const std::string& label,
                    CommandResult& result) {
  const ExcitationCertificate cert = make_certificate(cfg.system, cfg.controller, cfg.psi, cfg.d);
  emit(result, dir / "certificate.txt", certificate_to_text(cert));

  const double a = cfg.system.a();
  const bool marginal = std::abs(a) == 1.0;
  const double d_star = default_estimation_radius(cert.gamma_sb, cfg.system.sigma_w(), cfg.system.b());
  const double radius = cfg.d.value_or(d_star);

  EnsembleOptions opts;
  opts.workers = cfg.workers;
  opts.paired_reference = true;
  opts.commitment_radius = radius;
  opts.error_checkpoints = {std::min<std::size_t>(100, cfg.horizon - 1), cfg.horizon - 1};
  const EnsembleStats stats =
      run_ensemble(cfg.system, cfg.controller, cfg.horizon, cfg.n_runs, cfg.master_seed, opts);

  emit(result, dir / "msq.csv", msq_csv(stats));
  emit(result, dir / "theta.csv", theta_csv(stats));
  emit(result, dir / "td.csv", td_csv(stats));
  const auto rows = compare_tail_bound(stats, cert, {cert.m_burn});
  emit(result, dir / "tailcmp.csv", tailcmp_csv(rows));

  const std::string p = label + ".";
  result.checks.push_back({p + "g1_constraint",
                           stats.control_violations == 0 && stats.control_steps == cfg.n_runs * cfg.horizon,
                           "violations=" + std::to_string(stats.control_violations) +
                               " steps=" + std::to_string(stats.control_steps) + " max|u|=" + num(stats.max_abs_u)});
  const PlateauReport plateau = check_plateau(stats);
  result.checks.push_back({p + "msq_plateau", plateau.pass,
                           "early_max=" + num(plateau.early_max) + " late_max=" + num(plateau.late_max) +
                               " late_se=" + num(plateau.late_se)});

  const std::size_t last = cfg.horizon - 1;
  const double da = std::abs(stats.a_hat.mean[last] - a);
  const double db = std::abs(stats.b_hat.mean[last] - cfg.system.b());
  result.checks.push_back({p + "theta_final", da <= 0.05 && db <= 0.05,
                           "mean_a_hat=" + num(stats.a_hat.mean[last]) + " mean_b_hat=" + num(stats.b_hat.mean[last])});
  const std::size_t early = std::min<std::size_t>(100, last);
  result.checks.push_back({p + "estimate_convergence",
                           early == last || stats.est_error.mean[last] < stats.est_error.mean[early],
                           "err[" + std::to_string(early) + "]=" + num(stats.est_error.mean[early]) + " err[" +
                               std::to_string(last) + "]=" + num(stats.est_error.mean[last])});
  bool tail_ok = std::all_of(rows.begin(), rows.end(), [](const TailComparisonRow& r) { return r.pass; });
  result.checks.push_back({p + "tail_bound", tail_ok,
                           "i=" + to_string(rows.front().i) + " bound=" + num(rows.front().bound) +
                               (rows.front().observed ? " freq=" + num(rows.front().freq) : " freq=unobserved")});

  if (!marginal) {
    const StableCaseBound sb = stable_case_bound(cfg.system, cfg.controller, default_lambda(cfg));
    emit(result, dir / "stable_bound.txt", stable_bound_text(sb));
    const StableBoundReport rep = verify_stable_bound(stats, sb);
    result.checks.push_back({p + "stable_bound", rep.pass,
                             "bound=" + num(rep.bound) + " max_ratio=" + num(rep.max_ratio)});
  } else {
    std::size_t checked = 0, broken = 0;
    for (std::size_t r = 0; r < stats.commitment.size(); ++r) {
      const CommitmentTime& c = stats.commitment[r];
      if (c.censored()) continue;
      ++checked;
      if (stats.max_abs_dev[r] > deviation_bound(*c.value, radius, cfg.system, cfg.controller)) ++broken;
    }
    result.checks.push_back({p + "deviation_envelope", broken == 0,
                             "runs_checked=" + std::to_string(checked) + " exceeded=" + std::to_string(broken)});
  }
}

}  // namespace

CommandResult cmd_simulate(const ExperimentConfig& cfg, const fs::path& out) {
  CommandResult result;
  const Trajectory tr =
      simulate_closed_loop(cfg.system, cfg.controller, cfg.horizon, RandomStreams(cfg.master_seed, 0));
  emit(result, out / "trajectory.csv", trajectory_csv(tr));
  const bool g1 = std::all_of(tr.records.begin(), tr.records.end(),
                              [&](const StepRecord& r) { return std::abs(r.u) <= cfg.controller.u_max(); });
  result.checks.push_back({"g1_constraint", g1, ""});
  finish(result, out);
  return result;
}

CommandResult cmd_ensemble(const ExperimentConfig& cfg, const fs::path& out) {
  CommandResult result;
  ensemble_block(cfg, out, "ensemble", result);
  finish(result, out);
  return result;
}

CommandResult cmd_bounds(const ExperimentConfig& cfg, const fs::path& out) {
  CommandResult result;
  const ExcitationCertificate cert = make_certificate(cfg.system, cfg.controller, cfg.psi, cfg.d);
  emit(result, out / "certificate.txt", certificate_to_text(cert));

  const double cap = std::min(cfg.controller.c_excite() / 2.0, cfg.system.sigma_w() * kSqrt2OverPi);
  result.checks.push_back({"gamma_range", cert.gamma > 0.0 && cert.gamma <= cap,
                           "gamma=" + num(cert.gamma) + " cap=" + num(cap)});
  result.checks.push_back({"p_range", cert.p > 0.0 && cert.p < 1.0, "p=" + num(cert.p)});
  result.checks.push_back({"c3_range", cert.c3 > 0.0 && cert.c3 < cert.p * cert.p / 30.0, "c3=" + num(cert.c3)});
  bool below = true;
  for (BigIndex i = cert.m_prime; i <= cert.m_prime + 10'000; ++i)
    below = below && burn_in_log_h(i, cert.c3, cert.log_c4) < 0.0;
  result.checks.push_back({"m_prime_window", below, "m_prime=" + to_string(cert.m_prime)});
  result.checks.push_back({"m_burn", cert.m_burn >= 1 && cert.m_burn >= cert.m_prime,
                           "m_burn=" + to_string(cert.m_burn)});

  if (std::abs(cfg.system.a()) < 1.0) {
    const StableCaseBound sb = stable_case_bound(cfg.system, cfg.controller, default_lambda(cfg));
    emit(result, out / "stable_bound.txt", stable_bound_text(sb));
  }
  finish(result, out);
  return result;
}

CommandResult cmd_bmsb(const ExperimentConfig& cfg, const BmsbOptions& opts, const fs::path& out) {
  require(!opts.prefix_times.empty(), ErrorKind::invalid_argument, "no prefix times given");
  CommandResult result;
  const ExcitationCertificate cert = make_certificate(cfg.system, cfg.controller, cfg.psi, cfg.d);
  const std::size_t t_max = *std::max_element(opts.prefix_times.begin(), opts.prefix_times.end());
  const RandomStreams streams(cfg.master_seed, 0);
  const Trajectory tr = simulate_closed_loop(cfg.system, cfg.controller, std::max(cfg.horizon, t_max + 1), streams);
  for (std::size_t t : opts.prefix_times) {
    const TrajectoryPrefix prefix = make_prefix(tr, t);
    const BranchReport rep = verify_small_ball(prefix, cert, opts.phi_count, opts.n_branches, streams);
    emit(result, out / ("bmsb_t" + std::to_string(t) + ".csv"), branch_report_csv(rep));
    const std::string name = "t" + std::to_string(t);
    result.checks.push_back({name + ".small_ball", rep.p_violations() == 0,
                             "directions=" + std::to_string(rep.directions.size()) +
                                 " violations=" + std::to_string(rep.p_violations()) + " p=" + num(cert.p)});
    result.checks.push_back({name + ".mean_lower_bound", rep.mean_violations() == 0,
                             "violations=" + std::to_string(rep.mean_violations()) + " gamma=" + num(cert.gamma)});
  }
  finish(result, out);
  return result;
}

CommandResult cmd_reproduce_fig1(const ExperimentConfig& cfg, const fs::path& out) {
  CommandResult result;
  for (const char* name : {"system1", "system2", "system3"}) {
    ExperimentConfig sys = preset(name);
    sys.horizon = cfg.horizon;
    sys.n_runs = cfg.n_runs;
    sys.master_seed = cfg.master_seed;
    sys.workers = cfg.workers;
    ensemble_block(sys, out / name, name, result);
  }

  const ExperimentConfig s3 = preset("system3");
  EnsembleOptions opts;
  opts.workers = cfg.workers;
  opts.uncontrolled = true;
  const EnsembleStats open =
      run_ensemble(s3.system, s3.controller, cfg.horizon, cfg.n_runs, cfg.master_seed, opts);
  emit(result, out / "system3_uncontrolled" / "msq.csv", msq_csv(open));
  const double expected = static_cast<double>(cfg.horizon) * s3.system.sigma_w() * s3.system.sigma_w();
  const double got = open.x2.mean[cfg.horizon];
  result.checks.push_back({"system3_uncontrolled.random_walk_growth", std::abs(got - expected) <= 0.1 * expected,
                           "mean_x2=" + num(got) + " expected=" + num(expected)});
  finish(result, out);
  return result;
}

}  // namespace aicmss
