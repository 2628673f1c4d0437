#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

#include "aicmss/sim.hpp"

namespace aicmss {

// Burn-in indices exceed 64 bits for realistic certificates.
using BigIndex = boost::multiprecision::uint128_t;

std::string to_string(const BigIndex& i);
BigIndex parse_big_index(const std::string& text);

double folded_normal_mean(double mu, double sigma);

double excitation_f(double zeta1, double zeta2, double d_sat, double sigma_w);
// log f; -inf when zeta1 == 0. Stays finite where f itself underflows.
double excitation_f_log(double zeta1, double zeta2, double d_sat, double sigma_w);
double excitation_g(double zeta2, double c_excite);
double conditional_abs_expectation_h(double zeta1, double zeta2, double x_hat, double d_sat,
                                     double sigma_w);

struct GammaOptions {
  std::size_t grid_points = 100'000;
  double tolerance = 1e-10;
};

double excitation_max_fg(double phi, const ControllerConfig& config, double sigma_w);
double compute_gamma(const ControllerConfig& config, double sigma_w, const GammaOptions& opts = {});

struct SmallBall {
  double p;
  double gamma_sb;
};

SmallBall small_ball_params(double gamma, double psi, double sigma_w, double u_max);

double covariate_growth_q(const SystemParams& params, const ControllerConfig& config);

struct TailConstants {
  double c1;
  double c2;
  double c3;
  double c4;
  double log_c4;
};

// Upper end of the admissible estimation radius d.
double max_estimation_radius(double gamma_sb, double sigma_w);
double default_estimation_radius(double gamma_sb, double sigma_w, double b);

TailConstants tail_bound_constants(double d, double p, double q, double gamma_sb, double sigma_w);

struct BurnIn {
  BigIndex m_burn;
  BigIndex m_prime;
};

BurnIn burn_in_times(double d, double p, double q, double gamma_sb, double sigma_w);
// M' for h(i) = i^{4/3} e^{-c3 i} exp(log_c4) / 3.
BigIndex burn_in_m_prime(double c3, double log_c4);
// log h(i), evaluated in quad precision.
double burn_in_log_h(const BigIndex& i, double c3, double log_c4);

struct ExcitationCertificate {
  double psi;
  double gamma;
  double p;
  double gamma_sb;
  double q;
  double d;
  double c1, c2, c3, c4;
  double log_c4;
  BigIndex m_burn;
  BigIndex m_prime;

  bool operator==(const ExcitationCertificate&) const = default;
};

ExcitationCertificate make_certificate(const SystemParams& params, const ControllerConfig& config,
                                       double psi = 0.5, std::optional<double> d = std::nullopt,
                                       const GammaOptions& gamma_opts = {});

// name=value lines, 17 significant digits.
std::string certificate_to_text(const ExcitationCertificate& cert);
ExcitationCertificate certificate_from_text(const std::string& text);

struct TailBound {
  double raw;
  double clamped;  // min(raw, 1)
  double log_raw;
};

TailBound estimation_tail_bound(const BigIndex& i, const ExcitationCertificate& cert);

// Closed-form value of sum_k k^2 sum_{i >= k-1} P_i with P_i = 1 for i <= M and
// the tail bound afterwards.
double summability_total(double c3, double c4, double m_burn);
// Same double sum truncated at k <= k_max, summed term by term.
double summability_partial(double c3, double c4, std::size_t m_burn, std::size_t k_max);

struct StableCaseBound {
  double lambda;
  double s1;
  double s2;
  double d1;
  double d2;
  double e_lambda;
  double beta;
  double bound;
};

StableCaseBound stable_case_bound(const SystemParams& params, const ControllerConfig& config,
                                  double lambda);

double deviation_bound(std::size_t k, double d, const SystemParams& params,
                       const ControllerConfig& config);

}  // namespace aicmss
