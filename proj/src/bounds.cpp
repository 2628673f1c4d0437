#include "aicmss/bounds.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "aicmss/errors.hpp"
#include "aicmss/normal.hpp"

namespace aicmss {

using Quad = boost::multiprecision::cpp_bin_float_quad;

std::string to_string(const BigIndex& i) { return i.str(); }

BigIndex parse_big_index(const std::string& text) {
  require(!text.empty() && text.find_first_not_of("0123456789") == std::string::npos,
          ErrorKind::invalid_argument, "not a non-negative integer: '" + text + "'");
  require(text.size() <= 39, ErrorKind::invalid_argument, "integer too large: " + text);
  return BigIndex(text);
}

double folded_normal_mean(double mu, double sigma) {
  require(sigma > 0.0, ErrorKind::invalid_argument, "folded_normal_mean: sigma must be > 0");
  return sigma * kSqrt2OverPi * std::exp(-mu * mu / (2.0 * sigma * sigma)) +
         mu * std::erf(mu / (std::numbers::sqrt2 * sigma));
}

namespace {

void check_levels(double d_sat, double sigma_w) {
  require(d_sat > 0.0, ErrorKind::invalid_argument, "saturation level D must be > 0");
  require(sigma_w > 0.0, ErrorKind::invalid_argument, "sigma_w must be > 0");
}

}  // namespace

// f = 2 s L(D|zeta2| / s) with s = sigma_w |zeta1|, the same function as the
// exp/erf closed form but free of cancellation when |zeta2| >> |zeta1|.
double excitation_f(double zeta1, double zeta2, double d_sat, double sigma_w) {
  check_levels(d_sat, sigma_w);
  if (zeta1 == 0.0) return 0.0;
  const double s = sigma_w * std::abs(zeta1);
  if (zeta2 == 0.0) return s * kSqrt2OverPi;
  return 2.0 * s * normal_loss(d_sat * std::abs(zeta2) / s);
}

double excitation_f_log(double zeta1, double zeta2, double d_sat, double sigma_w) {
  check_levels(d_sat, sigma_w);
  if (zeta1 == 0.0) return -std::numeric_limits<double>::infinity();
  const double s = sigma_w * std::abs(zeta1);
  if (zeta2 == 0.0) return std::log(s * kSqrt2OverPi);
  return std::log(2.0 * s) + log_normal_loss(d_sat * std::abs(zeta2) / s);
}

double excitation_g(double zeta2, double c_excite) {
  require(c_excite > 0.0, ErrorKind::invalid_argument, "excitation_g: C must be > 0");
  return std::abs(zeta2) * c_excite / 2.0;
}

double conditional_abs_expectation_h(double zeta1, double zeta2, double x_hat, double d_sat,
                                     double sigma_w) {
  check_levels(d_sat, sigma_w);
  require(zeta1 != 0.0, ErrorKind::invalid_argument, "h requires zeta1 != 0");
  require(zeta2 != 0.0, ErrorKind::invalid_argument, "h requires zeta2 != 0");
  const double s = sigma_w * std::abs(zeta1);
  const double m1 = zeta1 * x_hat - zeta2 * d_sat;
  const double m2 = zeta1 * x_hat + zeta2 * d_sat;
  if (zeta2 < 0.0) return s * normal_loss(-m2 / s) + s * normal_loss(m1 / s);
  return s * normal_loss(-m1 / s) + s * normal_loss(m2 / s);
}

double excitation_max_fg(double phi, const ControllerConfig& config, double sigma_w) {
  const double z1 = std::cos(phi), z2 = std::sin(phi);
  return std::max(excitation_f(z1, z2, config.d_sat(), sigma_w), excitation_g(z2, config.c_excite()));
}

double compute_gamma(const ControllerConfig& config, double sigma_w, const GammaOptions& opts) {
  require(sigma_w > 0.0, ErrorKind::invalid_argument, "sigma_w must be > 0");
  require(opts.grid_points >= 3, ErrorKind::invalid_argument, "gamma grid needs >= 3 points");
  const double pi = std::numbers::pi;
  const std::size_t n = opts.grid_points;
  auto phi_at = [&](std::size_t k) { return -pi + 2.0 * pi * static_cast<double>(k) / (n - 1); };
  auto obj = [&](double phi) { return excitation_max_fg(phi, config, sigma_w); };

  std::size_t best = 0;
  double best_val = obj(phi_at(0));
  for (std::size_t k = 1; k < n; ++k) {
    const double v = obj(phi_at(k));
    if (v < best_val) {
      best_val = v;
      best = k;
    }
  }

  double lo = phi_at(best == 0 ? 0 : best - 1);
  double hi = phi_at(std::min(best + 1, n - 1));
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
  double f1 = obj(x1), f2 = obj(x2);
  while (hi - lo > opts.tolerance) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = obj(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = obj(x2);
    }
  }
  const double gamma = std::min({best_val, f1, f2, obj(0.5 * (lo + hi))});
  require(gamma > 0.0, ErrorKind::internal, "compute_gamma: non-positive excitation level");
  return gamma;
}

SmallBall small_ball_params(double gamma, double psi, double sigma_w, double u_max) {
  require(psi > 0.0 && psi < 1.0, ErrorKind::invalid_argument, "psi must lie in (0, 1)");
  require(gamma > 0.0, ErrorKind::invalid_argument, "gamma must be > 0");
  require(sigma_w > 0.0 && u_max > 0.0, ErrorKind::invalid_argument,
          "sigma_w and U_max must be > 0");
  const double one_minus = 1.0 - psi;
  const double p =
      1.0 / (1.0 + 2.0 * (sigma_w * sigma_w + u_max * u_max) / (one_minus * one_minus * gamma * gamma));
  return {p, psi * psi * gamma * gamma};
}

double covariate_growth_q(const SystemParams& params, const ControllerConfig& config) {
  const double u = config.u_max();
  const double r = std::abs(params.b()) * u + params.sigma_w() + std::abs(params.x0());
  return r * r + u * u;
}

double max_estimation_radius(double gamma_sb, double sigma_w) {
  require(gamma_sb > 0.0 && sigma_w > 0.0, ErrorKind::invalid_argument,
          "gamma_sb and sigma_w must be > 0");
  return 90.0 * sigma_w / std::sqrt(10.0 * gamma_sb);
}

double default_estimation_radius(double gamma_sb, double sigma_w, double b) {
  const double m = max_estimation_radius(gamma_sb, sigma_w);
  const double d_star = std::min({m / 2.0, 0.5, std::abs(b) / 2.0});
  return std::min(0.9 * m, d_star);
}

TailConstants tail_bound_constants(double d, double p, double q, double gamma_sb, double sigma_w) {
  const double cap = max_estimation_radius(gamma_sb, sigma_w);
  if (!(d > 0.0 && d < cap)) {
    std::ostringstream msg;
    msg << std::setprecision(17) << "estimation radius d = " << d
        << " outside the admissible range (0, 90 sigma_w / sqrt(10 gamma_sb)) = (0, " << cap << ")";
    fail(ErrorKind::domain, msg.str());
  }
  require(p > 0.0 && p < 1.0, ErrorKind::invalid_argument, "p must lie in (0, 1)");
  require(q > 0.0, ErrorKind::invalid_argument, "q must be > 0");

  TailConstants c{};
  c.c1 = q + gamma_sb;
  c.c2 = 1.0 + 2.0 * std::log(10.0 / p);
  const double s90 = 90.0 * sigma_w;
  c.c3 = gamma_sb * d * d * p * p / (3.0 * s90 * s90);
  c.log_c4 = std::log(3.0) + (2.0 / 3.0) * std::log(c.c1) + (c.c2 - 2.0 * std::log(gamma_sb)) / 3.0;
  c.c4 = std::exp(c.log_c4);
  return c;
}

namespace {

Quad quad_log_h(const BigIndex& i, double c3, double log_c4) {
  const Quad qi(i);
  return -log(Quad(3)) + Quad(4) / 3 * log(qi) - Quad(c3) * qi + Quad(log_c4);
}

BigIndex quad_to_index(const Quad& x) {
  return static_cast<BigIndex>(x);
}

}  // namespace

double burn_in_log_h(const BigIndex& i, double c3, double log_c4) {
  require(i >= 1, ErrorKind::invalid_argument, "burn-in index must be >= 1");
  return static_cast<double>(quad_log_h(i, c3, log_c4));
}

BigIndex burn_in_m_prime(double c3, double log_c4) {
  require(c3 > 0.0 && std::isfinite(c3), ErrorKind::invalid_argument, "c3 must be > 0");
  auto below_one = [&](const BigIndex& i) { return quad_log_h(i, c3, log_c4) < 0; };

  const Quad i_star = Quad(4) / (Quad(3) * Quad(c3));
  require(i_star < Quad(1e36), ErrorKind::domain, "c3 too small: burn-in exceeds 128-bit range");
  BigIndex lo = quad_to_index(floor(i_star));
  BigIndex hi = quad_to_index(ceil(i_star));
  if (lo < 1) lo = 1;
  if (hi < 1) hi = 1;
  // Integer maximum of h sits at floor or ceil of i*.
  if (below_one(lo) && below_one(hi)) return 1;
  if (below_one(hi)) return hi;

  // h decreasing beyond i*: h(lo) >= 1 and h(hi) < 1 after the doubling.
  lo = hi;
  BigIndex step = 1;
  hi = lo + step;
  while (!below_one(hi)) {
    lo = hi;
    step *= 2;
    hi = lo + step;
  }
  while (hi - lo > 1) {
    const BigIndex mid = lo + (hi - lo) / 2;
    if (below_one(mid))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

BurnIn burn_in_times(double d, double p, double q, double gamma_sb, double sigma_w) {
  const TailConstants c = tail_bound_constants(d, p, q, gamma_sb, sigma_w);
  const BigIndex m_prime = burn_in_m_prime(c.c3, c.log_c4);

  const double s90 = 90.0 * sigma_w;
  const double rate = p * p / 10.0 - gamma_sb * d * d * p * p / (s90 * s90);
  const double first = (4.0 * std::log(10.0 / p) - c.c2) / rate;
  require(std::isfinite(first) && first > 0.0 && first < 1e36, ErrorKind::domain,
          "burn-in time M is out of range");
  const BigIndex m_first = quad_to_index(ceil(Quad(first)));
  return {std::max(m_first, m_prime), m_prime};
}

ExcitationCertificate make_certificate(const SystemParams& params, const ControllerConfig& config,
                                       double psi, std::optional<double> d,
                                       const GammaOptions& gamma_opts) {
  ExcitationCertificate cert{};
  cert.psi = psi;
  cert.gamma = compute_gamma(config, params.sigma_w(), gamma_opts);
  const SmallBall sb = small_ball_params(cert.gamma, psi, params.sigma_w(), config.u_max());
  cert.p = sb.p;
  cert.gamma_sb = sb.gamma_sb;
  cert.q = covariate_growth_q(params, config);
  cert.d = d ? *d : default_estimation_radius(cert.gamma_sb, params.sigma_w(), params.b());
  const TailConstants c = tail_bound_constants(cert.d, cert.p, cert.q, cert.gamma_sb, params.sigma_w());
  cert.c1 = c.c1;
  cert.c2 = c.c2;
  cert.c3 = c.c3;
  cert.c4 = c.c4;
  cert.log_c4 = c.log_c4;
  const BurnIn m = burn_in_times(cert.d, cert.p, cert.q, cert.gamma_sb, params.sigma_w());
  cert.m_burn = m.m_burn;
  cert.m_prime = m.m_prime;
  return cert;
}

namespace {

const char* const kCertificateKeys[] = {"psi", "gamma", "p",  "gamma_sb", "q",      "d",     "c1",
                                        "c2",  "c3",    "c4", "log_c4",   "m_burn", "m_prime"};

}  // namespace

std::string certificate_to_text(const ExcitationCertificate& cert) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "psi=" << cert.psi << '\n'
      << "gamma=" << cert.gamma << '\n'
      << "p=" << cert.p << '\n'
      << "gamma_sb=" << cert.gamma_sb << '\n'
      << "q=" << cert.q << '\n'
      << "d=" << cert.d << '\n'
      << "c1=" << cert.c1 << '\n'
      << "c2=" << cert.c2 << '\n'
      << "c3=" << cert.c3 << '\n'
      << "c4=" << cert.c4 << '\n'
      << "log_c4=" << cert.log_c4 << '\n'
      << "m_burn=" << to_string(cert.m_burn) << '\n'
      << "m_prime=" << to_string(cert.m_prime) << '\n';
  return out.str();
}

ExcitationCertificate certificate_from_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos, ErrorKind::invalid_argument, "certificate line without '=': " + line);
    const std::string key = line.substr(0, eq);
    require(std::find(std::begin(kCertificateKeys), std::end(kCertificateKeys), key) !=
                std::end(kCertificateKeys),
            ErrorKind::invalid_argument, "unknown certificate key: " + key);
    require(kv.emplace(key, line.substr(eq + 1)).second, ErrorKind::invalid_argument,
            "duplicate certificate key: " + key);
  }
  for (const char* key : kCertificateKeys)
    require(kv.count(key) == 1, ErrorKind::invalid_argument, std::string("missing certificate key: ") + key);

  auto num = [&](const char* key) {
    const std::string& s = kv.at(key);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    require(used == s.size() && used > 0, ErrorKind::invalid_argument,
            std::string("bad number for ") + key + ": " + s);
    return v;
  };
  ExcitationCertificate c{};
  c.psi = num("psi");
  c.gamma = num("gamma");
  c.p = num("p");
  c.gamma_sb = num("gamma_sb");
  c.q = num("q");
  c.d = num("d");
  c.c1 = num("c1");
  c.c2 = num("c2");
  c.c3 = num("c3");
  c.c4 = num("c4");
  c.log_c4 = num("log_c4");
  c.m_burn = parse_big_index(kv.at("m_burn"));
  c.m_prime = parse_big_index(kv.at("m_prime"));
  return c;
}

TailBound estimation_tail_bound(const BigIndex& i, const ExcitationCertificate& cert) {
  if (i < cert.m_burn) {
    fail(ErrorKind::domain, "tail bound requested at i = " + to_string(i) +
                                " before the burn-in time M = " + to_string(cert.m_burn));
  }
  const Quad qi(i);
  const Quad log_raw = Quad(4) / 3 * log(qi) - Quad(cert.c3) * qi + Quad(cert.log_c4);
  TailBound out{};
  out.log_raw = static_cast<double>(log_raw);
  out.raw = std::exp(out.log_raw);
  out.clamped = std::min(out.raw, 1.0);
  return out;
}

namespace {

// Sum_{m >= 0} m^j r^m for j = 0..4, with om = 1 - r.
std::array<double, 5> geometric_moments(double r, double om) {
  return {1.0 / om, r / (om * om), r * (1.0 + r) / (om * om * om),
          r * (1.0 + 4.0 * r + r * r) / std::pow(om, 4),
          r * (1.0 + 11.0 * r + 11.0 * r * r + r * r * r) / std::pow(om, 5)};
}

// Sum_{m >= n} P(m) r^m for a polynomial P with coefficients e (ascending).
double shifted_poly_series(const std::array<double, 5>& e, double n, double rn,
                           const std::array<double, 5>& g) {
  static constexpr double binom[5][5] = {
      {1, 0, 0, 0, 0}, {1, 1, 0, 0, 0}, {1, 2, 1, 0, 0}, {1, 3, 3, 1, 0}, {1, 4, 6, 4, 1}};
  double total = 0.0;
  for (int j = 0; j < 5; ++j) {
    if (e[j] == 0.0) continue;
    double s = 0.0;
    for (int i = 0; i <= j; ++i) s += binom[j][i] * std::pow(n, j - i) * g[i];
    total += e[j] * s;
  }
  return rn * total;
}

}  // namespace

double summability_total(double c3, double c4, double m_burn) {
  require(c3 > 0.0 && c4 >= 0.0 && m_burn >= 1.0, ErrorKind::invalid_argument,
          "summability_total needs c3 > 0, c4 >= 0, M >= 1");
  const double M = m_burn;
  const double r = std::exp(-c3);
  const double om = -std::expm1(-c3);
  const auto g = geometric_moments(r, om);
  const double rM = std::exp(-c3 * M);

  // sum_{k=1}^M k^2 (M - k + 1) = M (M+1)^2 (M+2) / 12
  const double head = M * (M + 1.0) * (M + 1.0) * (M + 2.0) / 12.0;
  const double sq_sum = M * (M + 1.0) * (2.0 * M + 1.0) / 6.0;
  // T(M) = sum_{i >= M} i^2 r^i
  const double t_m = shifted_poly_series({0, 0, 1, 0, 0}, M, rM, g);
  // sum_{m >= M} (m+1)^2 T(m), T(m) = r^m (m^2 g0 + 2 m g1 + g2)
  const std::array<double, 3> t = {g[2], 2.0 * g[1], g[0]};
  std::array<double, 5> e{};
  const double sq[3] = {1.0, 2.0, 1.0};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) e[i + j] += sq[i] * t[j];
  const double tail = shifted_poly_series(e, M, rM, g);
  return head + c4 * (sq_sum * t_m + tail);
}

double summability_partial(double c3, double c4, std::size_t m_burn, std::size_t k_max) {
  require(c3 > 0.0 && m_burn >= 1, ErrorKind::invalid_argument, "summability_partial needs c3 > 0, M >= 1");
  // inner[i] = i^2 r^i summed from the top down to get suffix sums on [i, k_max].
  std::vector<double> suffix(k_max + 2, 0.0);
  for (std::size_t i = k_max + 1; i-- > 0;) {
    const double di = static_cast<double>(i);
    suffix[i] = suffix[i + 1] + di * di * std::exp(-c3 * di);
  }
  double total = 0.0;
  for (std::size_t k = 1; k <= k_max; ++k) {
    const double dk = static_cast<double>(k);
    const std::size_t lo = k - 1;
    const double ones = lo < m_burn ? static_cast<double>(m_burn - lo) : 0.0;
    const std::size_t start = std::max(lo, m_burn);
    const double tail = start <= k_max ? suffix[start] : 0.0;
    total += dk * dk * (ones + c4 * tail);
  }
  return total;
}

StableCaseBound stable_case_bound(const SystemParams& params, const ControllerConfig& config,
                                  double lambda) {
  const double a = params.a();
  require(std::abs(a) < 1.0, ErrorKind::inapplicable, "stable-case bound requires |a| < 1");
  const double a2 = a * a;
  if (!(lambda > a2 && lambda < 1.0)) {
    std::ostringstream msg;
    msg << "lambda = " << lambda << " outside (a^2, 1) = (" << a2 << ", 1)";
    fail(ErrorKind::domain, msg.str());
  }
  const double b = std::abs(params.b()), u = config.u_max(), sw = params.sigma_w();
  StableCaseBound out{};
  out.lambda = lambda;
  out.s1 = sw * kSqrt2OverPi;
  out.s2 = sw * sw;
  out.d1 = b * u + out.s1;
  out.d2 = b * b * u * u + 2.0 * b * u * out.s1 + out.s2;
  const double aa = std::abs(a);
  out.e_lambda = (aa * out.d1 + std::sqrt(a2 * out.d1 * out.d1 + (lambda - a2) * out.d2)) / (lambda - a2);
  out.beta = a2 * out.e_lambda * out.e_lambda + 2.0 * aa * out.e_lambda * out.d1 + out.d2;
  out.bound = params.x0() * params.x0() + out.beta / (1.0 - lambda);
  return out;
}

double deviation_bound(std::size_t k, double d, const SystemParams& params,
                       const ControllerConfig& config) {
  require(k >= 1, ErrorKind::invalid_argument, "deviation_bound: k must be >= 1");
  const double b = std::abs(params.b());
  if (!(d > 0.0 && d < std::min(1.0, b))) {
    std::ostringstream msg;
    msg << "deviation_bound: d = " << d << " outside (0, min(1, |b|))";
    fail(ErrorKind::domain, msg.str());
  }
  const double D = config.d_sat();
  const double linear = static_cast<double>(k + 1) * b * 2.0 * D;
  const double floor_term = 2.0 * ((b + d) / (1.0 - d) + 3.0 * b) * D;
  return std::max(linear, floor_term);
}

}  // namespace aicmss
