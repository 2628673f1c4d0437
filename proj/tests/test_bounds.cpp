#include <cmath>
#include <numbers>

#include "doctest.h"

#include "aicmss/bounds.hpp"
#include "aicmss/errors.hpp"
#include "aicmss/normal.hpp"
#include "support.hpp"

using namespace aicmss;

namespace {

const double kPi = std::numbers::pi;
const ControllerConfig kStudyController(1.0, 0.1, -1.0, -5.0);

bool throws_kind(ErrorKind kind, auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind() == kind;
  }
  return false;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("normal loss against high-precision values") {
  // 50-digit reference values of pdf(u) - u Q(u)
  const std::pair<double, double> ref[] = {
      {-5.0, 5.0000000534616553383},     {-3.0, 3.0003821543170477236},
      {-1.0, 1.0833154705876862984},     {0.0, 0.39894228040143267794},
      {0.5, 0.19779655740130602959},     {2.9, 0.00054167384866214392137},
      {3.0, 0.00038215431704772359565},  {3.5, 0.000058480918421422438376},
      {5.0, 5.3461655338328149539e-8},   {10.0, 7.4745602545893280366e-25},
      {30.0, 1.6319567340914011894e-199},
  };
  for (auto [u, v] : ref) {
    CAPTURE(u);
    CHECK(rel(normal_loss(u), v) <= 5e-14);
    CHECK(std::abs(log_normal_loss(u) - std::log(v)) <= 2e-14 * std::max(1.0, std::abs(std::log(v))));
  }
  CHECK(std::isfinite(log_normal_loss(200.0)));
  CHECK(normal_loss(200.0) == 0.0);
}

TEST_CASE("folded normal mean") {
  CHECK(folded_normal_mean(0.0, 1.0) == doctest::Approx(std::sqrt(2.0 / kPi)).epsilon(1e-15));
  CHECK(std::abs(folded_normal_mean(10.0, 1.0) - 10.0) <= 1e-6);
  CHECK(throws_kind(ErrorKind::invalid_argument, [] { folded_normal_mean(1.0, 0.0); }));
  for (auto [mu, sigma] : {std::pair{1.0, 1.0}, std::pair{-2.0, 0.5}}) {
    const auto mc = testing::monte_carlo_abs_normal(mu, sigma, 1'000'000, 123);
    CHECK(std::abs(folded_normal_mean(mu, sigma) - mc.mean) <= 3.0 * mc.se);
  }
  testing::Gen gen(2);
  for (int k = 0; k < 1000; ++k) {
    const double mu = gen.normal(0, 3), sigma = gen.uniform(0.01, 5);
    const double m = folded_normal_mean(mu, sigma);
    CHECK(m >= sigma * std::sqrt(2.0 / kPi) * std::exp(-mu * mu / (2 * sigma * sigma)) - 1e-15);
    CHECK(m >= std::abs(mu) * std::erf(std::abs(mu) / (std::sqrt(2.0) * sigma)) - 1e-15);
  }
}

TEST_CASE("excitation f: branch values and quadrature agreement") {
  CHECK(excitation_f(1.0, 0.0, 0.9, 1.0) == doctest::Approx(std::sqrt(2.0 / kPi)).epsilon(1e-15));
  CHECK(excitation_f(0.0, 0.5, 0.9, 1.0) == 0.0);
  CHECK(excitation_f(0.0, 0.0, 0.9, 1.0) == 0.0);
  // 40-digit quadrature of the saturated-branch expectations
  CHECK(rel(excitation_f(0.8, -0.6, 0.9, 1.0), 0.23844258247471801456) <= 1e-13);
  CHECK(rel(excitation_f(0.6, 0.8, 0.9, 1.0), 0.067322940860595604721) <= 1e-13);
  CHECK(std::abs(excitation_f(0.8, -0.6, 0.9, 1.0) - testing::quadrature_f(0.8, -0.6, 0.9, 1.0)) <= 1e-6);
  CHECK(std::abs(excitation_f(0.6, 0.8, 0.9, 1.0) - testing::quadrature_f(0.6, 0.8, 0.9, 1.0)) <= 1e-6);

  testing::Gen gen(31);
  for (int k = 0; k < 200; ++k) {
    const double phi = gen.angle(), d = gen.uniform(0.1, 2.0), s = gen.uniform(0.2, 3.0);
    const double z1 = std::cos(phi), z2 = std::sin(phi);
    CHECK(std::abs(excitation_f(z1, z2, d, s) - testing::quadrature_f(z1, z2, d, s)) <= 1e-8);
    CHECK(excitation_f(z1, z2, d, s) == excitation_f(-z1, z2, d, s));
    CHECK(excitation_f(z1, z2, d, s) == excitation_f(z1, -z2, d, s));
    CHECK(std::abs(std::exp(excitation_f_log(z1, z2, d, s)) - excitation_f(z1, z2, d, s)) <=
          1e-13 * excitation_f(z1, z2, d, s));
  }
}

TEST_CASE("h reduces to f at x_hat = 0 and is minimised there") {
  CHECK(throws_kind(ErrorKind::invalid_argument, [] { conditional_abs_expectation_h(0.0, 0.5, 0.0, 0.9, 1.0); }));
  CHECK(throws_kind(ErrorKind::invalid_argument, [] { conditional_abs_expectation_h(0.5, 0.0, 0.0, 0.9, 1.0); }));
  CHECK(rel(conditional_abs_expectation_h(0.8, -0.6, 1.0, 0.9, 1.0), 0.48140771570498824806) <= 1e-13);
  CHECK(rel(conditional_abs_expectation_h(0.8, -0.6, -1.0, 0.9, 1.0), 0.48140771570498824806) <= 1e-13);
  CHECK(rel(conditional_abs_expectation_h(0.3, 0.9, 2.5, 0.9, 1.5), 0.1511474681322800473) <= 1e-13);

  testing::Gen gen(37);
  for (int k = 0; k < 100; ++k) {
    double phi = gen.angle();
    const double z1 = std::cos(phi), z2 = std::sin(phi);
    if (z1 == 0.0 || z2 == 0.0) continue;
    const double d = gen.uniform(0.1, 2.0), s = gen.uniform(0.2, 3.0);
    const double h0 = conditional_abs_expectation_h(z1, z2, 0.0, d, s);
    CHECK(rel(h0, excitation_f(z1, z2, d, s)) <= 1e-13);
    for (int j = -40; j <= 40; ++j) {
      const double x = 0.25 * j;
      const double h = conditional_abs_expectation_h(z1, z2, x, d, s);
      CHECK(h >= h0 * (1.0 - 1e-14));
      if (j % 8 == 0) CHECK(std::abs(h - testing::quadrature_h(z1, z2, x, d, s)) <= 1e-8);
    }
  }
}

TEST_CASE("excitation g") {
  CHECK(excitation_g(0.0, 0.1) == 0.0);
  CHECK(excitation_g(1.0, 0.1) == doctest::Approx(0.05));
  CHECK(excitation_g(-1.0, 0.2) == doctest::Approx(0.1));
  CHECK(throws_kind(ErrorKind::invalid_argument, [] { excitation_g(1.0, 0.0); }));
}

TEST_CASE("f on the unit circle: sign, continuity, monotone pieces") {
  const double d = 0.9, s = 1.0;
  const std::size_t n = 1'000'000;
  double max_jump = 0.0;
  double prev_f = excitation_f(-1.0, 0.0, d, s);
  double prev_l = excitation_f_log(-1.0, 0.0, d, s);
  std::size_t bad = 0;
  for (std::size_t k = 1; k <= n; ++k) {
    const double phi = -kPi + 2.0 * kPi * static_cast<double>(k) / n;
    const double phi_prev = -kPi + 2.0 * kPi * static_cast<double>(k - 1) / n;
    const double f = excitation_f(std::cos(phi), std::sin(phi), d, s);
    const double l = excitation_f_log(std::cos(phi), std::sin(phi), d, s);
    if (f < 0.0) ++bad;
    max_jump = std::max(max_jump, std::abs(f - prev_f));
    const double mid = 0.5 * (phi + phi_prev);
    const bool decreasing = (mid < -kPi / 2) || (mid > 0.0 && mid < kPi / 2);
    // the grid hits the quarter points exactly, so no pair straddles a piece boundary
    if (decreasing ? !(l < prev_l) : !(l > prev_l)) ++bad;
    prev_f = f;
    prev_l = l;
  }
  CHECK(bad == 0);
  CHECK(max_jump < 1e-3);
}

TEST_CASE("gamma: range, grid oracle and failure modes") {
  const double gamma = compute_gamma(kStudyController, 1.0);
  CHECK(gamma > 0.0);
  CHECK(gamma <= 0.05);
  CHECK(gamma <= std::sqrt(2.0 / kPi));
  double brute = INFINITY;
  const std::size_t n = 1'000'000;
  for (std::size_t k = 0; k < n; ++k)
    brute = std::min(brute, excitation_max_fg(-kPi + 2 * kPi * k / (n - 1.0), kStudyController, 1.0));
  CHECK(std::abs(gamma - brute) <= 1e-6);
  CHECK(gamma <= brute);

  testing::Gen gen(41);
  for (int k = 0; k < 30; ++k) {
    const double u = gen.uniform(0.2, 5.0), c = gen.uniform(0.01, 0.99) * u, sw = gen.uniform(0.1, 4.0);
    const ControllerConfig cfg(u, c, 0.0, 1.0);
    const double g = compute_gamma(cfg, sw, {20'000, 1e-10});
    CHECK(g > 0.0);
    CHECK(g <= std::min(c / 2.0, sw * std::sqrt(2.0 / kPi)) + 1e-15);
  }
}

TEST_CASE("small-ball parameters") {
  const SmallBall sb = small_ball_params(0.05, 0.5, 1.0, 1.0);
  CHECK(sb.p == doctest::Approx(1.0 / 6401.0).epsilon(1e-14));
  CHECK(sb.gamma_sb == 0.5 * 0.5 * 0.05 * 0.05);
  double prev = 0.0;
  for (double g = 1e-3; g < 100.0; g *= 1.5) {
    const SmallBall x = small_ball_params(g, 0.3, 2.0, 1.5);
    CHECK(x.p > prev);
    CHECK(x.p > 0.0);
    CHECK(x.p < 1.0);
    prev = x.p;
  }
  CHECK(throws_kind(ErrorKind::invalid_argument, [] { small_ball_params(0.05, 1.0, 1.0, 1.0); }));
  CHECK(throws_kind(ErrorKind::invalid_argument, [] { small_ball_params(0.05, 0.0, 1.0, 1.0); }));
}

TEST_CASE("covariate growth constant") {
  CHECK(covariate_growth_q(SystemParams(0.7, -1.0, 1.0, 0.0), kStudyController) == 5.0);
  CHECK(covariate_growth_q(SystemParams(1.0, 0.5, 1.5, -2.0), kStudyController) == 4.0 * 4.0 + 1.0);
  testing::Gen gen(43);
  for (int k = 0; k < 100; ++k) {
    const ControllerConfig cfg(gen.uniform(0.1, 3), 0.05, 0, 1);
    CHECK(covariate_growth_q(SystemParams(gen.uniform(-1, 1), gen.wide(), gen.uniform(0.1, 2), gen.normal()), cfg) >=
          cfg.u_max() * cfg.u_max());
  }
}

TEST_CASE("tail-bound constants") {
  const TailConstants c = tail_bound_constants(0.05, 0.01, 5.0, 1e-4, 1.0);
  CHECK(rel(c.c1, 5.0001) <= 1e-15);
  CHECK(rel(c.c2, 14.815510557964274104) <= 1e-14);
  CHECK(rel(c.c3, 1.0288065843621399177e-15) <= 1e-14);
  CHECK(rel(c.c4, 568248.81941351335338) <= 1e-12);
  CHECK(c.c2 > 1.0 + 2.0 * std::log(10.0));

  const double cap = max_estimation_radius(1e-4, 1.0);
  CHECK(throws_kind(ErrorKind::domain, [&] { tail_bound_constants(cap, 0.01, 5.0, 1e-4, 1.0); }));
  CHECK(throws_kind(ErrorKind::domain, [] { tail_bound_constants(0.0, 0.01, 5.0, 1e-4, 1.0); }));
  testing::Gen gen(47);
  for (int k = 0; k < 1000; ++k) {
    const double gsb = std::pow(10.0, gen.uniform(-6, 0)), sw = gen.uniform(0.1, 3), p = gen.uniform(1e-6, 0.999);
    const double d = gen.uniform(0.0, 1.0) * max_estimation_radius(gsb, sw);
    if (d <= 0.0) continue;
    const TailConstants t = tail_bound_constants(d, p, 5.0, gsb, sw);
    CHECK(t.c3 > 0.0);
    CHECK(t.c3 < p * p / 30.0);
  }
}

TEST_CASE("burn-in index M'") {
  // synthetic h(i) = i^{4/3} e^{-i}: never reaches 1, so every i >= 1 qualifies
  CHECK(burn_in_m_prime(1.0, std::log(3.0)) == 1);
  for (BigIndex i = 1; i <= 10'000; ++i) CHECK(burn_in_log_h(i, 1.0, std::log(3.0)) < 0.0);

  // direct upward scan on a small example
  const double c3 = 0.01, lc4 = 5.0;
  std::size_t scan = 1;
  for (std::size_t i = 1; i < 5000; ++i)
    if (!(burn_in_log_h(i, c3, lc4) < 0.0)) scan = i + 1;
  CHECK(burn_in_m_prime(c3, lc4) == scan);
  CHECK(scan == 1352);

  // 50-digit reference values on the decreasing branch
  CHECK(burn_in_m_prime(1e-6, 30.0) == 52605838);
  CHECK(burn_in_m_prime(1.0288065843621399e-15, 13.250380148429127) == BigIndex("61920883892586084"));
  CHECK(burn_in_m_prime(5.418903530798138e-17, 15.273941689355482) == BigIndex("1287611472377096911"));

  BigIndex prev = burn_in_m_prime(1e-8, 20.0);
  for (double c = 2e-8; c < 1.0; c *= 2.0) {
    const BigIndex m = burn_in_m_prime(c, 20.0);
    CHECK(m <= prev);
    prev = m;
  }

  const BurnIn b = burn_in_times(0.05, 0.01, 5.0, 1e-4, 1.0);
  CHECK(b.m_burn >= b.m_prime);
  const BurnIn small = burn_in_times(0.5, 0.5, 1.0, 0.5, 1.0);
  CHECK(small.m_burn >= small.m_prime);
  CHECK(small.m_burn >= 1);
}

TEST_CASE("System 1 certificate") {
  const ExcitationCertificate cert = make_certificate(SystemParams(0.7, -1.0, 1.0), kStudyController);
  CHECK(cert.gamma_sb == cert.psi * cert.psi * cert.gamma * cert.gamma);
  CHECK(cert.p > 0.0);
  CHECK(cert.p < 1.0);
  CHECK(cert.c3 > 0.0);
  CHECK(cert.c3 < cert.p * cert.p / 30.0);
  CHECK(cert.q == 5.0);
  CHECK(cert.d == 0.5);
  CHECK(cert.m_burn >= cert.m_prime);
  CHECK(cert.m_prime == BigIndex("1287611472377096911"));
  for (BigIndex i = cert.m_prime; i <= cert.m_prime + 10'000; ++i)
    CHECK(burn_in_log_h(i, cert.c3, cert.log_c4) < 0.0);

  CHECK(certificate_from_text(certificate_to_text(cert)) == cert);
  CHECK(throws_kind(ErrorKind::invalid_argument, [] { certificate_from_text("psi=0.5\n"); }));
  CHECK(throws_kind(ErrorKind::invalid_argument, [&] { certificate_from_text(certificate_to_text(cert) + "x=1\n"); }));

  const ExcitationCertificate custom = make_certificate(SystemParams(0.7, -1.0, 1.0), kStudyController, 0.25, 0.1);
  CHECK(custom.d == 0.1);
  CHECK(custom.psi == 0.25);
}

TEST_CASE("estimation tail bound") {
  ExcitationCertificate cert{};
  cert.c3 = 0.01;
  cert.log_c4 = 5.0;
  cert.c4 = std::exp(5.0);
  cert.m_prime = burn_in_m_prime(cert.c3, cert.log_c4);
  cert.m_burn = cert.m_prime + 10;
  CHECK(throws_kind(ErrorKind::domain, [&] { estimation_tail_bound(cert.m_burn - 1, cert); }));
  double prev = INFINITY;
  for (BigIndex i = cert.m_burn; i < cert.m_burn + 2000; i += 7) {
    const TailBound b = estimation_tail_bound(i, cert);
    CHECK(b.raw < prev);
    CHECK(b.clamped == std::min(b.raw, 1.0));
    CHECK(b.raw == doctest::Approx(std::pow(static_cast<double>(i), 4.0 / 3.0) * std::exp(-0.01 * static_cast<double>(i)) * cert.c4));
    prev = b.raw;
  }
  CHECK(estimation_tail_bound(cert.m_burn * 10, cert).raw / estimation_tail_bound(cert.m_burn, cert).raw < 1.0);

  const ExcitationCertificate s1 = make_certificate(SystemParams(0.7, -1.0, 1.0), kStudyController);
  const TailBound at_m = estimation_tail_bound(s1.m_burn, s1);
  CHECK(at_m.raw > 1.0);
  CHECK(at_m.raw < 3.0 + 1e-12);
  CHECK(at_m.clamped == 1.0);
  CHECK(estimation_tail_bound(s1.m_burn * 10, s1).raw < at_m.raw);
}

TEST_CASE("summability of the estimation tail") {
  const double c3 = 0.3;
  const int M = 7;
  // closed forms for the two tail pieces, 20-digit reference
  const double part_a = 7157.9590283828500051, part_b = 62455.578549288988832;
  const double head = 336.0;
  CHECK(rel(summability_total(c3, 1.0, M), head + part_a + part_b) <= 1e-12);
  CHECK(rel(summability_total(c3, 2.5, M), head + 2.5 * (part_a + part_b)) <= 1e-12);
  CHECK(rel(summability_total(c3, 0.0, M), head) <= 1e-15);

  testing::Gen gen(53);
  for (int k = 0; k < 20; ++k) {
    const double c = gen.uniform(0.05, 2.0), c4 = gen.uniform(0.0, 100.0);
    const std::size_t m = gen.index(1, 50);
    const double total = summability_total(c, c4, static_cast<double>(m));
    const double partial = summability_partial(c, c4, m, 4000);
    CHECK(std::abs(total - partial) <= 1e-6 * total);
    CHECK(partial <= total * (1 + 1e-12));
  }

  const ExcitationCertificate s1 = make_certificate(SystemParams(0.7, -1.0, 1.0), kStudyController);
  CHECK(std::isfinite(summability_total(s1.c3, s1.c4, static_cast<double>(s1.m_burn))));
}

TEST_CASE("stable-case moment bound") {
  const SystemParams s1(0.7, -1.0, 1.0, 0.0);
  const StableCaseBound b = stable_case_bound(s1, kStudyController, 0.8);
  CHECK(b.s1 == doctest::Approx(std::sqrt(2.0 / kPi)).epsilon(1e-15));
  CHECK(b.s2 == 1.0);
  CHECK(b.d1 == 1.0 + b.s1);
  CHECK(b.d2 == 1.0 + 2.0 * b.s1 + b.s2);
  CHECK(rel(b.e_lambda, 9.3588655480056558734) <= 1e-13);
  CHECK(rel(b.beta, 70.070691476517764337) <= 1e-13);
  CHECK(rel(b.bound, 350.35345738258882168) <= 1e-13);
  const double a2 = 0.49;
  CHECK(std::abs((0.8 - a2) * b.e_lambda * b.e_lambda - 2 * 0.7 * b.d1 * b.e_lambda - b.d2) <= 1e-9 * b.d2 * 100);

  double prev = 0.0;
  for (double lam = 0.6; lam < 0.9999; lam += 0.01) {
    const StableCaseBound x = stable_case_bound(s1, kStudyController, lam);
    if (lam > 0.795) CHECK(x.bound > prev);
    CHECK(x.bound >= 0.0);
    CHECK(x.e_lambda > 0.0);
    CHECK(x.beta > 0.0);
    prev = x.bound;
  }
  CHECK(stable_case_bound(SystemParams(0.7, -1.0, 1.0, 3.0), kStudyController, 0.8).bound >= 9.0);
  CHECK(throws_kind(ErrorKind::domain, [&] { stable_case_bound(s1, kStudyController, 0.4); }));
  CHECK(throws_kind(ErrorKind::domain, [&] { stable_case_bound(s1, kStudyController, 1.0); }));
  CHECK(throws_kind(ErrorKind::inapplicable, [] { stable_case_bound(SystemParams(1.0, 0.5, 1.5), kStudyController, 0.8); }));
  CHECK(throws_kind(ErrorKind::inapplicable, [] { stable_case_bound(SystemParams(-1.0, 2.0, 2.0), kStudyController, 0.8); }));
}

TEST_CASE("deviation bound") {
  const SystemParams sys(-1.0, 2.0, 2.0);
  CHECK(deviation_bound(1, 0.5, sys, kStudyController) == doctest::Approx(19.8));
  const double b = 2.0, d = 0.5, D = 0.9;
  CHECK(deviation_bound(1, d, sys, kStudyController) == doctest::Approx(std::max(2 * b * 2 * D, 2 * ((b + d) / (1 - d) + 3 * b) * D)));
  const std::size_t n = static_cast<std::size_t>(std::ceil(((b + d) / (1 - d) + 3 * b) / b)) - 1;
  for (std::size_t k = n; k < n + 50; ++k)
    CHECK(deviation_bound(k, d, sys, kStudyController) == doctest::Approx((k + 1) * b * 2 * D));
  double prev = 0.0;
  for (std::size_t k = 1; k < 200; ++k) {
    const double v = deviation_bound(k, d, sys, kStudyController);
    CHECK(v >= prev);
    prev = v;
  }
  CHECK(throws_kind(ErrorKind::domain, [&] { deviation_bound(1, 1.0, sys, kStudyController); }));
  CHECK(throws_kind(ErrorKind::domain, [] { deviation_bound(1, 0.6, SystemParams(1.0, 0.5, 1.5), kStudyController); }));
  CHECK(throws_kind(ErrorKind::invalid_argument, [&] { deviation_bound(0, 0.5, sys, kStudyController); }));
}
