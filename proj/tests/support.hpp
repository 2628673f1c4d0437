#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "aicmss/estimator.hpp"

namespace testing {

// Hand-rolled generator for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double normal(double mu = 0.0, double sigma = 1.0) { return std::normal_distribution<double>(mu, sigma)(rng_); }
  std::size_t index(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
  }
  double angle() { return uniform(-std::numbers::pi, std::numbers::pi); }
  // Magnitudes spread over several decades, either sign.
  double wide() {
    const double mag = std::pow(10.0, uniform(-3.0, 3.0));
    return uniform(0.0, 1.0) < 0.5 ? -mag : mag;
  }
  aicmss::Mat2 psd(double scale = 1.0) {
    const double l1 = scale * uniform(0.0, 2.0), l2 = scale * uniform(0.0, 2.0);
    const double th = angle();
    const double c = std::cos(th), s = std::sin(th);
    return {{l1 * c * c + l2 * s * s, (l1 - l2) * c * s, (l1 - l2) * c * s, l1 * s * s + l2 * c * c}};
  }
  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

// E[1{sat low}|z1 X - z2 D| + 1{sat high}|z1 X + z2 D|], X ~ N(x_hat, sigma^2),
// integrated piecewise between the kinks of the integrand.
inline double quadrature_h(double z1, double z2, double x_hat, double d, double sigma) {
  using boost::math::quadrature::gauss_kronrod;
  auto dens = [&](double x) {
    const double u = (x - x_hat) / sigma;
    return std::exp(-0.5 * u * u) / (sigma * std::sqrt(2.0 * std::numbers::pi));
  };
  auto integrand = [&](double x) {
    const double s = -z1 / z2 * x;
    double v = 0.0;
    if (s < -d) v += std::abs(z1 * x - z2 * d);
    if (s > d) v += std::abs(z1 * x + z2 * d);
    return v * dens(x);
  };
  std::vector<double> pts = {x_hat, d * z2 / z1, -d * z2 / z1};
  std::sort(pts.begin(), pts.end());
  const double inf = std::numeric_limits<double>::infinity();
  double total = gauss_kronrod<double, 61>::integrate(integrand, -inf, pts.front(), 15, 1e-12);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    if (pts[i + 1] > pts[i])
      total += gauss_kronrod<double, 61>::integrate(integrand, pts[i], pts[i + 1], 15, 1e-12);
  total += gauss_kronrod<double, 61>::integrate(integrand, pts.back(), inf, 15, 1e-12);
  return total;
}

// Reference value for the excitation lower bound f in every branch.
inline double quadrature_f(double z1, double z2, double d, double sigma) {
  using boost::math::quadrature::gauss_kronrod;
  if (z1 == 0.0) return 0.0;
  if (z2 == 0.0) {
    const double inf = std::numeric_limits<double>::infinity();
    auto g = [&](double x) {
      return std::abs(z1 * x) * std::exp(-0.5 * x * x / (sigma * sigma)) / (sigma * std::sqrt(2.0 * std::numbers::pi));
    };
    return gauss_kronrod<double, 61>::integrate(g, -inf, 0.0, 15, 1e-12) +
           gauss_kronrod<double, 61>::integrate(g, 0.0, inf, 15, 1e-12);
  }
  return quadrature_h(z1, z2, 0.0, d, sigma);
}

struct McMean {
  double mean;
  double se;
};

inline McMean monte_carlo_abs_normal(double mu, double sigma, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(mu, sigma);
  double mean = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::abs(dist(rng));
    const double delta = x - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (x - mean);
  }
  return {mean, std::sqrt(m2 / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n))};
}

}  // namespace testing
