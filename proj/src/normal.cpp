#include "aicmss/normal.hpp"

#include <cmath>
#include <numbers>

namespace aicmss {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;
constexpr int kFractionTerms = 100;

// For u >= 3: returns K with Mills ratio R = 1/(u + K) and L = pdf(u) K R.
double mills_tail(double u) {
  double t = 0.0;
  for (int n = kFractionTerms; n >= 2; --n) t = n / (u + t);
  return 1.0 / (u + t);
}

}  // namespace

double normal_pdf(double u) { return std::exp(-0.5 * u * u - kLogSqrt2Pi); }

double normal_log_pdf(double u) { return -0.5 * u * u - kLogSqrt2Pi; }

double normal_upper_tail(double u) { return 0.5 * std::erfc(u / std::numbers::sqrt2); }

double normal_loss(double u) {
  if (u >= 3.0) {
    const double k = mills_tail(u);
    return normal_pdf(u) * k / (u + k);
  }
  if (u >= -3.0) return normal_pdf(u) - u * normal_upper_tail(u);
  return normal_loss(-u) - u;
}

double log_normal_loss(double u) {
  if (u >= 3.0) {
    const double k = mills_tail(u);
    return normal_log_pdf(u) + std::log(k) - std::log(u + k);
  }
  return std::log(normal_loss(u));
}

}  // namespace aicmss
