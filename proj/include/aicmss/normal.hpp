#pragma once

namespace aicmss {

inline constexpr double kSqrt2OverPi = 0.79788456080286535588;

double normal_pdf(double u);
double normal_log_pdf(double u);
// Upper tail Q(u) = P(N(0,1) > u).
double normal_upper_tail(double u);
// Standard normal loss function L(u) = E[(N - u)^+] = pdf(u) - u Q(u).
double normal_loss(double u);
double log_normal_loss(double u);

}  // namespace aicmss
