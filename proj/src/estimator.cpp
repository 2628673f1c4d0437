#include "aicmss/estimator.hpp"

#include <algorithm>
#include <cmath>

#include "aicmss/errors.hpp"

namespace aicmss {

Mat2 operator*(const Mat2& x, const Mat2& y) {
  Mat2 out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out(i, j) = x(i, 0) * y(0, j) + x(i, 1) * y(1, j);
  return out;
}

Vec2 operator*(const Mat2& x, const Vec2& v) {
  return {x(0, 0) * v[0] + x(0, 1) * v[1], x(1, 0) * v[0] + x(1, 1) * v[1]};
}

Mat2 operator-(const Mat2& x, const Mat2& y) {
  Mat2 out;
  for (int k = 0; k < 4; ++k) out.m[k] = x.m[k] - y.m[k];
  return out;
}

Mat2 transpose(const Mat2& x) { return {{x(0, 0), x(1, 0), x(0, 1), x(1, 1)}}; }

double max_abs(const Mat2& x) {
  double out = 0.0;
  for (double v : x.m) out = std::max(out, std::abs(v));
  return out;
}

namespace {

// p*r - q*q with the rounding error of q*q compensated.
double det_sym(double p, double q, double r) {
  const double qq = q * q;
  const double err = std::fma(q, q, -qq);
  return std::fma(p, r, -qq) - err;
}

}  // namespace

SymmetricEigen2 symmetric_eigen(const Mat2& m) {
  const double p = m(0, 0), q = m(0, 1), r = m(1, 1);
  const double mean = 0.5 * (p + r);
  const double rad = std::hypot(0.5 * (p - r), q);
  const double det = det_sym(p, q, r);

  SymmetricEigen2 e{};
  if (mean >= 0.0) {
    e.lambda_max = mean + rad;
    e.lambda_min = e.lambda_max != 0.0 ? det / e.lambda_max : 0.0;
  } else {
    e.lambda_min = mean - rad;
    e.lambda_max = det / e.lambda_min;
  }
  const double theta = 0.5 * std::atan2(2.0 * q, p - r);
  const double c = std::cos(theta), s = std::sin(theta);
  e.v_max = {c, s};
  e.v_min = {-s, c};
  return e;
}

PseudoInverse pseudo_inverse_2x2(const Mat2& m, double rank_tol) {
  for (double v : m.m) require(std::isfinite(v), ErrorKind::invalid_argument, "matrix entries must be finite");
  require(rank_tol >= 0.0, ErrorKind::invalid_argument, "rank_tol must be non-negative");
  const double scale = max_abs(m);
  require(std::abs(m(0, 1) - m(1, 0)) <= 1e-12 * scale, ErrorKind::invalid_argument,
          "pseudo_inverse_2x2 requires a symmetric matrix");
  Mat2 s = m;
  s(1, 0) = s(0, 1);

  if (scale == 0.0) return {Mat2{}, 0};
  const SymmetricEigen2 e = symmetric_eigen(s);
  const double mag = std::max(std::abs(e.lambda_max), std::abs(e.lambda_min));
  require(e.lambda_min >= -1e-10 * mag, ErrorKind::invalid_argument,
          "pseudo_inverse_2x2 requires a positive semi-definite matrix");
  if (e.lambda_max <= 0.0) return {Mat2{}, 0};

  const double cut = rank_tol * e.lambda_max;
  if (e.lambda_min > cut) {
    const double det = det_sym(s(0, 0), s(0, 1), s(1, 1));
    return {{{s(1, 1) / det, -s(0, 1) / det, -s(0, 1) / det, s(0, 0) / det}}, 2};
  }
  const Vec2& v = e.v_max;
  const double inv = 1.0 / e.lambda_max;
  return {{{inv * v[0] * v[0], inv * v[0] * v[1], inv * v[0] * v[1], inv * v[1] * v[1]}}, 1};
}

RegressorDataset::RegressorDataset(bool keep_raw_log, std::size_t raw_log_cap)
    : keep_log_(keep_raw_log), cap_(raw_log_cap) {}

void RegressorDataset::ingest(const Vec2& z, double x_next) {
  require(std::isfinite(z[0]) && std::isfinite(z[1]) && std::isfinite(x_next),
          ErrorKind::invalid_argument, "ingest: non-finite regressor or target");
  ++n_;
  g00_ += z[0] * z[0];
  g01_ += z[0] * z[1];
  g11_ += z[1] * z[1];
  c0_ += z[0] * x_next;
  c1_ += z[1] * x_next;
  if (keep_log_ && log_.size() < cap_) log_.push_back({z, x_next});
}

ParameterEstimate solve_ols(const RegressorDataset& dataset) {
  require(dataset.n() > 0, ErrorKind::empty_dataset, "solve_ols: dataset has no samples");
  const PseudoInverse pinv = pseudo_inverse_2x2(dataset.gram());
  const Vec2 theta = pinv.matrix * dataset.cross();
  return {theta[0], theta[1], dataset.n(), pinv.rank};
}

}  // namespace aicmss
