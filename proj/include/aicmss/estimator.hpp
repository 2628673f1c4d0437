#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace aicmss {

using Vec2 = std::array<double, 2>;

struct Mat2 {
  std::array<double, 4> m{};  // row-major

  double operator()(int i, int j) const { return m[2 * i + j]; }
  double& operator()(int i, int j) { return m[2 * i + j]; }

  static Mat2 identity() { return {{1.0, 0.0, 0.0, 1.0}}; }
  bool operator==(const Mat2&) const = default;
};

Mat2 operator*(const Mat2& x, const Mat2& y);
Vec2 operator*(const Mat2& x, const Vec2& v);
Mat2 operator-(const Mat2& x, const Mat2& y);
Mat2 transpose(const Mat2& x);
double max_abs(const Mat2& x);

struct SymmetricEigen2 {
  double lambda_max;
  double lambda_min;
  Vec2 v_max;
  Vec2 v_min;
};

// Closed-form eigendecomposition of a symmetric 2x2 matrix.
SymmetricEigen2 symmetric_eigen(const Mat2& m);

inline constexpr double kRankTolerance = 1e-12;

struct PseudoInverse {
  Mat2 matrix;
  int rank;
};

PseudoInverse pseudo_inverse_2x2(const Mat2& m, double rank_tol = kRankTolerance);

struct RegressorSample {
  Vec2 z;
  double x_next;

  bool operator==(const RegressorSample&) const = default;
};

class RegressorDataset {
 public:
  static constexpr std::size_t kDefaultRawLogCap = 1'000'000;

  explicit RegressorDataset(bool keep_raw_log = true,
                            std::size_t raw_log_cap = kDefaultRawLogCap);

  void ingest(const Vec2& z, double x_next);

  std::size_t n() const noexcept { return n_; }
  Mat2 gram() const { return {{g00_, g01_, g01_, g11_}}; }
  Vec2 cross() const { return {c0_, c1_}; }

  // Pairs in ingestion order; truncated at the cap.
  const std::vector<RegressorSample>& raw_log() const noexcept { return log_; }
  bool raw_log_complete() const noexcept { return keep_log_ && log_.size() == n_; }

  bool operator==(const RegressorDataset&) const = default;

 private:
  std::size_t n_ = 0;
  double g00_ = 0.0, g01_ = 0.0, g11_ = 0.0;
  double c0_ = 0.0, c1_ = 0.0;
  bool keep_log_;
  std::size_t cap_;
  std::vector<RegressorSample> log_;
};

struct ParameterEstimate {
  double a_hat;
  double b_hat;
  std::size_t t;
  int rank;

  bool operator==(const ParameterEstimate&) const = default;
};

ParameterEstimate solve_ols(const RegressorDataset& dataset);

}  // namespace aicmss
