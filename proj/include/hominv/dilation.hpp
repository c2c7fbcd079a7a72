#pragma once

#include <complex>
#include <optional>
#include <utility>

#include "hominv/numerics.hpp"

namespace hominv {

// Linear dilation d(s) = exp(s * Gd) with an anti-Hurwitz generator.
//
// When Gd is diagonalizable with an eigenvector matrix of condition number
// below 1e6 the decomposition is cached and d(s) costs one complex
// diagonal scaling; otherwise every call goes through expm.
class Dilation {
 public:
  /// Throws kInconsistentGenerator if some eigenvalue of Gd has real part
  /// <= 1e-10.
  explicit Dilation(Mat generator, double mu = 0.0, std::optional<Mat> g0 = std::nullopt);

  const Mat& generator() const { return generator_; }
  double mu() const { return mu_; }
  const std::optional<Mat>& g0() const { return g0_; }
  Eigen::Index dim() const { return generator_.rows(); }

  /// d(s).
  Mat operator()(double s) const;
  /// d(s) * x without forming d(s) when the cached decomposition exists.
  Vec apply(double s, const Vec& x) const;

  bool uses_eigen_cache() const { return diagonalizable_; }

 private:
  Mat generator_;
  double mu_;
  std::optional<Mat> g0_;

  bool diagonalizable_ = false;
  Eigen::VectorXcd eigenvalues_;
  Eigen::MatrixXcd vectors_;
  Eigen::MatrixXcd vectors_inv_;
};

/// Certifies strict monotonicity of d with respect to ||x||_P = sqrt(x'Px).
/// alpha/beta are the extreme half-eigenvalues of
/// P^{1/2} Gd P^{-1/2} + P^{-1/2} Gd' P^{1/2}; ||d(s)||_P lies between
/// e^{alpha s} and e^{beta s} for s <= 0.
struct MonotonicityCert {
  Mat P;
  double alpha = 0.0;
  double beta = 0.0;
};

/// Throws kNotMonotone naming the offending eigenvalue when P is not positive
/// definite or P Gd + Gd' P is not.
MonotonicityCert certify_monotone(const Dilation& d, const Mat& P);

/// Interval guaranteed to contain the root s of ||d(-s) x||_P = 1 given
/// r = ||x||_P > 0.
std::pair<double, double> norm_bracket(const MonotonicityCert& cert, double r);

/// Operator norm of m induced by ||.||_P.
double p_operator_norm(const Mat& m, const Mat& P);

}  // namespace hominv
