#pragma once

#include "hominv/homnorm.hpp"

namespace hominv {

// u(x) = K0 x + ||x||^{mu+1} K d(-ln ||x||) x  with ||.|| = ||.||_{d,P}.
//
// Below norm_floor the formula is replaced by a continuous ramp
// (mu > -1) or by the value at the floor (mu = -1); u(0) = 0 always.
class HomogeneousController {
 public:
  HomogeneousController(Mat K0, Mat K, const Mat& P, Dilation d, double norm_floor = 1e-9);

  /// Gd = I, mu = 0: u = (K0 + K) x.
  static HomogeneousController linear(Mat K0, Mat K, const Mat& P);

  Vec eval_u(const Vec& x) const;

  /// sqrt(lambda_max(P^{-1/2} K'K P^{-1/2})); only for mu = -1 and K0 = 0,
  /// otherwise throws kNotApplicable.
  double sup_u_bound() const;

  const Mat& K0() const { return K0_; }
  const Mat& K() const { return K_; }
  const Mat& P() const { return norm_.P(); }
  const Dilation& dilation() const { return norm_.dilation(); }
  const HomogeneousNorm& norm() const { return norm_; }
  double mu() const { return norm_.dilation().mu(); }
  double norm_floor() const { return norm_floor_; }
  bool is_linear() const { return linear_; }
  Eigen::Index n() const { return K_.cols(); }
  Eigen::Index m() const { return K_.rows(); }

 private:
  Mat K0_;
  Mat K_;
  HomogeneousNorm norm_;
  double norm_floor_;
  bool linear_ = false;
};

}  // namespace hominv
