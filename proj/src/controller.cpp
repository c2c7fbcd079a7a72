#include "hominv/controller.hpp"

#include <cmath>

namespace hominv {

HomogeneousController::HomogeneousController(Mat K0, Mat K, const Mat& P, Dilation d,
                                             double norm_floor)
    : K0_(std::move(K0)), K_(std::move(K)), norm_(std::move(d), P), norm_floor_(norm_floor) {
  const Eigen::Index n = norm_.dilation().dim();
  if (K_.cols() != n || K0_.cols() != n || K0_.rows() != K_.rows()) {
    throw Error(ErrorKind::kDimension, "controller: K0, K and P dimensions disagree");
  }
  require_finite(K0_, "controller K0");
  require_finite(K_, "controller K");
  if (!(norm_floor_ > 0.0)) throw Error(ErrorKind::kInput, "controller: norm_floor must be > 0");
  const double mu = norm_.dilation().mu();
  if (mu < -1.0) throw Error(ErrorKind::kOutOfRange, "controller: mu below -1");
  linear_ = mu == 0.0 && norm_.dilation().generator() == Mat::Identity(n, n);
}

HomogeneousController HomogeneousController::linear(Mat K0, Mat K, const Mat& P) {
  const Eigen::Index n = P.rows();
  return HomogeneousController(std::move(K0), std::move(K), P, Dilation(Mat::Identity(n, n), 0.0));
}

Vec HomogeneousController::eval_u(const Vec& x) const {
  if (x.size() != n()) throw Error(ErrorKind::kDimension, "eval_u: state dimension mismatch");
  if (linear_) return (K0_ + K_) * x;

  Vec u = K0_ * x;
  const HomogeneousNorm::Evaluation e = norm_.evaluate(x);
  if (e.value == 0.0) return u;
  const double deg = mu();
  if (e.value >= norm_floor_) {
    u += std::pow(e.value, deg + 1.0) * (K_ * e.projection);
  } else if (deg > -1.0) {
    u += std::pow(norm_floor_, deg) * e.value * (K_ * e.projection);
  } else {
    u += K_ * norm_.dilation().apply(-std::log(norm_floor_), x);
  }
  return u;
}

double HomogeneousController::sup_u_bound() const {
  if (mu() != -1.0 || !K0_.isZero(0.0)) {
    throw Error(ErrorKind::kNotApplicable, "sup_u_bound requires mu = -1 and K0 = 0");
  }
  const Mat root_inv = inv_sqrtm_spd(P());
  return std::sqrt(std::max(0.0, max_eig(root_inv * K_.transpose() * K_ * root_inv)));
}

}  // namespace hominv
