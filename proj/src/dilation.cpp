#include "hominv/dilation.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace hominv {

namespace {
constexpr double kAntiHurwitzMargin = 1e-10;
constexpr double kMaxEigenvectorCondition = 1e6;
}  // namespace

Dilation::Dilation(Mat generator, double mu, std::optional<Mat> g0)
    : generator_(std::move(generator)), mu_(mu), g0_(std::move(g0)) {
  require_square(generator_, "Dilation");
  require_finite(generator_, "Dilation");
  if (generator_.size() == 0) {
    throw Error(ErrorKind::kDimension, "Dilation: empty generator");
  }
  Eigen::EigenSolver<Mat> solver(generator_, true);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::kInconsistentGenerator, "Dilation: eigen decomposition failed");
  }
  eigenvalues_ = solver.eigenvalues();
  for (Eigen::Index i = 0; i < eigenvalues_.size(); ++i) {
    if (eigenvalues_(i).real() <= kAntiHurwitzMargin) {
      std::ostringstream msg;
      msg << "generator is not anti-Hurwitz: eigenvalue " << eigenvalues_(i);
      throw Error(ErrorKind::kInconsistentGenerator, msg.str());
    }
  }
  vectors_ = solver.eigenvectors();
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(vectors_);
  const auto& sv = svd.singularValues();
  const double smallest = sv(sv.size() - 1);
  if (smallest > 0.0 && sv(0) / smallest < kMaxEigenvectorCondition) {
    vectors_inv_ = vectors_.inverse();
    diagonalizable_ = true;
  }
}

Mat Dilation::operator()(double s) const {
  if (!diagonalizable_) return expm(generator_, s);
  const Eigen::VectorXcd scale = (s * eigenvalues_).array().exp().matrix();
  return (vectors_ * scale.asDiagonal() * vectors_inv_).real();
}

Vec Dilation::apply(double s, const Vec& x) const {
  if (!diagonalizable_) return expm(generator_, s) * x;
  const Eigen::VectorXcd scale = (s * eigenvalues_).array().exp().matrix();
  const Eigen::VectorXcd coords = vectors_inv_ * x.cast<std::complex<double>>();
  return (vectors_ * scale.cwiseProduct(coords)).real();
}

MonotonicityCert certify_monotone(const Dilation& d, const Mat& P) {
  require_square(P, "certify_monotone");
  if (P.rows() != d.dim()) {
    throw Error(ErrorKind::kDimension, "certify_monotone: P dimension mismatch");
  }
  const Mat Ps = symmetrize(P);
  const double unit = Ps.trace() / static_cast<double>(Ps.rows());
  const double threshold = 1e-10 * std::abs(unit);
  const double p_min = min_eig(Ps);
  if (!(p_min > threshold)) {
    std::ostringstream msg;
    msg << "P is not positive definite: min eigenvalue " << p_min;
    throw Error(ErrorKind::kNotMonotone, msg.str());
  }
  const Mat& G = d.generator();
  const double lyap_min = min_eig(Ps * G + G.transpose() * Ps);
  if (!(lyap_min > threshold)) {
    std::ostringstream msg;
    msg << "dilation is not strictly monotone: min eigenvalue of P*Gd + Gd'*P is "
        << lyap_min;
    throw Error(ErrorKind::kNotMonotone, msg.str());
  }
  const Mat root = sqrtm_spd(Ps);
  const Mat root_inv = inv_sqrtm_spd(Ps);
  const Mat sym = root * G * root_inv + root_inv * G.transpose() * root;
  Eigen::SelfAdjointEigenSolver<Mat> solver(symmetrize(sym), Eigen::EigenvaluesOnly);
  const Vec& ev = solver.eigenvalues();
  MonotonicityCert cert;
  cert.P = Ps;
  cert.alpha = 0.5 * ev(ev.size() - 1);
  cert.beta = 0.5 * ev(0);
  return cert;
}

std::pair<double, double> norm_bracket(const MonotonicityCert& cert, double r) {
  const double log_r = std::log(r);
  if (r >= 1.0) return {log_r / cert.alpha, log_r / cert.beta};
  return {log_r / cert.beta, log_r / cert.alpha};
}

double p_operator_norm(const Mat& m, const Mat& P) {
  const Mat root = sqrtm_spd(P);
  const Mat root_inv = inv_sqrtm_spd(P);
  return norm2(root * m * root_inv);
}

}  // namespace hominv
