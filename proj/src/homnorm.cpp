#include "hominv/homnorm.hpp"

#include <cmath>
#include <limits>

namespace hominv {

namespace {
constexpr int kMaxIterations = 200;
constexpr double kNewtonSwitchWidth = 0.5;
}  // namespace

HomogeneousNorm::HomogeneousNorm(Dilation d, const Mat& P, double tol)
    : HomogeneousNorm(d, certify_monotone(d, P), tol) {}

HomogeneousNorm::HomogeneousNorm(Dilation d, MonotonicityCert cert, double tol)
    : d_(std::move(d)), cert_(std::move(cert)), tol_(tol) {
  const Mat& G = d_.generator();
  monotone_form_ = cert_.P * G + G.transpose() * cert_.P;
  zero_threshold_ = 1e-12;
}

double HomogeneousNorm::p_norm(const Vec& x) const {
  return std::sqrt(std::max(0.0, x.dot(cert_.P * x)));
}

HomogeneousNorm::Evaluation HomogeneousNorm::evaluate(const Vec& x) const {
  if (x.size() != d_.dim()) {
    throw Error(ErrorKind::kDimension, "homogeneous norm: state dimension mismatch");
  }
  Evaluation out;
  const double r = p_norm(x);
  if (r <= zero_threshold_) {
    out.value = 0.0;
    out.log_value = -std::numeric_limits<double>::infinity();
    out.projection = Vec::Zero(x.size());
    return out;
  }

  // g(s) = ||d(-s)x||_P - 1 is strictly decreasing in s. Non-finite values
  // (overflow of d(-s) for very negative s) are treated as positive.
  auto residual = [&](double s, Vec& y, double& slope) {
    y = d_.apply(-s, x);
    const double ny = p_norm(y);
    slope = -y.dot(monotone_form_ * y) / (2.0 * ny);
    const double g = ny - 1.0;
    return std::isfinite(g) ? g : std::numeric_limits<double>::infinity();
  };

  // The analytic bracket can be extremely wide when the monotonicity margin
  // is small, so search outward from its end nearest zero.
  auto [near, far] = norm_bracket(cert_, r);
  if (r >= 1.0) {
    near -= 1e-12 * (1.0 + std::abs(near));
    far += 1e-12 * (1.0 + std::abs(far));
  } else {
    std::swap(near, far);
    near += 1e-12 * (1.0 + std::abs(near));
    far -= 1e-12 * (1.0 + std::abs(far));
  }
  const double dir = r >= 1.0 ? 1.0 : -1.0;  // direction from near toward the root

  Vec y;
  double slope = 0.0;
  double g_near = residual(near, y, slope);
  for (int k = 0; dir * g_near < 0.0 && k < 60; ++k) {
    near -= dir * (1.0 + std::abs(near)) * 1e-6 * std::pow(2.0, k);
    g_near = residual(near, y, slope);
  }
  double step = std::max(1e-3, 0.5 * std::abs(near));
  double other = near;
  double g_other = g_near;
  for (int k = 0; k < 200; ++k) {
    double next = near + dir * step;
    if (dir * (next - far) > 0.0 && k < 100) next = far;
    other = next;
    g_other = residual(other, y, slope);
    if (dir * g_other <= 0.0) break;
    near = other;
    g_near = g_other;
    step *= 2.0;
  }
  double lo = std::min(near, other), hi = std::max(near, other);

  double s = 0.5 * (lo + hi);
  double g = residual(s, y, slope);
  int it = 0;
  for (; it < kMaxIterations; ++it) {
    if (std::abs(g) <= tol_) break;
    if (g > 0.0) {
      lo = s;
    } else {
      hi = s;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(s))) break;
    double next = 0.5 * (lo + hi);
    if (hi - lo < kNewtonSwitchWidth && slope < 0.0 && std::isfinite(slope)) {
      const double newton = s - g / slope;
      if (newton > lo && newton < hi) next = newton;
    }
    s = next;
    g = residual(s, y, slope);
  }

  out.log_value = s;
  out.value = std::exp(s);
  out.projection = std::move(y);
  out.iterations = it;
  return out;
}

void HomogeneousNorm::require_nonzero(const Vec& x, const char* what) const {
  if (x.size() != d_.dim()) {
    throw Error(ErrorKind::kDimension, std::string(what) + ": state dimension mismatch");
  }
  if (p_norm(x) <= zero_threshold_) {
    throw Error(ErrorKind::kDegenerateInput, std::string(what) + ": x is numerically zero");
  }
}

Vec HomogeneousNorm::gradient(const Vec& x) const {
  require_nonzero(x, "hom_norm_gradient");
  const Evaluation e = evaluate(x);
  const Mat ds = d_(-e.log_value);
  const Vec& y = e.projection;
  const double denom = y.dot(cert_.P * d_.generator() * y);
  return e.value * (ds.transpose() * (cert_.P * y)) / denom;
}

Vec HomogeneousNorm::project(const Vec& x) const {
  require_nonzero(x, "hom_project");
  return evaluate(x).projection;
}

}  // namespace hominv
