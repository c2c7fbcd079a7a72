#pragma once

#include "hominv/dilation.hpp"

namespace hominv {

// Canonical homogeneous norm ||x||_{d,P} = e^{s_x} with ||d(-s_x) x||_P = 1.
class HomogeneousNorm {
 public:
  struct Evaluation {
    double value = 0.0;      // ||x||_{d,P}
    double log_value = 0.0;  // s_x; -inf for x = 0
    Vec projection;          // d(-s_x) x, on the unit P-sphere (zero for x = 0)
    int iterations = 0;
  };

  /// Certifies monotonicity of d w.r.t. P on construction.
  HomogeneousNorm(Dilation d, const Mat& P, double tol = 1e-12);
  HomogeneousNorm(Dilation d, MonotonicityCert cert, double tol = 1e-12);

  const Dilation& dilation() const { return d_; }
  const MonotonicityCert& cert() const { return cert_; }
  const Mat& P() const { return cert_.P; }
  double tol() const { return tol_; }

  double norm(const Vec& x) const { return evaluate(x).value; }
  Evaluation evaluate(const Vec& x) const;

  /// Gradient of the norm at x != 0. Throws kDegenerateInput near zero.
  Vec gradient(const Vec& x) const;
  /// Homogeneous projection onto the unit P-sphere. Throws kDegenerateInput
  /// near zero.
  Vec project(const Vec& x) const;

  /// ||x||_P
  double p_norm(const Vec& x) const;
  /// ||x||_P at or below which x counts as the origin.
  double zero_threshold() const { return zero_threshold_; }

 private:
  void require_nonzero(const Vec& x, const char* what) const;

  Dilation d_;
  MonotonicityCert cert_;
  Mat monotone_form_;  // P Gd + Gd' P
  double tol_;
  double zero_threshold_;
};

}  // namespace hominv
