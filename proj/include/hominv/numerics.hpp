#pragma once

#include <Eigen/Dense>

#include "hominv/error.hpp"

namespace hominv {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Eigenvalues of a symmetric matrix (ascending) with orthonormal eigenvectors
/// stored column-wise.
struct EigenReport {
  Vec values;
  Mat vectors;
};

struct LstsqResult {
  Vec solution;
  double residual = 0.0;  // ||A x - b||_2
  Eigen::Index rank = 0;
};

/// exp(s * m) by Padé scaling and squaring.
Mat expm(const Mat& m, double s = 1.0);

/// Decomposes (m + m^T)/2. Throws kDimension for non-square input and
/// kPrecondition when m is visibly non-symmetric.
EigenReport sym_eig(const Mat& m);

/// Minimum-norm least-squares solution (pseudo-inverse semantics).
LstsqResult lstsq(const Mat& a, const Vec& b);

/// Smallest k with rank [B, AB, ..., A^{k-1}B] = n. Throws kNotControllable.
int controllability_index(const Mat& a, const Mat& b);

/// Numerical rank; singular values above rel_tol * sigma_max count.
Eigen::Index numerical_rank(const Mat& m, double rel_tol = 1e-9);

Mat symmetrize(const Mat& m);
double min_eig(const Mat& m);
double max_eig(const Mat& m);

/// Principal square root and inverse square root of a symmetric positive
/// definite matrix. Throws kPrecondition if not SPD.
Mat sqrtm_spd(const Mat& m);
Mat inv_sqrtm_spd(const Mat& m);

/// Spectral norm.
double norm2(const Mat& m);

void require_square(const Mat& m, const char* what);
void require_finite(const Mat& m, const char* what);

}  // namespace hominv
