#include "hominv/numerics.hpp"

#include <string>

#include <unsupported/Eigen/MatrixFunctions>

namespace hominv {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kDimension: return "dimension";
    case ErrorKind::kNotControllable: return "not-controllable";
    case ErrorKind::kNotMonotone: return "not-monotone";
    case ErrorKind::kDegenerateInput: return "degenerate-input";
    case ErrorKind::kNoSolution: return "no-solution";
    case ErrorKind::kDegenerateSolution: return "degenerate-solution";
    case ErrorKind::kOutOfRange: return "out-of-range";
    case ErrorKind::kInconsistentGenerator: return "inconsistent-generator";
    case ErrorKind::kInfeasible: return "infeasible";
    case ErrorKind::kNotApplicable: return "not-applicable";
    case ErrorKind::kPrecondition: return "precondition";
    case ErrorKind::kDivergence: return "divergence";
    case ErrorKind::kInput: return "input";
  }
  return "unknown";
}

void require_square(const Mat& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorKind::kDimension,
                std::string(what) + ": expected a square matrix, got " +
                    std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

void require_finite(const Mat& m, const char* what) {
  if (!m.allFinite()) {
    throw Error(ErrorKind::kInput, std::string(what) + ": non-finite entry");
  }
}

Mat expm(const Mat& m, double s) {
  require_square(m, "expm");
  if (m.size() == 0) return m;
  const Mat scaled = s * m;
  return scaled.exp();
}

EigenReport sym_eig(const Mat& m) {
  require_square(m, "sym_eig");
  const double scale = 1.0 + m.norm();
  if ((m - m.transpose()).norm() > 1e-10 * scale) {
    throw Error(ErrorKind::kPrecondition, "sym_eig: matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat> solver(symmetrize(m));
  return {solver.eigenvalues(), solver.eigenvectors()};
}

LstsqResult lstsq(const Mat& a, const Vec& b) {
  if (a.rows() != b.size()) {
    throw Error(ErrorKind::kDimension, "lstsq: row count mismatch");
  }
  Eigen::CompleteOrthogonalDecomposition<Mat> cod;
  cod.setThreshold(1e-12);
  cod.compute(a);
  LstsqResult out;
  out.solution = cod.solve(b);
  out.residual = (a * out.solution - b).norm();
  out.rank = cod.rank();
  return out;
}

Eigen::Index numerical_rank(const Mat& m, double rel_tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(m);
  const Vec& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > rel_tol * sv(0)) ++rank;
  }
  return rank;
}

int controllability_index(const Mat& a, const Mat& b) {
  require_square(a, "controllability_index");
  const Eigen::Index n = a.rows();
  if (b.rows() != n) {
    throw Error(ErrorKind::kDimension, "controllability_index: B row count mismatch");
  }
  Mat krylov(n, 0);
  Mat block = b;
  Eigen::Index rank = 0;
  for (Eigen::Index k = 1; k <= n; ++k) {
    Mat next(n, krylov.cols() + block.cols());
    next << krylov, block;
    krylov = std::move(next);
    rank = numerical_rank(krylov);
    if (rank == n) return static_cast<int>(k);
    block = a * block;
  }
  throw Error(ErrorKind::kNotControllable,
              "pair (A,B) is not controllable: Krylov rank " + std::to_string(rank) +
                  " < " + std::to_string(n));
}

Mat symmetrize(const Mat& m) { return 0.5 * (m + m.transpose()); }

double min_eig(const Mat& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::SelfAdjointEigenSolver<Mat>(symmetrize(m), Eigen::EigenvaluesOnly)
      .eigenvalues()(0);
}

double max_eig(const Mat& m) {
  if (m.size() == 0) return 0.0;
  const Vec ev =
      Eigen::SelfAdjointEigenSolver<Mat>(symmetrize(m), Eigen::EigenvaluesOnly).eigenvalues();
  return ev(ev.size() - 1);
}

namespace {

Mat spd_power(const Mat& m, double power) {
  require_square(m, "spd_power");
  Eigen::SelfAdjointEigenSolver<Mat> solver(symmetrize(m));
  const Vec& ev = solver.eigenvalues();
  if (ev.size() > 0 && ev(0) <= 0.0) {
    throw Error(ErrorKind::kPrecondition, "matrix is not positive definite");
  }
  const Vec scaled = ev.array().pow(power).matrix();
  return solver.eigenvectors() * scaled.asDiagonal() * solver.eigenvectors().transpose();
}

}  // namespace

Mat sqrtm_spd(const Mat& m) { return spd_power(m, 0.5); }
Mat inv_sqrtm_spd(const Mat& m) { return spd_power(m, -0.5); }

double norm2(const Mat& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Mat>(m).singularValues()(0);
}

}  // namespace hominv
