#include "hominv/synthesis.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace hominv {

namespace {

constexpr double kResidualTol = 1e-8;
constexpr double kSingularTol = 1e-9;
constexpr int kMaxRetries = 5;

// Linear map (G0, Y0) -> [vec(A G0 - G0 A + B Y0); vec(G0 B)] in row-major
// order, unknowns ordered as vec(G0) then vec(Y0).
Mat generator_system(const Mat& A, const Mat& B) {
  const Eigen::Index n = A.rows(), m = B.cols();
  const Eigen::Index unknowns = n * n + m * n;
  Mat sys = Mat::Zero(n * n + n * m, unknowns);
  for (Eigen::Index k = 0; k < unknowns; ++k) {
    Mat G = Mat::Zero(n, n), Y = Mat::Zero(m, n);
    if (k < n * n) {
      G(k / n, k % n) = 1.0;
    } else {
      Y((k - n * n) / n, (k - n * n) % n) = 1.0;
    }
    const Mat first = A * G - G * A + B * Y;
    const Mat second = G * B;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) sys(i * n + j, k) = first(i, j);
      for (Eigen::Index j = 0; j < m; ++j) sys(n * n + i * m + j, k) = second(i, j);
    }
  }
  return sys;
}

double smallest_singular_ratio(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m);
  const Vec& s = svd.singularValues();
  if (s(0) == 0.0) return 0.0;
  return s(s.size() - 1) / s(0);
}

bool is_nilpotent(const Mat& A) {
  Mat p = Mat::Identity(A.rows(), A.cols());
  const double scale = 1.0 + A.norm();
  for (Eigen::Index k = 0; k < A.rows(); ++k) p = p * A / scale;
  return p.norm() <= 1e-9;
}

}  // namespace

double generator_residual(const Mat& A, const Mat& B, const Mat& G0, const Mat& Y0) {
  const double r1 = (A * G0 - G0 * A + B * Y0 - A).norm() / (1.0 + A.norm());
  const double r2 = (G0 * B).norm() / (1.0 + B.norm());
  return std::max(r1, r2);
}

GeneratorSolution complete_generator(const Mat& A, const Mat& B, const Mat& G0, const Mat& Y0) {
  require_square(A, "generator");
  if (B.rows() != A.rows() || G0.rows() != A.rows() || G0.cols() != A.cols() ||
      Y0.rows() != B.cols() || Y0.cols() != A.cols()) {
    throw Error(ErrorKind::kDimension, "generator: inconsistent A, B, G0, Y0 shapes");
  }
  const Eigen::Index n = A.rows();
  GeneratorSolution gs;
  gs.A = A;
  gs.B = B;
  gs.G0 = G0;
  gs.Y0 = Y0;
  gs.n_tilde = controllability_index(A, B);
  gs.a_nilpotent = is_nilpotent(A);
  gs.residual = generator_residual(A, B, G0, Y0);
  const Mat shifted = G0 - Mat::Identity(n, n);
  if (smallest_singular_ratio(shifted) <= kSingularTol) {
    throw Error(ErrorKind::kDegenerateSolution, "generator: G0 - I is singular");
  }
  gs.K0 = shifted.transpose().partialPivLu().solve(Y0.transpose()).transpose();
  gs.A0 = A + B * gs.K0;
  gs.homogeneity_residual = (gs.A0 * G0 - G0 * gs.A0 - gs.A0).norm();
  return gs;
}

GeneratorSolution solve_generator(const Mat& A, const Mat& B, std::uint64_t seed) {
  require_square(A, "solve_generator");
  require_finite(A, "solve_generator");
  require_finite(B, "solve_generator");
  if (B.rows() != A.rows() || B.cols() == 0) {
    throw Error(ErrorKind::kDimension, "solve_generator: B must be n x m with m >= 1");
  }
  const Eigen::Index n = A.rows(), m = B.cols();
  controllability_index(A, B);

  const Mat sys = generator_system(A, B);
  Vec rhs = Vec::Zero(sys.rows());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) rhs(i * n + j) = A(i, j);
  }
  const LstsqResult ls = lstsq(sys, rhs);

  auto unpack = [&](const Vec& z, Mat& G, Mat& Y) {
    G = Mat(n, n);
    Y = Mat(m, n);
    for (Eigen::Index k = 0; k < n * n; ++k) G(k / n, k % n) = z(k);
    for (Eigen::Index k = 0; k < m * n; ++k) Y(k / n, k % n) = z(n * n + k);
  };

  Mat G, Y;
  unpack(ls.solution, G, Y);
  const double res = generator_residual(A, B, G, Y);
  if (res > kResidualTol) {
    std::ostringstream msg;
    msg << "generator equations have no solution: normalized residual " << res;
    throw Error(ErrorKind::kNoSolution, msg.str());
  }

  Mat null_basis;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int attempt = 0; attempt <= kMaxRetries; ++attempt) {
    Vec z = ls.solution;
    if (attempt > 0) {
      if (null_basis.size() == 0) {
        Eigen::JacobiSVD<Mat> svd(sys, Eigen::ComputeFullV);
        const Vec& s = svd.singularValues();
        Eigen::Index rank = 0;
        for (Eigen::Index i = 0; i < s.size(); ++i) {
          if (s(i) > 1e-9 * s(0)) ++rank;
        }
        null_basis = svd.matrixV().rightCols(sys.cols() - rank);
        if (null_basis.cols() == 0) break;
      }
      Vec c(null_basis.cols());
      for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = normal(rng);
      z += 1e-2 * (1.0 + z.norm()) * null_basis * c.normalized();
    }
    unpack(z, G, Y);
    if (smallest_singular_ratio(G - Mat::Identity(n, n)) > kSingularTol) {
      GeneratorSolution gs = complete_generator(A, B, G, Y);
      gs.retries = attempt;
      return gs;
    }
  }
  throw Error(ErrorKind::kDegenerateSolution,
              "generator: G0 - I singular for every tried particular solution");
}

Dilation make_dilation(const GeneratorSolution& gs, double mu) {
  const double hi = 1.0 / static_cast<double>(gs.n_tilde);
  if (!(mu >= -1.0 && mu <= hi)) {
    std::ostringstream msg;
    msg << "mu = " << mu << " outside [-1, " << hi << "]";
    throw Error(ErrorKind::kOutOfRange, msg.str());
  }
  const Eigen::Index n = gs.n();
  return Dilation(Mat::Identity(n, n) + mu * gs.G0, mu, gs.G0);
}

StabilizingPair solve_stabilizing(const GeneratorSolution& gs, const Dilation& d, double rho,
                                  const sdp::SdpSettings& settings) {
  if (!(rho > 0.0)) throw Error(ErrorKind::kInput, "solve_stabilizing: rho must be positive");
  const Eigen::Index n = gs.n(), m = gs.m();
  const Mat& Gd = d.generator();
  const double eps = 1e-6;

  sdp::SdpProblem p;
  const auto X = p.add_symmetric("X", n);
  const auto Y = p.add_matrix("Y", m, n);
  const auto GX = Gd * X + X * Gd.transpose();
  const auto lhs = gs.A0 * X + X * gs.A0.transpose() + gs.B * Y + (gs.B * Y).transpose() + rho * GX;
  p.add_zero("stabilizing equation", lhs);
  p.add_zero("trace normalization", X.trace() - Mat::Constant(1, 1, static_cast<double>(n)));
  p.add_psd("X > 0", X - eps * Mat::Identity(n, n));
  p.add_psd("Gd X + X Gd' > 0", GX - eps * Mat::Identity(n, n));

  const sdp::SdpSolution sol = sdp::solve_sdp(p, settings);
  if (sol.status != sdp::SdpStatus::kOptimal) {
    throw Error(ErrorKind::kInfeasible, std::string("solve_stabilizing: backend status ") +
                                            sdp::to_string(sol.status) + " (" +
                                            sol.diagnostics + ")");
  }
  StabilizingPair out;
  out.X = symmetrize(sol.values[0]);
  out.Y = sol.values[1];
  out.rho = rho;
  out.equation_residual = lhs.evaluate(sol.z).norm();
  return out;
}

}  // namespace hominv
