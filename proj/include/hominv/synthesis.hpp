#pragma once

#include <cstdint>
#include <string>

#include "hominv/dilation.hpp"
#include "hominv/sdp.hpp"

namespace hominv {

// Solution of  A G0 - G0 A + B Y0 = A,  G0 B = 0  and the derived
// homogenizing feedback K0 = Y0 (G0 - I)^{-1}, A0 = A + B K0.
struct GeneratorSolution {
  Mat A;
  Mat B;
  Mat G0;
  Mat Y0;
  Mat K0;
  Mat A0;
  double residual = 0.0;              // max of both equation residuals, normalized
  double homogeneity_residual = 0.0;  // ||A0 G0 - G0 A0 - A0||
  int n_tilde = 0;
  bool a_nilpotent = false;
  int retries = 0;

  Eigen::Index n() const { return A.rows(); }
  Eigen::Index m() const { return B.cols(); }
};

/// Minimum-norm solve of the generator equations. If G0 - I comes out
/// singular, a seeded small null-space perturbation is added (up to 5 times).
/// Throws kNotControllable, kNoSolution or kDegenerateSolution.
GeneratorSolution solve_generator(const Mat& A, const Mat& B, std::uint64_t seed = 1);

/// Fills the derived fields (K0, A0, residuals, n_tilde) for a given G0, Y0.
/// Used for externally supplied fixtures; no residual threshold is applied.
GeneratorSolution complete_generator(const Mat& A, const Mat& B, const Mat& G0, const Mat& Y0);

/// Residual of the generator equations relative to 1 + ||A||.
double generator_residual(const Mat& A, const Mat& B, const Mat& G0, const Mat& Y0);

/// Gd = I + mu G0. Throws kOutOfRange unless mu is in [-1, 1/n_tilde].
Dilation make_dilation(const GeneratorSolution& gs, double mu);

struct StabilizingPair {
  Mat X;
  Mat Y;
  double rho = 0.0;
  double equation_residual = 0.0;
  Mat K() const { return Y * X.inverse(); }
};

/// Any (X, Y) with A0 X + X A0' + B Y + Y' B' + rho (Gd X + X Gd') = 0,
/// X > 0, Gd X + X Gd' > 0 (trace(X) = n normalization). Throws kInfeasible.
StabilizingPair solve_stabilizing(const GeneratorSolution& gs, const Dilation& d, double rho,
                                  const sdp::SdpSettings& settings = {});

}  // namespace hominv
