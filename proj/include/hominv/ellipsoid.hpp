#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>

#include "hominv/controller.hpp"
#include "hominv/plant.hpp"
#include "hominv/sdp.hpp"
#include "hominv/synthesis.hpp"

namespace hominv {

// Real interval with open/closed ends; lo > hi (or equal with an open end)
// means empty.
struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool lo_closed = false;
  bool hi_closed = false;

  bool empty() const;
  bool contains(double x) const;
};

enum class CertificateFamily { kLinear, kHomogeneous, kBoundedControl };
const char* to_string(CertificateFamily family);
CertificateFamily family_from_string(const std::string& name);

// Minimum eigenvalues; NaN marks a constraint that does not apply.
struct InvarianceMargins {
  double lmi = 0.0;      // -[[M, D], [D', -beta Q]]
  double x = 0.0;        // X
  double gd = 0.0;       // Gd X + X Gd'
  double bounded = std::numeric_limits<double>::quiet_NaN();    // [[X, Y'], [Y, u^2 I]]
  double stabilizing = std::numeric_limits<double>::quiet_NaN();  // -(A_cl X + X A_cl' + rho(Gd X + X Gd'))

  double worst() const;
};

struct EllipsoidCertificate {
  Mat X;
  Mat Y;
  double beta = 0.0;
  CertificateFamily family = CertificateFamily::kLinear;
  Mat Gd;
  double mu = 0.0;
  std::optional<double> u_bar;
  std::optional<double> rho;
  InvarianceMargins margins;
  std::string diagnostics;

  double trace() const { return X.trace(); }
  Mat K() const;
  Mat P() const;
};

struct DesignOptions {
  std::optional<double> u_bar;  // adds [[X, Y'], [Y, u^2 I]] >= 0
  double rho = 1.0;             // refit decay parameter
  double strict_margin = 1e-9;  // strict LMIs imposed as >= strict_margin * I
  double accept_tol = 1e-7;     // post-hoc margin acceptance
  sdp::BetaSearchSettings search;
  sdp::SdpSettings sdp;
};

/// G0w with G0 D = D G0w (min-norm least squares). Throws kPrecondition for
/// D = 0 and kNoSolution when the residual exceeds 1e-8 (1 + ||D||).
Mat solve_g0_omega(const GeneratorSolution& gs, const Mat& D);

/// Gdw = (1 + mu) I + mu G0w.
Mat disturbance_generator(const Mat& G0w, double mu);

/// mu with 1 + mu (1 + Re lambda_i(G0w)) > 0, intersected with [-1, 1/n~].
Interval mu_range_invariance(const GeneratorSolution& gs, const Mat& G0w);

/// mu with 1 + mu (1 + lambda_i(Q^{1/2} G0w Q^{-1/2} + Q^{-1/2} G0w' Q^{1/2}) / 2) > 0.
Interval mu_range_attractiveness(const Mat& G0w, const Mat& Q);

/// mu with (I + mu G0) X + X (I + mu G0)' > 0.
Interval mu_range_upgrade(const Mat& X, const Mat& G0);

/// [[A0 X + X A0' + B Y + Y' B' + beta X, D], [D', -beta Q]].
Mat invariance_block(const Mat& X, const Mat& Y, double beta, const LinearPlant& plant,
                     const Mat& A0);

InvarianceMargins lmi_invariance(const Mat& X, const Mat& Y, double beta,
                                 const LinearPlant& plant, const Mat& A0, const Mat& Gd);

EllipsoidCertificate min_trace_linear(const LinearPlant& plant, const GeneratorSolution& gs,
                                      const DesignOptions& options = {});

EllipsoidCertificate min_trace_homogeneous(const LinearPlant& plant, const GeneratorSolution& gs,
                                           const Dilation& d, const DesignOptions& options = {});

/// Relabels a linear certificate as homogeneous with Gd = I + mu G0. Throws
/// kInfeasible when Gd X + X Gd' is not positive definite.
EllipsoidCertificate upgrade_linear(const EllipsoidCertificate& linear, const LinearPlant& plant,
                                    const GeneratorSolution& gs, double mu);

/// min trace(X) with Y = K X fixed-gain substitution, subject to the
/// invariance LMI, X > 0, Gd X + X Gd' > 0 and
/// (A0 + B K) X + X (A0 + B K)' + rho (Gd X + X Gd') <= 0.
EllipsoidCertificate refit_x_fixed_k(const LinearPlant& plant, const GeneratorSolution& gs,
                                     const Dilation& d, const Mat& K,
                                     const DesignOptions& options = {});

/// [[X, Y'], [Y, u_bar^2 I]] as an affine expression.
sdp::AffineExpr bounded_control_constraint(const sdp::AffineExpr& X, const sdp::AffineExpr& Y,
                                           double u_bar);

/// Closed-loop right-hand side A x + B u(x) + D w.
Vec closed_loop_rhs(const HomogeneousController& c, const LinearPlant& plant, const Vec& x,
                    const Vec& w);

/// x' P f(x, w) for x on the unit P-sphere and w' Q w <= 1. Throws
/// kPrecondition otherwise.
double boundary_derivative(const HomogeneousController& c, const LinearPlant& plant, const Vec& x,
                           const Vec& w);

/// Time derivative of ||x||_{d,P} along the closed loop.
double hom_norm_rate(const HomogeneousController& c, const LinearPlant& plant, const Vec& x,
                     const Vec& w);

/// x = P^{-1/2} v with v uniform on the Euclidean unit sphere.
Vec sample_unit_p_sphere(const Mat& P, std::mt19937_64& rng);
/// w = Q^{-1/2} v r^{1/p}, uniform on {w' Q w <= 1}.
Vec sample_admissible(const Mat& Q, std::mt19937_64& rng);

struct BoundaryCheck {
  int samples = 0;
  int violations = 0;
  double max_value = -std::numeric_limits<double>::infinity();
  Vec worst_x;
  Vec worst_w;
};

/// Monte-Carlo sweep of boundary_derivative; a sample violates when its
/// value exceeds tol.
BoundaryCheck boundary_monte_carlo(const HomogeneousController& c, const LinearPlant& plant,
                                 int samples, std::uint64_t seed, double tol = 1e-7);

}  // namespace hominv
