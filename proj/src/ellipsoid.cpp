#include "hominv/ellipsoid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hominv {

namespace {

constexpr double kCoefficientZero = 1e-14;
constexpr int kMaxBackoffs = 6;

// {mu : 1 + mu c_i > 0 for all i}.
Interval affine_positivity_range(const Vec& c) {
  Interval out;
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    if (c(i) > kCoefficientZero) {
      out.lo = std::max(out.lo, -1.0 / c(i));
    } else if (c(i) < -kCoefficientZero) {
      out.hi = std::min(out.hi, -1.0 / c(i));
    }
  }
  return out;
}

Interval intersect_closed(Interval a, double lo, double hi) {
  if (lo > a.lo) {
    a.lo = lo;
    a.lo_closed = true;
  }
  if (hi < a.hi) {
    a.hi = hi;
    a.hi_closed = true;
  }
  return a;
}

void check_plant(const LinearPlant& plant, const GeneratorSolution& gs) {
  plant.validate();
  if (plant.n() != gs.n() || plant.m() != gs.m()) {
    throw Error(ErrorKind::kDimension, "plant and generator solution dimensions disagree");
  }
}

struct ProblemSpec {
  const Mat* Gd = nullptr;  // adds Gd X + X Gd' >= eps I
  const Mat* K = nullptr;   // Y = K X instead of a free Y
  double rho = 0.0;         // with K: adds the stabilizing inequality
};

sdp::SdpProblem invariance_problem(const LinearPlant& plant, const Mat& A0, double beta,
                                   const DesignOptions& options, const ProblemSpec& spec) {
  const Eigen::Index n = plant.n(), m = plant.m(), p = plant.p();
  const double eps = options.strict_margin;
  const Mat& B = plant.B;

  sdp::SdpProblem prob;
  const sdp::AffineExpr X = prob.add_symmetric("X", n);
  const sdp::AffineExpr Y = spec.K ? (*spec.K) * X : prob.add_matrix("Y", m, n);
  const sdp::AffineExpr BY = B * Y;
  const sdp::AffineExpr flow = A0 * X + X * A0.transpose() + BY + BY.transpose();
  const sdp::AffineExpr M = flow + beta * X;
  const sdp::AffineExpr W = sdp::AffineExpr::block(
      {{M, sdp::AffineExpr(plant.D)}, {sdp::AffineExpr(plant.D.transpose()),
                                       sdp::AffineExpr(Mat(-beta * plant.Q))}});
  prob.add_psd("invariance LMI", -W - eps * Mat::Identity(n + p, n + p));
  prob.add_psd("X > 0", X - eps * Mat::Identity(n, n));
  if (spec.Gd) {
    const sdp::AffineExpr GX = (*spec.Gd) * X + X * spec.Gd->transpose();
    prob.add_psd("Gd X + X Gd' > 0", GX - eps * Mat::Identity(n, n));
    if (spec.K) {
      prob.add_psd("stabilizing inequality", -(flow + spec.rho * GX));
    }
  }
  if (options.u_bar && !spec.K) {
    prob.add_psd("bounded control", bounded_control_constraint(X, Y, *options.u_bar) -
                                        eps * Mat::Identity(n + m, n + m));
  }
  prob.minimize(X.trace());
  return prob;
}

EllipsoidCertificate run_design(const LinearPlant& plant, const Mat& A0,
                                const DesignOptions& options, const ProblemSpec& spec,
                                const char* what) {
  // (D, u_bar, X, Y) -> (D/c, u_bar/c, X/c^2, Y/c^2) maps feasible points to
  // feasible points, so the solve runs on a disturbance of unit norm.
  const double c = plant.D.size() > 0 ? plant.D.norm() : 0.0;
  const double scale = c > 0.0 ? c : 1.0;
  LinearPlant unit = plant;
  unit.D /= scale;
  DesignOptions unit_options = options;
  if (options.u_bar) unit_options.u_bar = *options.u_bar / scale;

  sdp::BetaSearchResult res;
  try {
    res = sdp::beta_search(
        [&](double beta) { return invariance_problem(unit, A0, beta, unit_options, spec); },
        options.search, options.sdp);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kInfeasible) {
      throw Error(ErrorKind::kInfeasible, std::string(what) + ": " + e.what());
    }
    throw;
  }
  // Every cone carries the -eps I shift, so a margin below -eps is a genuine
  // violation; re-solve at beta* with a larger eps until none remains.
  sdp::SdpSolution sol = res.solution;
  DesignOptions opts = unit_options;
  double used_margin = opts.strict_margin;
  auto worst = [](const sdp::SdpSolution& s) {
    return *std::min_element(s.margins.begin(), s.margins.end());
  };
  for (int k = 0; k < kMaxBackoffs && worst(sol) < -used_margin; ++k) {
    opts.strict_margin *= 10.0;
    const sdp::SdpSolution retry =
        sdp::solve_sdp(invariance_problem(unit, A0, res.beta, opts, spec), opts.sdp);
    if (retry.status != sdp::SdpStatus::kOptimal) break;
    sol = retry;
    used_margin = opts.strict_margin;
  }
  EllipsoidCertificate cert;
  cert.X = symmetrize(sol.values[0]) * (scale * scale);
  cert.Y = spec.K ? Mat((*spec.K) * cert.X) : Mat(sol.values[1] * (scale * scale));
  cert.beta = res.beta;
  std::ostringstream diag;
  diag << what << ": beta* = " << res.beta << ", trace = " << cert.X.trace() << ", "
       << res.evaluations.size() << " beta evaluations; ";
  if (res.beta >= 0.999 * options.search.beta_max) {
    diag << "beta* at the upper search limit (trace may be unbounded below without u_bar); ";
  }
  if (scale != 1.0) diag << "solved with D scaled by 1/" << scale << "; ";
  if (used_margin != unit_options.strict_margin) {
    diag << "strict margin raised to " << used_margin << "; ";
  }
  diag << sol.diagnostics;
  cert.diagnostics = diag.str();
  return cert;
}

void verify_or_throw(const EllipsoidCertificate& cert, double tol, const char* what) {
  const double worst = cert.margins.worst();
  if (!(worst >= -tol)) {
    std::ostringstream msg;
    msg << what << ": post-hoc verification failed, worst margin " << worst;
    throw Error(ErrorKind::kInfeasible, msg.str());
  }
}

}  // namespace

bool Interval::empty() const {
  if (lo < hi) return false;
  return !(lo == hi && lo_closed && hi_closed);
}

bool Interval::contains(double x) const {
  const bool above = lo_closed ? x >= lo : x > lo;
  const bool below = hi_closed ? x <= hi : x < hi;
  return above && below;
}

const char* to_string(CertificateFamily family) {
  switch (family) {
    case CertificateFamily::kLinear: return "linear";
    case CertificateFamily::kHomogeneous: return "homogeneous";
    case CertificateFamily::kBoundedControl: return "bounded-control";
  }
  return "unknown";
}

CertificateFamily family_from_string(const std::string& name) {
  if (name == "linear") return CertificateFamily::kLinear;
  if (name == "homogeneous") return CertificateFamily::kHomogeneous;
  if (name == "bounded-control") return CertificateFamily::kBoundedControl;
  throw Error(ErrorKind::kInput, "unknown certificate family '" + name + "'");
}

double InvarianceMargins::worst() const {
  double w = std::min({lmi, x, gd});
  if (!std::isnan(bounded)) w = std::min(w, bounded);
  if (!std::isnan(stabilizing)) w = std::min(w, stabilizing);
  return w;
}

Mat EllipsoidCertificate::K() const { return X.llt().solve(Y.transpose()).transpose(); }

Mat EllipsoidCertificate::P() const {
  return symmetrize(X.llt().solve(Mat::Identity(X.rows(), X.cols())));
}

void LinearPlant::validate() const {
  require_square(A, "plant A");
  require_square(Q, "plant Q");
  for (const Mat* m : {&A, &B, &D, &Q}) require_finite(*m, "plant");
  if (B.rows() != A.rows() || D.rows() != A.rows() || Q.rows() != D.cols() || B.cols() == 0 ||
      D.cols() == 0 || A.rows() == 0) {
    throw Error(ErrorKind::kDimension, "plant: need A n x n, B n x m, D n x p, Q p x p");
  }
  if ((Q - Q.transpose()).norm() > 1e-10 * (1.0 + Q.norm()) || !(min_eig(Q) > 0.0)) {
    throw Error(ErrorKind::kPrecondition, "plant: Q must be symmetric positive definite");
  }
}

Mat solve_g0_omega(const GeneratorSolution& gs, const Mat& D) {
  if (D.rows() != gs.n() || D.cols() == 0) {
    throw Error(ErrorKind::kDimension, "solve_g0_omega: D must be n x p");
  }
  if (D.isZero(0.0)) throw Error(ErrorKind::kPrecondition, "solve_g0_omega: D = 0");
  const Mat rhs = gs.G0 * D;
  const Eigen::CompleteOrthogonalDecomposition<Mat> cod(D);
  const Mat G0w = cod.pseudoInverse() * rhs;
  const double res = (rhs - D * G0w).norm();
  if (res > 1e-8 * (1.0 + D.norm())) {
    std::ostringstream msg;
    msg << "G0 D = D G0w has no solution for this D (residual " << res << ")";
    throw Error(ErrorKind::kNoSolution, msg.str());
  }
  return G0w;
}

Mat disturbance_generator(const Mat& G0w, double mu) {
  require_square(G0w, "disturbance_generator");
  return (1.0 + mu) * Mat::Identity(G0w.rows(), G0w.cols()) + mu * G0w;
}

Interval mu_range_invariance(const GeneratorSolution& gs, const Mat& G0w) {
  require_square(G0w, "mu_range_invariance");
  const Eigen::VectorXcd ev = Eigen::EigenSolver<Mat>(G0w, false).eigenvalues();
  Vec c(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) c(i) = 1.0 + ev(i).real();
  return intersect_closed(affine_positivity_range(c), -1.0,
                          1.0 / static_cast<double>(gs.n_tilde));
}

Interval mu_range_attractiveness(const Mat& G0w, const Mat& Q) {
  require_square(G0w, "mu_range_attractiveness");
  if (Q.rows() != G0w.rows()) throw Error(ErrorKind::kDimension, "mu_range_attractiveness");
  const Mat root = sqrtm_spd(Q);
  const Mat root_inv = inv_sqrtm_spd(Q);
  const Vec ev = sym_eig(root * G0w * root_inv + root_inv * G0w.transpose() * root).values;
  return affine_positivity_range((1.0 + 0.5 * ev.array()).matrix());
}

Interval mu_range_upgrade(const Mat& X, const Mat& G0) {
  require_square(X, "mu_range_upgrade");
  const Mat root = sqrtm_spd(X);
  const Mat root_inv = inv_sqrtm_spd(X);
  const Vec ev = sym_eig(root_inv * G0 * root + root * G0.transpose() * root_inv).values;
  return affine_positivity_range(0.5 * ev);
}

Mat invariance_block(const Mat& X, const Mat& Y, double beta, const LinearPlant& plant,
                     const Mat& A0) {
  const Eigen::Index n = plant.n(), p = plant.p();
  const Mat BY = plant.B * Y;
  Mat W(n + p, n + p);
  W.topLeftCorner(n, n) = A0 * X + X * A0.transpose() + BY + BY.transpose() + beta * X;
  W.topRightCorner(n, p) = plant.D;
  W.bottomLeftCorner(p, n) = plant.D.transpose();
  W.bottomRightCorner(p, p) = -beta * plant.Q;
  return symmetrize(W);
}

InvarianceMargins lmi_invariance(const Mat& X, const Mat& Y, double beta,
                                 const LinearPlant& plant, const Mat& A0, const Mat& Gd) {
  if (X.rows() != plant.n() || Y.rows() != plant.m() || Y.cols() != plant.n() ||
      Gd.rows() != plant.n()) {
    throw Error(ErrorKind::kDimension, "lmi_invariance: dimension mismatch");
  }
  if (!(beta > 0.0)) throw Error(ErrorKind::kInput, "lmi_invariance: beta must be positive");
  InvarianceMargins m;
  m.lmi = min_eig(-invariance_block(X, Y, beta, plant, A0));
  m.x = min_eig(symmetrize(X));
  m.gd = min_eig(symmetrize(Gd * X + X * Gd.transpose()));
  return m;
}

sdp::AffineExpr bounded_control_constraint(const sdp::AffineExpr& X, const sdp::AffineExpr& Y,
                                           double u_bar) {
  if (!(u_bar > 0.0)) throw Error(ErrorKind::kInput, "bounded control: u_bar must be positive");
  const Eigen::Index m = Y.rows();
  return sdp::AffineExpr::block(
      {{X, Y.transpose()}, {Y, sdp::AffineExpr(Mat(u_bar * u_bar * Mat::Identity(m, m)))}});
}

namespace {

double bounded_margin(const Mat& X, const Mat& Y, double u_bar) {
  const Eigen::Index n = X.rows(), m = Y.rows();
  Mat L(n + m, n + m);
  L << X, Y.transpose(), Y, u_bar * u_bar * Mat::Identity(m, m);
  return min_eig(symmetrize(L));
}

void fill_margins(EllipsoidCertificate& cert, const LinearPlant& plant, const Mat& A0) {
  cert.margins = lmi_invariance(cert.X, cert.Y, cert.beta, plant, A0, cert.Gd);
  if (cert.u_bar) cert.margins.bounded = bounded_margin(cert.X, cert.Y, *cert.u_bar);
  if (cert.rho) {
    const Mat BY = plant.B * cert.Y;
    const Mat S = A0 * cert.X + cert.X * A0.transpose() + BY + BY.transpose() +
                  *cert.rho * (cert.Gd * cert.X + cert.X * cert.Gd.transpose());
    cert.margins.stabilizing = min_eig(symmetrize(-S));
  }
}

}  // namespace

EllipsoidCertificate min_trace_linear(const LinearPlant& plant, const GeneratorSolution& gs,
                                      const DesignOptions& options) {
  check_plant(plant, gs);
  EllipsoidCertificate cert = run_design(plant, gs.A0, options, {}, "min_trace_linear");
  cert.family = CertificateFamily::kLinear;
  cert.Gd = Mat::Identity(plant.n(), plant.n());
  cert.mu = 0.0;
  cert.u_bar = options.u_bar;
  fill_margins(cert, plant, gs.A0);
  verify_or_throw(cert, options.accept_tol, "min_trace_linear");
  return cert;
}

EllipsoidCertificate min_trace_homogeneous(const LinearPlant& plant, const GeneratorSolution& gs,
                                           const Dilation& d, const DesignOptions& options) {
  check_plant(plant, gs);
  const Mat G0w = solve_g0_omega(gs, plant.D);
  const Interval range = mu_range_invariance(gs, G0w);
  if (!range.contains(d.mu())) {
    std::ostringstream msg;
    msg << "min_trace_homogeneous: mu = " << d.mu() << " outside the invariance range ("
        << range.lo << ", " << range.hi << ")";
    throw Error(ErrorKind::kOutOfRange, msg.str());
  }
  ProblemSpec spec;
  spec.Gd = &d.generator();
  EllipsoidCertificate cert = run_design(plant, gs.A0, options, spec, "min_trace_homogeneous");
  const bool bounded = options.u_bar && d.mu() == -1.0 && gs.K0.isZero(1e-12);
  cert.family = bounded ? CertificateFamily::kBoundedControl : CertificateFamily::kHomogeneous;
  cert.Gd = d.generator();
  cert.mu = d.mu();
  cert.u_bar = options.u_bar;
  fill_margins(cert, plant, gs.A0);
  verify_or_throw(cert, options.accept_tol, "min_trace_homogeneous");
  return cert;
}

EllipsoidCertificate upgrade_linear(const EllipsoidCertificate& linear, const LinearPlant& plant,
                                    const GeneratorSolution& gs, double mu) {
  check_plant(plant, gs);
  const Dilation d = make_dilation(gs, mu);
  const Mat G0w = solve_g0_omega(gs, plant.D);
  const Interval range = mu_range_invariance(gs, G0w);
  if (!range.contains(mu)) {
    std::ostringstream msg;
    msg << "upgrade_linear: mu = " << mu << " outside the invariance range (" << range.lo << ", "
        << range.hi << ")";
    throw Error(ErrorKind::kOutOfRange, msg.str());
  }
  EllipsoidCertificate cert = linear;
  cert.family = CertificateFamily::kHomogeneous;
  cert.Gd = d.generator();
  cert.mu = mu;
  fill_margins(cert, plant, gs.A0);
  const double scale = cert.X.trace() / static_cast<double>(cert.X.rows());
  if (!(cert.margins.gd > 1e-12 * scale)) {
    std::ostringstream msg;
    msg << "upgrade infeasible at mu = " << mu
        << ": min eigenvalue of Gd X + X Gd' is " << cert.margins.gd;
    throw Error(ErrorKind::kInfeasible, msg.str());
  }
  std::ostringstream diag;
  diag << "upgraded at mu = " << mu << "; " << linear.diagnostics;
  cert.diagnostics = diag.str();
  return cert;
}

EllipsoidCertificate refit_x_fixed_k(const LinearPlant& plant, const GeneratorSolution& gs,
                                     const Dilation& d, const Mat& K,
                                     const DesignOptions& options) {
  check_plant(plant, gs);
  if (K.rows() != plant.m() || K.cols() != plant.n()) {
    throw Error(ErrorKind::kDimension, "refit_x_fixed_k: K must be m x n");
  }
  if (!(options.rho > 0.0)) throw Error(ErrorKind::kInput, "refit_x_fixed_k: rho must be > 0");
  ProblemSpec spec;
  spec.Gd = &d.generator();
  spec.K = &K;
  spec.rho = options.rho;
  DesignOptions opts = options;
  opts.u_bar.reset();
  EllipsoidCertificate cert = run_design(plant, gs.A0, opts, spec, "refit_x_fixed_k");
  cert.family = CertificateFamily::kHomogeneous;
  cert.Gd = d.generator();
  cert.mu = d.mu();
  cert.rho = options.rho;
  fill_margins(cert, plant, gs.A0);
  verify_or_throw(cert, options.accept_tol, "refit_x_fixed_k");
  return cert;
}

Vec closed_loop_rhs(const HomogeneousController& c, const LinearPlant& plant, const Vec& x,
                    const Vec& w) {
  return plant.A * x + plant.B * c.eval_u(x) + plant.D * w;
}

double boundary_derivative(const HomogeneousController& c, const LinearPlant& plant, const Vec& x,
                           const Vec& w) {
  const Mat& P = c.P();
  if (x.size() != plant.n() || w.size() != plant.p()) {
    throw Error(ErrorKind::kDimension, "boundary_derivative: dimension mismatch");
  }
  const double xp = x.dot(P * x);
  if (std::abs(xp - 1.0) > 1e-8) {
    std::ostringstream msg;
    msg << "boundary_derivative: x is off the unit P-sphere (x'Px = " << xp << ")";
    throw Error(ErrorKind::kPrecondition, msg.str());
  }
  if (w.dot(plant.Q * w) > 1.0 + 1e-12) {
    throw Error(ErrorKind::kPrecondition, "boundary_derivative: disturbance not admissible");
  }
  return x.dot(P * closed_loop_rhs(c, plant, x, w));
}

double hom_norm_rate(const HomogeneousController& c, const LinearPlant& plant, const Vec& x,
                     const Vec& w) {
  return c.norm().gradient(x).dot(closed_loop_rhs(c, plant, x, w));
}

namespace {

Vec unit_sphere(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec v(n);
  do {
    for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(rng);
  } while (v.norm() == 0.0);
  return v / v.norm();
}

Vec admissible_from_root(const Mat& q_root_inv, std::mt19937_64& rng) {
  const Eigen::Index p = q_root_inv.rows();
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const Vec v = unit_sphere(p, rng);
  const double r = std::pow(uniform(rng), 1.0 / static_cast<double>(p));
  return q_root_inv * v * r;
}

}  // namespace

Vec sample_unit_p_sphere(const Mat& P, std::mt19937_64& rng) {
  return inv_sqrtm_spd(P) * unit_sphere(P.rows(), rng);
}

Vec sample_admissible(const Mat& Q, std::mt19937_64& rng) {
  return admissible_from_root(inv_sqrtm_spd(Q), rng);
}

BoundaryCheck boundary_monte_carlo(const HomogeneousController& c, const LinearPlant& plant,
                                 int samples, std::uint64_t seed, double tol) {
  if (samples <= 0) throw Error(ErrorKind::kInput, "boundary_monte_carlo: samples must be > 0");
  const Mat p_root_inv = inv_sqrtm_spd(c.P());
  const Mat q_root_inv = inv_sqrtm_spd(plant.Q);
  std::mt19937_64 rng(seed);
  BoundaryCheck out;
  out.samples = samples;
  for (int i = 0; i < samples; ++i) {
    Vec x = p_root_inv * unit_sphere(plant.n(), rng);
    x /= std::sqrt(x.dot(c.P() * x));
    const Vec w = admissible_from_root(q_root_inv, rng);
    const double v = boundary_derivative(c, plant, x, w);
    if (v > tol) ++out.violations;
    if (v > out.max_value) {
      out.max_value = v;
      out.worst_x = x;
      out.worst_w = w;
    }
  }
  return out;
}

}  // namespace hominv
