#include "hominv/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace hominv::sdp {

// ---------------------------------------------------------------------------
// AffineExpr

void AffineExpr::add_term(int index, const Mat& coeff) {
  if (coeff.rows() != rows() || coeff.cols() != cols()) {
    throw Error(ErrorKind::kDimension, "AffineExpr: coefficient shape mismatch");
  }
  auto it = terms_.find(index);
  if (it == terms_.end()) {
    terms_.emplace(index, coeff);
  } else {
    it->second += coeff;
  }
}

AffineExpr AffineExpr::transpose() const {
  AffineExpr out(constant_.transpose());
  for (const auto& [k, m] : terms_) out.terms_.emplace(k, m.transpose());
  return out;
}

AffineExpr AffineExpr::trace() const {
  if (rows() != cols()) throw Error(ErrorKind::kDimension, "AffineExpr::trace: not square");
  AffineExpr out(Mat::Constant(1, 1, constant_.trace()));
  for (const auto& [k, m] : terms_) out.terms_.emplace(k, Mat::Constant(1, 1, m.trace()));
  return out;
}

Mat AffineExpr::evaluate(const Vec& z) const {
  Mat out = constant_;
  for (const auto& [k, m] : terms_) {
    if (k >= z.size()) throw Error(ErrorKind::kDimension, "AffineExpr::evaluate: short z");
    out += z(k) * m;
  }
  return out;
}

AffineExpr& AffineExpr::operator+=(const AffineExpr& rhs) {
  if (rhs.rows() != rows() || rhs.cols() != cols()) {
    throw Error(ErrorKind::kDimension, "AffineExpr: sum of mismatched shapes");
  }
  constant_ += rhs.constant_;
  for (const auto& [k, m] : rhs.terms_) add_term(k, m);
  return *this;
}

AffineExpr& AffineExpr::operator-=(const AffineExpr& rhs) {
  if (rhs.rows() != rows() || rhs.cols() != cols()) {
    throw Error(ErrorKind::kDimension, "AffineExpr: difference of mismatched shapes");
  }
  constant_ -= rhs.constant_;
  for (const auto& [k, m] : rhs.terms_) add_term(k, -m);
  return *this;
}

AffineExpr& AffineExpr::operator*=(double s) {
  constant_ *= s;
  for (auto& [k, m] : terms_) m *= s;
  return *this;
}

AffineExpr operator*(const Mat& lhs, const AffineExpr& e) {
  if (lhs.cols() != e.rows()) throw Error(ErrorKind::kDimension, "AffineExpr: bad left product");
  AffineExpr out(lhs * e.constant_);
  for (const auto& [k, m] : e.terms_) out.terms_.emplace(k, lhs * m);
  return out;
}

AffineExpr operator*(const AffineExpr& e, const Mat& rhs) {
  if (e.cols() != rhs.rows()) throw Error(ErrorKind::kDimension, "AffineExpr: bad right product");
  AffineExpr out(e.constant_ * rhs);
  for (const auto& [k, m] : e.terms_) out.terms_.emplace(k, m * rhs);
  return out;
}

AffineExpr AffineExpr::block(const std::vector<std::vector<AffineExpr>>& blocks) {
  if (blocks.empty() || blocks.front().empty()) return AffineExpr();
  const std::size_t ncols = blocks.front().size();
  std::vector<Eigen::Index> heights, widths(ncols);
  for (std::size_t c = 0; c < ncols; ++c) widths[c] = blocks.front()[c].cols();
  for (const auto& row : blocks) {
    if (row.size() != ncols) throw Error(ErrorKind::kDimension, "AffineExpr::block: ragged rows");
    for (std::size_t c = 0; c < ncols; ++c) {
      if (row[c].rows() != row.front().rows() || row[c].cols() != widths[c]) {
        throw Error(ErrorKind::kDimension, "AffineExpr::block: inconsistent block sizes");
      }
    }
    heights.push_back(row.front().rows());
  }
  Eigen::Index total_rows = 0, total_cols = 0;
  for (auto h : heights) total_rows += h;
  for (auto w : widths) total_cols += w;

  AffineExpr out(Mat::Zero(total_rows, total_cols));
  Eigen::Index r0 = 0;
  for (std::size_t r = 0; r < blocks.size(); ++r) {
    Eigen::Index c0 = 0;
    for (std::size_t c = 0; c < ncols; ++c) {
      const AffineExpr& b = blocks[r][c];
      out.constant_.block(r0, c0, b.rows(), b.cols()) = b.constant_;
      for (const auto& [k, m] : b.terms_) {
        auto it = out.terms_.find(k);
        if (it == out.terms_.end()) {
          it = out.terms_.emplace(k, Mat::Zero(total_rows, total_cols)).first;
        }
        it->second.block(r0, c0, b.rows(), b.cols()) += m;
      }
      c0 += widths[c];
    }
    r0 += heights[r];
  }
  return out;
}

// ---------------------------------------------------------------------------
// SdpProblem

AffineExpr SdpProblem::add_symmetric(const std::string& name, Eigen::Index n) {
  VariableBlock block{name, true, n, n, num_scalars_, static_cast<int>(n * (n + 1) / 2)};
  AffineExpr expr = AffineExpr::zero(n, n);
  int k = num_scalars_;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      Mat e = Mat::Zero(n, n);
      e(i, j) = 1.0;
      e(j, i) = 1.0;
      expr.add_term(k++, e);
    }
  }
  num_scalars_ += block.count;
  blocks_.push_back(block);
  return expr;
}

AffineExpr SdpProblem::add_matrix(const std::string& name, Eigen::Index rows, Eigen::Index cols) {
  VariableBlock block{name, false, rows, cols, num_scalars_, static_cast<int>(rows * cols)};
  AffineExpr expr = AffineExpr::zero(rows, cols);
  int k = num_scalars_;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      Mat e = Mat::Zero(rows, cols);
      e(i, j) = 1.0;
      expr.add_term(k++, e);
    }
  }
  num_scalars_ += block.count;
  blocks_.push_back(block);
  return expr;
}

void SdpProblem::check_expr(const AffineExpr& expr, const char* what) const {
  if (expr.max_index() >= num_scalars_) {
    throw Error(ErrorKind::kInput, std::string(what) + ": references an undeclared variable");
  }
  if (!expr.constant().allFinite()) {
    throw Error(ErrorKind::kInput, std::string(what) + ": non-finite constant");
  }
}

void SdpProblem::add_psd(const std::string& name, const AffineExpr& expr) {
  check_expr(expr, "add_psd");
  if (expr.rows() != expr.cols() || expr.rows() == 0) {
    throw Error(ErrorKind::kDimension, "add_psd: constraint '" + name + "' is not square");
  }
  psd_.push_back({name, 0.5 * (expr + expr.transpose())});
}

void SdpProblem::add_zero(const std::string& name, const AffineExpr& expr) {
  check_expr(expr, "add_zero");
  zeros_.push_back({name, expr});
}

void SdpProblem::minimize(const AffineExpr& objective) {
  check_expr(objective, "minimize");
  if (objective.rows() != 1 || objective.cols() != 1) {
    throw Error(ErrorKind::kDimension, "minimize: objective must be scalar");
  }
  objective_ = objective;
}

AffineExpr SdpProblem::block_expr(std::size_t index) const {
  const VariableBlock& b = blocks_.at(index);
  AffineExpr expr = AffineExpr::zero(b.rows, b.cols);
  int k = b.offset;
  if (b.symmetric) {
    for (Eigen::Index i = 0; i < b.rows; ++i) {
      for (Eigen::Index j = i; j < b.cols; ++j) {
        Mat e = Mat::Zero(b.rows, b.cols);
        e(i, j) = 1.0;
        e(j, i) = 1.0;
        expr.add_term(k++, e);
      }
    }
  } else {
    for (Eigen::Index i = 0; i < b.rows; ++i) {
      for (Eigen::Index j = 0; j < b.cols; ++j) {
        Mat e = Mat::Zero(b.rows, b.cols);
        e(i, j) = 1.0;
        expr.add_term(k++, e);
      }
    }
  }
  return expr;
}

Mat SdpProblem::block_value(std::size_t index, const Vec& z) const {
  return block_expr(index).evaluate(z);
}

const char* to_string(SdpStatus status) {
  switch (status) {
    case SdpStatus::kOptimal: return "optimal";
    case SdpStatus::kInfeasible: return "infeasible";
    case SdpStatus::kNumericalFailure: return "numerical-failure";
  }
  return "unknown";
}

std::vector<double> constraint_margins(const SdpProblem& problem, const Vec& z) {
  std::vector<double> out;
  out.reserve(problem.psd().size());
  for (const auto& c : problem.psd()) out.push_back(min_eig(c.expr.evaluate(z)));
  return out;
}

// ---------------------------------------------------------------------------
// Interior-point core.
//
// Solves  min c't  s.t.  F0_j + sum_i t_i F_ij >= 0  for every block j
// as the dual of the standard primal SDP (C = F0, A_i = -F_i, b = -c) with an
// infeasible-start primal-dual path-following method, HKM search direction
// and Mehrotra predictor-corrector.

namespace {

using Blocks = std::vector<Mat>;

struct LmiForm {
  Blocks f0;
  std::vector<Blocks> f;  // f[j][i]: coefficient of t_i in block j
  Vec c;

  Eigen::Index m() const { return c.size(); }
  std::size_t nblocks() const { return f0.size(); }
};

struct IpmOutcome {
  bool converged = false;
  Vec t;
  double objective = 0.0;
  int iterations = 0;
  double gap = 0.0;
  double pinf = 0.0;
  double dinf = 0.0;
  std::string reason;
};

constexpr int kStagnationWindow = 8;
constexpr double kReducedAccuracy = 1e-6;

double frob_inner(const Mat& a, const Mat& b) { return a.cwiseProduct(b).sum(); }

// Largest alpha with x + alpha * dx >= 0, or +inf.
double max_step(const Mat& x, const Mat& dx) {
  Eigen::LLT<Mat> llt(x);
  if (llt.info() != Eigen::Success) return 0.0;
  const Mat linv_dx = llt.matrixL().solve(dx);
  const Mat m = llt.matrixL().solve(linv_dx.transpose());
  const double lmin = min_eig(m);
  if (lmin >= 0.0) return std::numeric_limits<double>::infinity();
  return -1.0 / lmin;
}

Mat spd_inverse(const Mat& m) {
  Eigen::LLT<Mat> llt(m);
  if (llt.info() == Eigen::Success) {
    return llt.solve(Mat::Identity(m.rows(), m.cols()));
  }
  return m.completeOrthogonalDecomposition().pseudoInverse();
}

IpmOutcome run_ipm(const LmiForm& p, const SdpSettings& settings) {
  const Eigen::Index m = p.m();
  const std::size_t nb = p.nblocks();
  IpmOutcome out;

  double ntot = 0.0;
  double norm_c = 0.0;
  for (const auto& b : p.f0) {
    ntot += static_cast<double>(b.rows());
    norm_c += b.squaredNorm();
  }
  norm_c = std::sqrt(norm_c);
  const double norm_b = p.c.norm();

  double xi = std::max(10.0, std::sqrt(ntot));
  double eta = std::max({10.0, std::sqrt(ntot), norm_c});
  for (Eigen::Index i = 0; i < m; ++i) {
    double na = 0.0;
    for (std::size_t j = 0; j < nb; ++j) na += p.f[j][i].squaredNorm();
    na = std::sqrt(na);
    xi = std::max(xi, (1.0 + std::abs(p.c(i))) / (1.0 + na));
    eta = std::max(eta, na);
  }

  Blocks X(nb), S(nb);
  for (std::size_t j = 0; j < nb; ++j) {
    X[j] = xi * Mat::Identity(p.f0[j].rows(), p.f0[j].cols());
    S[j] = eta * Mat::Identity(p.f0[j].rows(), p.f0[j].cols());
  }
  Vec y = Vec::Zero(m);

  auto residuals = [&](Vec& rp, Blocks& rd) {
    rp = -p.c;
    rd.resize(nb);
    for (std::size_t j = 0; j < nb; ++j) {
      rd[j] = p.f0[j] - S[j];
      for (Eigen::Index i = 0; i < m; ++i) {
        rp(i) += frob_inner(p.f[j][i], X[j]);
        rd[j] += y(i) * p.f[j][i];
      }
    }
  };

  IpmOutcome best = out;
  double best_merit = std::numeric_limits<double>::infinity();
  int best_iter = 0;
  int stalled = 0;
  for (int iter = 0; iter < settings.max_iterations; ++iter) {
    out.iterations = iter;
    Vec rp;
    Blocks rd;
    residuals(rp, rd);
    double xs = 0.0, pobj = 0.0, rd_norm = 0.0, x_norm = 0.0;
    for (std::size_t j = 0; j < nb; ++j) {
      xs += frob_inner(X[j], S[j]);
      pobj += frob_inner(p.f0[j], X[j]);
      rd_norm += rd[j].squaredNorm();
      x_norm = std::max(x_norm, X[j].norm());
    }
    rd_norm = std::sqrt(rd_norm);
    const double dobj = -p.c.dot(y);
    const double mu = xs / ntot;
    out.gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    out.pinf = rp.norm() / (1.0 + norm_b);
    out.dinf = rd_norm / (1.0 + norm_c);
    out.t = y;
    out.objective = p.c.dot(y);

    const double tol = settings.tol;
    const double merit = std::max({out.gap, out.pinf, out.dinf});
    if (merit < best_merit) {
      best_merit = merit;
      best_iter = iter;
      best = out;
    }
    if (merit < tol) {
      best.converged = true;
      best.reason = "converged";
      return best;
    }
    if (best_merit < kReducedAccuracy && iter - best_iter > kStagnationWindow) {
      out.reason = "stagnated";
      break;
    }
    if (x_norm > 1e14) {
      out.reason = "multipliers diverging (LMI likely infeasible)";
      break;
    }

    std::vector<Mat> s_inv(nb);
    for (std::size_t j = 0; j < nb; ++j) s_inv[j] = spd_inverse(S[j]);

    // Schur complement M_ik = sum_j tr(F_ij X_j F_kj S_j^{-1}).
    Mat M = Mat::Zero(m, m);
    for (std::size_t j = 0; j < nb; ++j) {
      for (Eigen::Index i = 0; i < m; ++i) {
        if (p.f[j][i].isZero(0.0)) continue;
        const Mat g = X[j] * p.f[j][i] * s_inv[j];
        for (Eigen::Index k = i; k < m; ++k) {
          const double v = frob_inner(p.f[j][k], g.transpose());
          M(i, k) += v;
          if (k != i) M(k, i) += v;
        }
      }
    }
    M = 0.5 * (M + M.transpose());
    Eigen::LLT<Mat> chol(M);
    Eigen::LDLT<Mat> ldlt;
    bool use_llt = chol.info() == Eigen::Success;
    if (!use_llt) {
      const double reg = 1e-14 * std::max(1.0, M.diagonal().cwiseAbs().maxCoeff());
      ldlt.compute(M + reg * Mat::Identity(m, m));
    }
    auto schur_solve = [&](const Vec& rhs) -> Vec {
      return use_llt ? Vec(chol.solve(rhs)) : Vec(ldlt.solve(rhs));
    };

    // Direction for a given complementarity target Rc.
    auto direction = [&](const Blocks& rc, Vec& dy, Blocks& dX, Blocks& dS) {
      Vec rhs = rp;
      for (std::size_t j = 0; j < nb; ++j) {
        const Mat xrs = X[j] * rd[j] * s_inv[j];
        for (Eigen::Index i = 0; i < m; ++i) {
          rhs(i) += frob_inner(p.f[j][i], rc[j]) - frob_inner(p.f[j][i], xrs);
        }
      }
      dy = schur_solve(rhs);
      dX.resize(nb);
      dS.resize(nb);
      for (std::size_t j = 0; j < nb; ++j) {
        dS[j] = rd[j];
        for (Eigen::Index i = 0; i < m; ++i) dS[j] += dy(i) * p.f[j][i];
        dS[j] = symmetrize(dS[j]);
        dX[j] = symmetrize(rc[j] - X[j] * dS[j] * s_inv[j]);
      }
    };

    auto steps = [&](const Blocks& dX, const Blocks& dS, double& ap, double& ad) {
      ap = std::numeric_limits<double>::infinity();
      ad = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < nb; ++j) {
        ap = std::min(ap, max_step(X[j], dX[j]));
        ad = std::min(ad, max_step(S[j], dS[j]));
      }
    };

    // Predictor.
    Blocks rc(nb);
    for (std::size_t j = 0; j < nb; ++j) rc[j] = -X[j];
    Vec dy_a;
    Blocks dX_a, dS_a;
    direction(rc, dy_a, dX_a, dS_a);
    double ap_a, ad_a;
    steps(dX_a, dS_a, ap_a, ad_a);
    ap_a = std::min(1.0, ap_a);
    ad_a = std::min(1.0, ad_a);
    double xs_aff = 0.0;
    for (std::size_t j = 0; j < nb; ++j) {
      xs_aff += frob_inner(X[j] + ap_a * dX_a[j], S[j] + ad_a * dS_a[j]);
    }
    const double mu_aff = xs_aff / ntot;
    const double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, 3.0), 0.0, 1.0);

    // Corrector.
    for (std::size_t j = 0; j < nb; ++j) {
      rc[j] = sigma * mu * s_inv[j] - X[j] - dX_a[j] * dS_a[j] * s_inv[j];
    }
    Vec dy;
    Blocks dX, dS;
    direction(rc, dy, dX, dS);
    double ap, ad;
    steps(dX, dS, ap, ad);
    const double gamma = 0.9 + 0.09 * std::min(ap_a, ad_a);
    ap = std::min(1.0, gamma * ap);
    ad = std::min(1.0, gamma * ad);

    for (std::size_t j = 0; j < nb; ++j) {
      X[j] += ap * dX[j];
      S[j] += ad * dS[j];
    }
    y += ad * dy;

    if (std::max(ap, ad) < 1e-9) {
      if (++stalled >= 3) {
        out.reason = "stalled";
        break;
      }
    } else {
      stalled = 0;
    }
  }
  if (out.reason.empty()) out.reason = "iteration limit";
  // Round-off typically degrades the multiplier residual once the objective
  // has settled; the best iterate is kept and accepted at reduced accuracy.
  const std::string reason = out.reason;
  out = best;
  out.iterations = best_iter;
  if (best_merit < kReducedAccuracy) {
    out.converged = true;
    out.reason = "converged to reduced accuracy (" + reason + ")";
  } else {
    out.reason = reason;
  }
  return out;
}

struct Reduced {
  Vec z0;
  Mat basis;  // z = z0 + basis * t
  double equality_residual = 0.0;
  bool consistent = true;
};

Reduced eliminate_equalities(const SdpProblem& problem) {
  const int n = problem.num_scalars();
  Reduced red;
  Eigen::Index rows = 0;
  for (const auto& c : problem.zeros()) rows += c.expr.rows() * c.expr.cols();
  if (rows == 0) {
    red.z0 = Vec::Zero(n);
    red.basis = Mat::Identity(n, n);
    return red;
  }
  Mat E = Mat::Zero(rows, n);
  Vec e = Vec::Zero(rows);
  Eigen::Index r = 0;
  for (const auto& c : problem.zeros()) {
    for (Eigen::Index col = 0; col < c.expr.cols(); ++col) {
      for (Eigen::Index row = 0; row < c.expr.rows(); ++row, ++r) {
        e(r) = -c.expr.constant()(row, col);
        for (const auto& [k, m] : c.expr.terms()) E(r, k) = m(row, col);
      }
    }
  }
  Eigen::JacobiSVD<Mat> svd(E, Eigen::ComputeThinU | Eigen::ComputeFullV);
  const Vec& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > 1e-10 * smax) ++rank;
  }
  svd.setThreshold(1e-10);
  red.z0 = svd.solve(e);
  red.equality_residual = (E * red.z0 - e).norm();
  red.consistent = red.equality_residual <= 1e-9 * (1.0 + e.norm() + smax * red.z0.norm());
  red.basis = svd.matrixV().rightCols(n - rank);
  return red;
}

LmiForm reduce(const SdpProblem& problem, const Reduced& red, double radius) {
  const Eigen::Index nt = red.basis.cols();
  LmiForm form;
  form.c = Vec::Zero(nt);
  Vec cz = Vec::Zero(problem.num_scalars());
  for (const auto& [k, m] : problem.objective().terms()) cz(k) = m(0, 0);
  form.c = red.basis.transpose() * cz;

  for (const auto& cons : problem.psd()) {
    const AffineExpr& e = cons.expr;
    Mat f0 = e.constant();
    std::vector<Mat> f(nt, Mat::Zero(e.rows(), e.cols()));
    for (const auto& [k, coeff] : e.terms()) {
      f0 += red.z0(k) * coeff;
      for (Eigen::Index i = 0; i < nt; ++i) {
        const double w = red.basis(k, i);
        if (w != 0.0) f[i] += w * coeff;
      }
    }
    // Positive rescaling keeps the block's feasible set and evens out the
    // conditioning between blocks.
    double s = f0.norm();
    for (const auto& fi : f) s = std::max(s, fi.norm());
    if (s > 0.0) {
      f0 /= s;
      for (auto& fi : f) fi /= s;
    }
    form.f0.push_back(symmetrize(f0));
    for (auto& fi : f) fi = symmetrize(fi);
    form.f.push_back(std::move(f));
  }

  // ||t|| <= radius as [[I, t/R], [t'/R, 1]] >= 0.
  if (nt > 0) {
    const Eigen::Index d = nt + 1;
    form.f0.push_back(Mat::Identity(d, d));
    std::vector<Mat> f(nt, Mat::Zero(d, d));
    for (Eigen::Index i = 0; i < nt; ++i) {
      f[i](i, nt) = 1.0 / radius;
      f[i](nt, i) = 1.0 / radius;
    }
    form.f.push_back(std::move(f));
  }
  return form;
}

// min tau  s.t.  F_j(t) + tau I >= 0 (problem blocks), ball, tau >= -1.
LmiForm phase_one(const LmiForm& form, std::size_t problem_blocks) {
  const Eigen::Index nt = form.m();
  LmiForm p1;
  p1.c = Vec::Zero(nt + 1);
  p1.c(nt) = 1.0;
  for (std::size_t j = 0; j < form.nblocks(); ++j) {
    p1.f0.push_back(form.f0[j]);
    std::vector<Mat> f = form.f[j];
    const Eigen::Index d = form.f0[j].rows();
    f.push_back(j < problem_blocks ? Mat(Mat::Identity(d, d)) : Mat(Mat::Zero(d, d)));
    p1.f.push_back(std::move(f));
  }
  p1.f0.push_back(Mat::Ones(1, 1));
  std::vector<Mat> f(nt + 1, Mat::Zero(1, 1));
  f[nt](0, 0) = 1.0;
  p1.f.push_back(std::move(f));
  return p1;
}

}  // namespace

SdpSolution solve_sdp(const SdpProblem& problem, const SdpSettings& settings) {
  SdpSolution sol;
  std::ostringstream diag;


  const Reduced red = eliminate_equalities(problem);
  sol.equality_residual = red.equality_residual;
  auto finish = [&](const Vec& t) {
    sol.z = red.z0 + red.basis * t;
    sol.values.clear();
    for (std::size_t b = 0; b < problem.blocks().size(); ++b) {
      sol.values.push_back(problem.block_value(b, sol.z));
    }
    sol.objective = problem.objective().evaluate(sol.z)(0, 0);
    sol.margins = constraint_margins(problem, sol.z);
    sol.scale = std::max(1.0, sol.z.size() > 0 ? sol.z.lpNorm<Eigen::Infinity>() : 0.0);
    double worst = 0.0;
    for (double m : sol.margins) worst = std::max(worst, -m);
    sol.worst_violation = worst;
    sol.radius_active = t.size() > 0 && t.norm() >= 0.999 * settings.radius;
  };

  if (!red.consistent) {
    sol.status = SdpStatus::kInfeasible;
    diag << "equality constraints inconsistent, residual " << red.equality_residual;
    sol.diagnostics = diag.str();
    finish(Vec::Zero(red.basis.cols()));
    return sol;
  }

  const LmiForm form = reduce(problem, red, settings.radius);
  if (form.m() == 0) {
    finish(Vec::Zero(0));
    sol.status = sol.worst_violation <= settings.violation_tol * sol.scale ? SdpStatus::kOptimal
                                                                        : SdpStatus::kInfeasible;
    sol.diagnostics = "no free unknowns after equality elimination";
    return sol;
  }

  const IpmOutcome main = run_ipm(form, settings);
  sol.iterations = main.iterations;
  finish(main.t);
  diag << "phase2: " << main.reason << " after " << main.iterations << " iterations (gap "
       << main.gap << ", pinf " << main.pinf << ", dinf " << main.dinf << ")";
  if (main.converged && sol.worst_violation <= settings.violation_tol * sol.scale) {
    sol.status = SdpStatus::kOptimal;
    if (sol.radius_active) diag << "; variable radius bound active";
    sol.diagnostics = diag.str();
    return sol;
  }

  const LmiForm p1 = phase_one(form, problem.psd().size());
  const IpmOutcome first = run_ipm(p1, settings);
  const double slack = first.t(first.t.size() - 1);
  diag << "; phase1: " << first.reason << ", min slack " << slack;
  if (slack >= -settings.feasibility_tol) {
    sol.status = SdpStatus::kInfeasible;
  } else {
    sol.status = SdpStatus::kNumericalFailure;
  }
  sol.diagnostics = diag.str();
  return sol;
}

// ---------------------------------------------------------------------------
// beta search

BetaSearchResult beta_search(const ProblemFamily& family, const BetaSearchSettings& search,
                             const SdpSettings& settings) {
  if (!(search.beta_min > 0.0) || !(search.beta_max >= search.beta_min) || search.budget < 1) {
    throw Error(ErrorKind::kInput, "beta_search: invalid range or budget");
  }
  BetaSearchResult best;
  bool have_best = false;
  double best_obj = std::numeric_limits<double>::infinity();

  auto evaluate = [&](double log_beta) {
    const double beta = std::exp(log_beta);
    SdpProblem p = family(beta);
    SdpSolution s = solve_sdp(p, settings);
    const bool ok = s.status == SdpStatus::kOptimal;
    best.evaluations.push_back({beta, s.status, s.objective, s.diagnostics});
    const double obj = ok ? s.objective : std::numeric_limits<double>::infinity();
    if (ok && obj < best_obj) {
      best_obj = obj;
      best.beta = beta;
      best.problem = std::move(p);
      best.solution = std::move(s);
      have_best = true;
    }
    return obj;
  };

  const double lo = std::log(search.beta_min);
  const double hi = std::log(search.beta_max);
  const int n = search.budget;
  std::vector<double> grid(n), values(n);
  for (int i = 0; i < n; ++i) {
    grid[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / (n - 1);
    values[i] = evaluate(grid[i]);
  }
  if (!have_best) {
    std::ostringstream msg;
    msg << "no feasible beta on the grid; tried";
    for (const auto& e : best.evaluations) msg << ' ' << e.beta;
    msg << " (last solve: " << best.evaluations.back().diagnostics << ")";
    throw Error(ErrorKind::kInfeasible, msg.str());
  }

  const int ibest = static_cast<int>(std::min_element(values.begin(), values.end()) - values.begin());
  double a = grid[std::max(ibest - 1, 0)];
  double b = grid[std::min(ibest + 1, n - 1)];
  if (b > a && search.refine_steps > 0) {
    const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - ratio * (b - a);
    double x2 = a + ratio * (b - a);
    double f1 = evaluate(x1);
    double f2 = evaluate(x2);
    for (int k = 2; k < search.refine_steps; ++k) {
      if (f1 <= f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - ratio * (b - a);
        f1 = evaluate(x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + ratio * (b - a);
        f2 = evaluate(x2);
      }
    }
  }
  return best;
}

}  // namespace hominv::sdp
