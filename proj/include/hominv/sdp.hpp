#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "hominv/numerics.hpp"

namespace hominv::sdp {

// Matrix-valued affine expression  C + sum_k z_k * F_k  in the scalar unknowns
// z of an SdpProblem. Only the nonzero coefficient matrices are stored.
class AffineExpr {
 public:
  AffineExpr() = default;
  explicit AffineExpr(Mat constant) : constant_(std::move(constant)) {}
  static AffineExpr zero(Eigen::Index rows, Eigen::Index cols) {
    return AffineExpr(Mat::Zero(rows, cols));
  }

  Eigen::Index rows() const { return constant_.rows(); }
  Eigen::Index cols() const { return constant_.cols(); }
  const Mat& constant() const { return constant_; }
  const std::map<int, Mat>& terms() const { return terms_; }
  /// Largest referenced unknown index, or -1 for a constant expression.
  int max_index() const { return terms_.empty() ? -1 : terms_.rbegin()->first; }

  void add_term(int index, const Mat& coeff);

  AffineExpr transpose() const;
  AffineExpr trace() const;
  Mat evaluate(const Vec& z) const;

  AffineExpr& operator+=(const AffineExpr& rhs);
  AffineExpr& operator-=(const AffineExpr& rhs);
  AffineExpr& operator*=(double s);

  friend AffineExpr operator+(AffineExpr lhs, const AffineExpr& rhs) { return lhs += rhs; }
  friend AffineExpr operator-(AffineExpr lhs, const AffineExpr& rhs) { return lhs -= rhs; }
  friend AffineExpr operator-(AffineExpr e) { return e *= -1.0; }
  friend AffineExpr operator*(double s, AffineExpr e) { return e *= s; }
  friend AffineExpr operator*(AffineExpr e, double s) { return e *= s; }
  friend AffineExpr operator+(AffineExpr lhs, const Mat& rhs) { return lhs += AffineExpr(rhs); }
  friend AffineExpr operator-(AffineExpr lhs, const Mat& rhs) { return lhs -= AffineExpr(rhs); }
  friend AffineExpr operator*(const Mat& lhs, const AffineExpr& e);
  friend AffineExpr operator*(const AffineExpr& e, const Mat& rhs);

  /// Assembles a block matrix; every row of blocks must agree in height and
  /// every column in width.
  static AffineExpr block(const std::vector<std::vector<AffineExpr>>& blocks);

 private:
  Mat constant_;
  std::map<int, Mat> terms_;
};

struct VariableBlock {
  std::string name;
  bool symmetric = false;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  int offset = 0;  // first scalar unknown
  int count = 0;   // number of scalar unknowns
};

struct Constraint {
  std::string name;
  AffineExpr expr;
};

// min  objective(z)
// s.t. psd constraints    expr(z) >= 0   (symmetric part)
//      zero constraints   expr(z) == 0   (entrywise)
class SdpProblem {
 public:
  /// Symmetric n x n unknown; returns its expression.
  AffineExpr add_symmetric(const std::string& name, Eigen::Index n);
  /// General rows x cols unknown.
  AffineExpr add_matrix(const std::string& name, Eigen::Index rows, Eigen::Index cols);

  void add_psd(const std::string& name, const AffineExpr& expr);
  void add_zero(const std::string& name, const AffineExpr& expr);
  /// 1x1 objective, minimized. Defaults to 0 (pure feasibility).
  void minimize(const AffineExpr& objective);

  int num_scalars() const { return num_scalars_; }
  const std::vector<VariableBlock>& blocks() const { return blocks_; }
  const std::vector<Constraint>& psd() const { return psd_; }
  const std::vector<Constraint>& zeros() const { return zeros_; }
  const AffineExpr& objective() const { return objective_; }

  Mat block_value(std::size_t block, const Vec& z) const;
  AffineExpr block_expr(std::size_t block) const;

 private:
  void check_expr(const AffineExpr& expr, const char* what) const;

  int num_scalars_ = 0;
  std::vector<VariableBlock> blocks_;
  std::vector<Constraint> psd_;
  std::vector<Constraint> zeros_;
  AffineExpr objective_ = AffineExpr(Mat::Zero(1, 1));
};

enum class SdpStatus { kOptimal, kInfeasible, kNumericalFailure };
const char* to_string(SdpStatus status);

struct SdpSettings {
  double tol = 1e-9;              // relative gap / residual target
  int max_iterations = 120;
  double radius = 1e6;            // ||z - z_particular|| bound keeping the set compact
  double feasibility_tol = 1e-9;  // phase-1 slack below which a problem is infeasible
  double violation_tol = 1e-7;    // accepted worst cone violation, relative to max(1, |z|_inf)
};

struct SdpSolution {
  SdpStatus status = SdpStatus::kNumericalFailure;
  std::vector<Mat> values;           // per variable block
  Vec z;                             // raw scalar unknowns
  double objective = 0.0;
  std::vector<double> margins;       // min eigenvalue per psd constraint
  double worst_violation = 0.0;      // max(0, -min margin)
  double equality_residual = 0.0;
  double scale = 1.0;                // max(1, |z|_inf)
  int iterations = 0;
  bool radius_active = false;
  std::string diagnostics;
};

SdpSolution solve_sdp(const SdpProblem& problem, const SdpSettings& settings = {});

/// Recomputes min-eigenvalue margins of every psd constraint at z, outside
/// the solver.
std::vector<double> constraint_margins(const SdpProblem& problem, const Vec& z);

struct BetaSearchSettings {
  double beta_min = 1e-3;
  double beta_max = 1e3;
  int budget = 40;
  int refine_steps = 25;
};

struct BetaEvaluation {
  double beta = 0.0;
  SdpStatus status = SdpStatus::kNumericalFailure;
  double objective = 0.0;
  std::string diagnostics;
};

struct BetaSearchResult {
  double beta = 0.0;
  SdpProblem problem;
  SdpSolution solution;
  std::vector<BetaEvaluation> evaluations;
};

using ProblemFamily = std::function<SdpProblem(double beta)>;

/// Log-spaced grid over [beta_min, beta_max] followed by golden-section
/// refinement (in log beta) around the best feasible grid point. Throws
/// kInfeasible listing the tried values when no grid point is feasible.
BetaSearchResult beta_search(const ProblemFamily& family, const BetaSearchSettings& search = {},
                             const SdpSettings& settings = {});

}  // namespace hominv::sdp
