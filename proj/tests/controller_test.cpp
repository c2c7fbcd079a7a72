#include "hominv/controller.hpp"

#include <cmath>
#include <optional>
#include <random>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "hominv/numerics.hpp"
#include "hominv/synthesis.hpp"

namespace hominv {
namespace {

using testing::pendulum_design;
using testing::PendulumDesign;
using testing::random_vector;

Mat chain_a(Eigen::Index n) {
  Mat a = Mat::Zero(n, n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) a(i, i + 1) = 1.0;
  return a;
}

Mat last_column(Eigen::Index n) {
  Mat b = Mat::Zero(n, 1);
  b(n - 1, 0) = 1.0;
  return b;
}

// mu = -1 controller on the triple integrator with a random monotone P.
HomogeneousController bounded_controller(std::mt19937_64& rng) {
  const GeneratorSolution gs = solve_generator(chain_a(3), last_column(3));
  const Dilation d = make_dilation(gs, -1.0);
  while (true) {
    const Mat P = testing::random_spd(3, rng, 10.0);
    try {
      return HomogeneousController(Mat::Zero(1, 3), testing::random_matrix(1, 3, rng), P, d);
    } catch (const Error&) {
    }
  }
}

TEST(ControllerTest, DegreeZeroIsLinear) {
  const PendulumDesign& pd = pendulum_design();
  const Dilation d = make_dilation(pd.gs, 0.0);
  const HomogeneousController c(pd.gs.K0, pd.linear.K(), pd.linear.P(), d);
  EXPECT_TRUE(c.is_linear());
  std::mt19937_64 rng(1);
  for (int i = 0; i < 1000; ++i) {
    const Vec x = random_vector(4, rng);
    const Vec expected = (pd.gs.K0 + pd.linear.K()) * x;
    EXPECT_LE((c.eval_u(x) - expected).norm(), 1e-10 * (1.0 + expected.norm()));
  }
}

TEST(ControllerTest, SmallDegreeApproachesLinear) {
  const PendulumDesign& pd = pendulum_design();
  const HomogeneousController c(pd.gs.K0, pd.linear.K(), pd.linear.P(),
                                make_dilation(pd.gs, -1e-9));
  EXPECT_FALSE(c.is_linear());
  std::mt19937_64 rng(2);
  for (int i = 0; i < 200; ++i) {
    const Vec x = random_vector(4, rng);
    const Vec expected = (pd.gs.K0 + pd.linear.K()) * x;
    EXPECT_LE((c.eval_u(x) - expected).norm(), 1e-6 * (1.0 + expected.norm()));
  }
}

TEST(ControllerTest, ZeroStateGivesZeroControl) {
  const PendulumDesign& pd = pendulum_design();
  EXPECT_EQ(pd.refit_controller().eval_u(Vec::Zero(4)), Vec::Zero(1));
  EXPECT_EQ(pd.linear_controller().eval_u(Vec::Zero(4)), Vec::Zero(1));
  std::mt19937_64 rng(3);
  EXPECT_EQ(bounded_controller(rng).eval_u(Vec::Zero(3)), Vec::Zero(1));
}

TEST(ControllerTest, ContinuousAtOrigin) {
  const PendulumDesign& pd = pendulum_design();
  const HomogeneousController c(Mat::Zero(1, 4), pd.refit.K(), pd.refit.P(),
                                make_dilation(pd.gs, -0.7));
  const double gain = norm2(c.K() * inv_sqrtm_spd(c.P()));
  std::mt19937_64 rng(4);
  for (int i = 0; i < 20; ++i) {
    const Vec x = random_vector(4, rng);
    const double u0 = c.eval_u(x).norm();
    for (int k = 1; k <= 40; ++k) {
      const Vec y = x * std::pow(10.0, -k);
      const double r = c.norm().norm(y);
      const double u = c.eval_u(y).norm();
      if (r >= c.norm_floor()) {
        EXPECT_LE(u, gain * std::pow(r, c.mu() + 1.0) * (1.0 + 1e-9)) << "k = " << k;
      }
    }
    EXPECT_LT(c.eval_u(x * 1e-40).norm(), 1e-6 * u0);
  }
}

TEST(ControllerTest, ContinuousAcrossNormFloor) {
  const PendulumDesign& pd = pendulum_design();
  const HomogeneousController c(pd.gs.K0, pd.refit.K(), pd.refit.P(), make_dilation(pd.gs, -0.7),
                                1e-3);
  std::mt19937_64 rng(5);
  for (int i = 0; i < 20; ++i) {
    const Vec z = c.norm().project(random_vector(4, rng));
    const Vec above = c.dilation().apply(std::log(1e-3 * (1.0 + 1e-9)), z);
    const Vec below = c.dilation().apply(std::log(1e-3 * (1.0 - 1e-9)), z);
    EXPECT_NEAR(c.eval_u(above)(0), c.eval_u(below)(0), 1e-9 * (1.0 + c.eval_u(above).norm()));
  }
}

TEST(ControllerTest, HomogeneousOfDegreeMuPlusOne) {
  const PendulumDesign& pd = pendulum_design();
  const Dilation d = make_dilation(pd.gs, -0.7);
  const HomogeneousController c(Mat::Zero(1, 4), pd.refit.K(), pd.refit.P(), d);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> s_dist(-3.0, 3.0);
  for (int i = 0; i < 200; ++i) {
    const Vec x = random_vector(4, rng);
    const double s = s_dist(rng);
    const Vec lhs = c.eval_u(d.apply(s, x));
    const Vec rhs = std::exp((c.mu() + 1.0) * s) * c.eval_u(x);
    EXPECT_LE((lhs - rhs).norm(), 1e-8 * (1.0 + rhs.norm()));
  }
}

TEST(SupUBoundTest, ZeroGain) {
  std::mt19937_64 rng(7);
  const HomogeneousController c = bounded_controller(rng);
  const HomogeneousController zero(Mat::Zero(1, 3), Mat::Zero(1, 3), c.P(), c.dilation());
  EXPECT_EQ(zero.sup_u_bound(), 0.0);
}

TEST(SupUBoundTest, ScalarClosedForm) {
  Mat K(1, 1), P(1, 1);
  K << -3.0;
  P << 4.0;
  const HomogeneousController c(Mat::Zero(1, 1), K, P, Dilation(Mat::Identity(1, 1) * 2.0, -1.0));
  EXPECT_NEAR(c.sup_u_bound(), 1.5, 1e-15);
  for (double x : {1e-6, 0.3, 7.0, -2.0}) {
    EXPECT_NEAR(std::abs(c.eval_u(Vec::Constant(1, x))(0)), 1.5, 1e-12);
  }
}

TEST(SupUBoundTest, MonteCarloAttainsBound) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> s_dist(-4.0, 4.0);
  for (int trial = 0; trial < 5; ++trial) {
    const HomogeneousController c = bounded_controller(rng);
    const double bound = c.sup_u_bound();
    double worst = 0.0;
    for (int i = 0; i < 20000; ++i) {
      const Vec x = random_vector(3, rng) * std::exp(s_dist(rng));
      worst = std::max(worst, c.eval_u(x).norm());
    }
    EXPECT_LE(worst, bound * (1.0 + 1e-6));
    EXPECT_GE(worst, bound * 0.95);

    // Maximizer of |K z| over the unit P-sphere, pushed off to large scale.
    const Mat root_inv = inv_sqrtm_spd(c.P());
    const EigenReport er = sym_eig(root_inv * c.K().transpose() * c.K() * root_inv);
    const Vec z = root_inv * er.vectors.col(er.values.size() - 1);
    const Vec far = c.dilation().apply(5.0, z);
    EXPECT_NEAR(c.eval_u(far).norm(), bound, 1e-8 * bound);
  }
}

TEST(SupUBoundTest, NotApplicable) {
  const PendulumDesign& pd = pendulum_design();
  try {
    pd.refit_controller().sup_u_bound();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNotApplicable);
  }
  std::mt19937_64 rng(9);
  const HomogeneousController b = bounded_controller(rng);
  const HomogeneousController shifted(Mat::Ones(1, 3), b.K(), b.P(), b.dilation());
  EXPECT_THROW(shifted.sup_u_bound(), Error);
}

TEST(ControllerTest, ConstructorValidation) {
  const PendulumDesign& pd = pendulum_design();
  const Dilation d = make_dilation(pd.gs, -0.7);
  try {
    HomogeneousController(pd.gs.K0, Mat::Zero(1, 3), pd.refit.P(), d);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDimension);
  }
  try {
    HomogeneousController(pd.gs.K0, pd.refit.K(), pd.refit.P(), d, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInput);
  }
  Mat bad = pd.refit.K();
  bad(0, 0) = std::nan("");
  EXPECT_THROW(HomogeneousController(pd.gs.K0, bad, pd.refit.P(), d), Error);
}

}  // namespace
}  // namespace hominv
