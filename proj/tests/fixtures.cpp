#include "fixtures.hpp"

#include <cmath>
#include <cstdlib>

namespace hominv::testing {

Mat g0_printed() {
  Mat g(4, 4);
  g << -3, 2.02, 0, 0, 0, -1, 0, 0, 0, 0.38, -2, 2.02, 0, 0, 0, 0;
  return g;
}

Mat y0_printed() {
  Mat y(1, 4);
  y << 0, 10.65, -0.73, 0.47;
  return y;
}

Mat x_printed() {
  Mat x(4, 4);
  x << 1.33, 0.11, -0.87, 0.42, 0.11, 0.05, -0.51, -0.58, -0.87, -0.51, 48.52, 35.47, 0.42,
      -0.58, 35.47, 30.13;
  return x;
}

Mat k_printed() {
  Mat k(1, 4);
  k << 27.12, -177.13, 10.91, -17.93;
  return k;
}

Vec sinusoid_amplitude() {
  Vec a(4);
  a << 0.2, 0.3, 0.3, 0.4;
  return a;
}

LinearPlant pendulum_plant() {
  LinearPlant plant;
  std::tie(plant.A, plant.B) = build_pendulum(PendulumParams{});
  plant.D = Mat::Identity(4, 4);
  plant.Q = Vec((Vec(4) << 2, 2, 1, 2).finished()).asDiagonal();
  return plant;
}

DesignOptions pendulum_options() {
  DesignOptions o;
  o.u_bar = 5.0;
  o.rho = 0.5;
  return o;
}

HomogeneousController PendulumDesign::linear_controller() const {
  return HomogeneousController::linear(gs.K0, linear.K(), linear.P());
}

HomogeneousController PendulumDesign::refit_controller() const {
  return HomogeneousController(gs.K0, refit.K(), refit.P(), make_dilation(gs, -0.7));
}

const PendulumDesign& pendulum_design() {
  static const PendulumDesign design = [] {
    PendulumDesign d;
    d.plant = pendulum_plant();
    d.gs = solve_generator(d.plant.A, d.plant.B);
    d.linear = min_trace_linear(d.plant, d.gs, pendulum_options());
    d.refit = refit_x_fixed_k(d.plant, d.gs, make_dilation(d.gs, -0.7), d.linear.K(),
                              pendulum_options());
    return d;
  }();
  return design;
}

Mat random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = scale * normal(rng);
  return m;
}

Mat random_spd(Eigen::Index n, std::mt19937_64& rng, double cond) {
  const Mat q = random_matrix(n, n, rng).householderQr().householderQ();
  std::uniform_real_distribution<double> u(0.0, std::log(cond));
  Vec e(n);
  for (Eigen::Index i = 0; i < n; ++i) e(i) = std::exp(u(rng));
  return q * e.asDiagonal() * q.transpose();
}

Vec random_vector(Eigen::Index n, std::mt19937_64& rng) { return random_matrix(n, 1, rng); }

Mat expm_series(const Mat& m, double s, int terms) {
  Mat a = s * m;
  int squarings = 0;
  while (a.norm() > 0.5) {
    a /= 2.0;
    ++squarings;
  }
  Mat sum = Mat::Identity(m.rows(), m.cols());
  Mat term = sum;
  for (int k = 1; k <= terms; ++k) {
    term = term * a / static_cast<double>(k);
    sum += term;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

std::string data_path(const std::string& file) {
  const char* dir = std::getenv("HOMINV_DATA_DIR");
  return std::string(dir ? dir : HOMINV_SOURCE_DATA_DIR) + "/" + file;
}

}  // namespace hominv::testing
