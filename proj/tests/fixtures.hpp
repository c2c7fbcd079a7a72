#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "hominv/controller.hpp"
#include "hominv/ellipsoid.hpp"
#include "hominv/simulate.hpp"
#include "hominv/synthesis.hpp"

namespace hominv::testing {

// Printed pendulum design values.
Mat g0_printed();
Mat y0_printed();
Mat x_printed();
Mat k_printed();
Vec sinusoid_amplitude();

/// Pendulum with D = I and Q = diag(2, 2, 1, 2).
LinearPlant pendulum_plant();
/// u_bar = 5, rho = 0.5.
DesignOptions pendulum_options();

struct PendulumDesign {
  LinearPlant plant;
  GeneratorSolution gs;
  EllipsoidCertificate linear;
  EllipsoidCertificate refit;  // mu = -0.7, K from the linear optimum
  HomogeneousController linear_controller() const;
  HomogeneousController refit_controller() const;
};
/// Computed once per process.
const PendulumDesign& pendulum_design();

Mat random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng, double scale = 1.0);
/// Q diag(e) Q' with eigenvalues log-uniform in [1, cond].
Mat random_spd(Eigen::Index n, std::mt19937_64& rng, double cond = 10.0);
Vec random_vector(Eigen::Index n, std::mt19937_64& rng);

/// exp(s M) from a truncated power series after halving until ||s M|| <= 0.5.
Mat expm_series(const Mat& m, double s, int terms = 60);

/// Reads HOMINV_DATA_DIR, falling back to the source tree.
std::string data_path(const std::string& file);

}  // namespace hominv::testing
