#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "hominv/controller.hpp"
#include "hominv/plant.hpp"

namespace hominv {

// Rotary inverted pendulum parameters (SI units).
struct PendulumParams {
  double Rm = 8.4;
  double Km = 0.042;
  double mr = 0.095;
  double r = 0.085;
  double Jr = 0.085 * 0.085 * 0.095 / 3.0;
  double br = 1e-3;
  double mp = 0.024;
  double Lp = 0.129;
  double l = 0.129 / 2.0;
  double Jp = 0.024 * 0.129 * 0.129 / 3.0;
  double bp = 5e-5;
  double g = 9.81;
  std::optional<double> Jt;  // overrides the default convention below

  /// Jt, defaulting to Jp Jr + mp l^2 Jr + Jp mp r^2.
  double total_inertia() const;
  void validate() const;
};

/// Linearized (A, B) with state (theta, alpha, theta', alpha').
std::pair<Mat, Mat> build_pendulum(const PendulumParams& p);

using Disturbance = std::function<Vec(double)>;

Disturbance zero_disturbance(Eigen::Index p);
/// amplitude * sin(frequency * t).
Disturbance sinusoid(Vec amplitude, double frequency);
/// Piecewise-constant admissible samples (w' Q w <= 1), redrawn every `hold`
/// seconds from a seeded stream; deterministic in (Q, seed, hold).
Disturbance random_admissible(const Mat& Q, std::uint64_t seed, double hold, double horizon);

struct Trajectory {
  double dt = 0.0;
  std::vector<double> t;
  std::vector<Vec> x;
  std::vector<Vec> u;
  std::vector<Vec> w;
  std::vector<double> homnorm;

  std::size_t size() const { return t.size(); }
};

/// Fixed-step RK4 on x' = A x + B u(x) + D w(t). Throws kDivergence when
/// ||x|| exceeds 1e9 and kInput for dt <= 0 or T < dt.
Trajectory simulate(const LinearPlant& plant, const HomogeneousController& c,
                    const Disturbance& w, double T, double dt, const Vec& x0);

struct ChannelMetrics {
  double linf = 0.0;
  double l2 = 0.0;
};

struct MetricSet {
  double t_start = 0.0;
  double t_end = 0.0;
  std::vector<ChannelMetrics> x;
  std::vector<ChannelMetrics> u;
};

/// L-infinity and L2 (sqrt(sum v^2 dt)) per channel over grid points in
/// [t_start, t_end]. Throws kInput for an empty window.
MetricSet metrics(const Trajectory& tr, double t_start, double t_end);
/// Last third of the horizon.
std::pair<double, double> steady_window(const Trajectory& tr);

struct ComparisonReport {
  MetricSet linear;
  MetricSet homogeneous;
  std::vector<ChannelMetrics> x_improvement;  // percent, per state
  std::vector<ChannelMetrics> u_improvement;
};

double improvement_percent(double linear, double homogeneous);

ComparisonReport compare(const LinearPlant& plant, const HomogeneousController& lin,
                         const HomogeneousController& hom, const Disturbance& w, double T,
                         double dt, const Vec& x0);

/// Header t,x1..xn,u1..um,w1..wp,homnorm; %.17g values.
void write_csv(std::ostream& os, const Trajectory& tr);
/// key = value lines, keys prefixed with `prefix`.
void write_metrics(std::ostream& os, const MetricSet& m, const std::string& prefix);
void write_report(std::ostream& os, const ComparisonReport& r);

}  // namespace hominv
