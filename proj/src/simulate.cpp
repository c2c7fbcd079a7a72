#include "hominv/simulate.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

namespace hominv {

double PendulumParams::total_inertia() const {
  if (Jt) return *Jt;
  return Jp * Jr + mp * l * l * Jr + Jp * mp * r * r;
}

void PendulumParams::validate() const {
  for (double v : {Rm, Km, mr, r, Jr, mp, Lp, l, Jp, g}) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorKind::kInput, "pendulum: masses, lengths and inertias must be positive");
    }
  }
  if (br < 0.0 || bp < 0.0) throw Error(ErrorKind::kInput, "pendulum: negative damping");
  if (!(total_inertia() > 0.0)) throw Error(ErrorKind::kInput, "pendulum: Jt must be positive");
}

std::pair<Mat, Mat> build_pendulum(const PendulumParams& p) {
  p.validate();
  const double Jt = p.total_inertia();
  const double motor = p.Km * p.Km / p.Rm;
  const double lrm = p.l * p.r * p.mp;
  Mat A = Mat::Zero(4, 4);
  A(0, 2) = 1.0;
  A(1, 3) = 1.0;
  A(2, 1) = p.l * p.l * p.r * p.g * p.mp * p.mp / Jt;
  A(2, 2) = -p.br * p.Jp / Jt - motor * p.Jp / Jt;
  A(2, 3) = -lrm * p.bp / Jt;
  A(3, 1) = p.g * p.l * p.mp * p.Jr / Jt;
  A(3, 2) = -lrm * p.br / Jt - motor * lrm / Jt;
  A(3, 3) = -p.Jr * p.bp / Jt;
  Mat B = Mat::Zero(4, 1);
  B(2, 0) = p.Km / p.Rm * p.Jp / Jt;
  B(3, 0) = p.Km / p.Rm * lrm / Jt;
  return {A, B};
}

Disturbance zero_disturbance(Eigen::Index p) {
  return [p](double) { return Vec(Vec::Zero(p)); };
}

Disturbance sinusoid(Vec amplitude, double frequency) {
  return [amplitude = std::move(amplitude), frequency](double t) {
    return Vec(amplitude * std::sin(frequency * t));
  };
}

Disturbance random_admissible(const Mat& Q, std::uint64_t seed, double hold, double horizon) {
  if (!(hold > 0.0) || !(horizon >= 0.0)) {
    throw Error(ErrorKind::kInput, "random_admissible: hold must be > 0");
  }
  const Eigen::Index p = Q.rows();
  const Mat root_inv = inv_sqrtm_spd(Q);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const auto count = static_cast<std::size_t>(std::ceil(horizon / hold)) + 2;
  std::vector<Vec> values;
  values.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    Vec v(p);
    do {
      for (Eigen::Index i = 0; i < p; ++i) v(i) = normal(rng);
    } while (v.norm() == 0.0);
    const double radius = std::pow(uniform(rng), 1.0 / static_cast<double>(p));
    Vec w = root_inv * (v / v.norm()) * radius;
    // Round-off in Q^{-1/2} must not push samples outside the ellipsoid.
    const double q = w.dot(Q * w);
    if (q > 1.0) w /= std::sqrt(q);
    values.push_back(w);
  }
  return [values = std::move(values), hold](double t) {
    const auto k = static_cast<std::size_t>(std::max(0.0, std::floor(t / hold)));
    return values[std::min(k, values.size() - 1)];
  };
}

Trajectory simulate(const LinearPlant& plant, const HomogeneousController& c,
                    const Disturbance& w, double T, double dt, const Vec& x0) {
  if (!(dt > 0.0) || !(T >= dt)) throw Error(ErrorKind::kInput, "simulate: need dt > 0, T >= dt");
  if (x0.size() != plant.n() || c.n() != plant.n() || c.m() != plant.m()) {
    throw Error(ErrorKind::kDimension, "simulate: plant, controller and x0 disagree");
  }
  const auto steps = static_cast<std::size_t>(std::llround(T / dt));
  auto rhs = [&](double t, const Vec& x) {
    return Vec(plant.A * x + plant.B * c.eval_u(x) + plant.D * w(t));
  };

  Trajectory tr;
  tr.dt = dt;
  tr.t.reserve(steps + 1);
  tr.x.reserve(steps + 1);
  tr.u.reserve(steps + 1);
  tr.w.reserve(steps + 1);
  tr.homnorm.reserve(steps + 1);
  Vec x = x0;
  for (std::size_t k = 0;; ++k) {
    const double t = static_cast<double>(k) * dt;
    if (!x.allFinite() || x.norm() > 1e9) {
      std::ostringstream msg;
      msg << "simulation diverged at t = " << t;
      throw Error(ErrorKind::kDivergence, msg.str());
    }
    tr.t.push_back(t);
    tr.x.push_back(x);
    tr.u.push_back(c.eval_u(x));
    tr.w.push_back(w(t));
    tr.homnorm.push_back(c.norm().norm(x));
    if (k == steps) break;
    const Vec k1 = rhs(t, x);
    const Vec k2 = rhs(t + 0.5 * dt, x + 0.5 * dt * k1);
    const Vec k3 = rhs(t + 0.5 * dt, x + 0.5 * dt * k2);
    const Vec k4 = rhs(t + dt, x + dt * k3);
    x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return tr;
}

std::pair<double, double> steady_window(const Trajectory& tr) {
  if (tr.t.empty()) throw Error(ErrorKind::kInput, "steady_window: empty trajectory");
  const double end = tr.t.back();
  return {end - end / 3.0, end};
}

MetricSet metrics(const Trajectory& tr, double t_start, double t_end) {
  MetricSet m;
  m.t_start = t_start;
  m.t_end = t_end;
  if (tr.t.empty()) throw Error(ErrorKind::kInput, "metrics: empty trajectory");
  const Eigen::Index n = tr.x.front().size(), nu = tr.u.front().size();
  m.x.assign(n, {});
  m.u.assign(nu, {});
  // Rounding slack so window ends that coincide with grid points count.
  const double slack = 1e-9 * tr.dt;
  std::size_t used = 0;
  for (std::size_t k = 0; k < tr.t.size(); ++k) {
    if (tr.t[k] < t_start - slack || tr.t[k] > t_end + slack) continue;
    ++used;
    for (Eigen::Index i = 0; i < n; ++i) {
      m.x[i].linf = std::max(m.x[i].linf, std::abs(tr.x[k](i)));
      m.x[i].l2 += tr.x[k](i) * tr.x[k](i) * tr.dt;
    }
    for (Eigen::Index i = 0; i < nu; ++i) {
      m.u[i].linf = std::max(m.u[i].linf, std::abs(tr.u[k](i)));
      m.u[i].l2 += tr.u[k](i) * tr.u[k](i) * tr.dt;
    }
  }
  if (used == 0 || !(t_end >= t_start)) {
    throw Error(ErrorKind::kInput, "metrics: window contains no grid points");
  }
  for (auto& c : m.x) c.l2 = std::sqrt(c.l2);
  for (auto& c : m.u) c.l2 = std::sqrt(c.l2);
  return m;
}

double improvement_percent(double linear, double homogeneous) {
  if (linear == 0.0) return 0.0;
  return (linear - homogeneous) / linear * 100.0;
}

ComparisonReport compare(const LinearPlant& plant, const HomogeneousController& lin,
                         const HomogeneousController& hom, const Disturbance& w, double T,
                         double dt, const Vec& x0) {
  const Trajectory a = simulate(plant, lin, w, T, dt, x0);
  const Trajectory b = simulate(plant, hom, w, T, dt, x0);
  const auto [t0, t1] = steady_window(a);
  ComparisonReport r;
  r.linear = metrics(a, t0, t1);
  r.homogeneous = metrics(b, t0, t1);
  auto diff = [](const std::vector<ChannelMetrics>& l, const std::vector<ChannelMetrics>& h) {
    std::vector<ChannelMetrics> out(l.size());
    for (std::size_t i = 0; i < l.size(); ++i) {
      out[i].linf = improvement_percent(l[i].linf, h[i].linf);
      out[i].l2 = improvement_percent(l[i].l2, h[i].l2);
    }
    return out;
  };
  r.x_improvement = diff(r.linear.x, r.homogeneous.x);
  r.u_improvement = diff(r.linear.u, r.homogeneous.u);
  return r;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_channels(std::ostream& os, const std::vector<ChannelMetrics>& ch,
                    const std::string& prefix, const char* name) {
  for (std::size_t i = 0; i < ch.size(); ++i) {
    os << prefix << name << i + 1 << ".linf = " << fmt(ch[i].linf) << '\n';
    os << prefix << name << i + 1 << ".l2 = " << fmt(ch[i].l2) << '\n';
  }
}

}  // namespace

void write_csv(std::ostream& os, const Trajectory& tr) {
  if (tr.t.empty()) return;
  const Eigen::Index n = tr.x.front().size(), m = tr.u.front().size(), p = tr.w.front().size();
  os << 't';
  for (Eigen::Index i = 1; i <= n; ++i) os << ",x" << i;
  for (Eigen::Index i = 1; i <= m; ++i) os << ",u" << i;
  for (Eigen::Index i = 1; i <= p; ++i) os << ",w" << i;
  os << ",homnorm\n";
  for (std::size_t k = 0; k < tr.t.size(); ++k) {
    os << fmt(tr.t[k]);
    for (Eigen::Index i = 0; i < n; ++i) os << ',' << fmt(tr.x[k](i));
    for (Eigen::Index i = 0; i < m; ++i) os << ',' << fmt(tr.u[k](i));
    for (Eigen::Index i = 0; i < p; ++i) os << ',' << fmt(tr.w[k](i));
    os << ',' << fmt(k < tr.homnorm.size() ? tr.homnorm[k] : 0.0) << '\n';
  }
}

void write_metrics(std::ostream& os, const MetricSet& m, const std::string& prefix) {
  os << prefix << "window.start = " << fmt(m.t_start) << '\n';
  os << prefix << "window.end = " << fmt(m.t_end) << '\n';
  write_channels(os, m.x, prefix, "x");
  write_channels(os, m.u, prefix, "u");
}

void write_report(std::ostream& os, const ComparisonReport& r) {
  write_metrics(os, r.linear, "linear.");
  write_metrics(os, r.homogeneous, "homogeneous.");
  write_channels(os, r.x_improvement, "improvement_percent.", "x");
  write_channels(os, r.u_improvement, "improvement_percent.", "u");
}

}  // namespace hominv
