#include "hominv/io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace hominv::io {

namespace {

double number(const json& j, const char* what) {
  if (!j.is_number()) throw Error(ErrorKind::kInput, std::string(what) + ": expected a number");
  return j.get<double>();
}

template <typename T>
T value_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kInput, std::string("field '") + key + "': " + e.what());
  }
}

std::optional<double> optional_number(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return number(j.at(key), key);
}

}  // namespace

Mat matrix_from_json(const json& j, const char* what) {
  if (j.is_object() && j.contains("diag")) {
    const Vec d = vector_from_json(j.at("diag"), what);
    return d.asDiagonal();
  }
  if (!j.is_array() || j.empty()) {
    throw Error(ErrorKind::kInput, std::string(what) + ": expected a nested row array");
  }
  const std::size_t rows = j.size();
  const std::size_t cols = j.front().is_array() ? j.front().size() : 0;
  if (cols == 0) throw Error(ErrorKind::kInput, std::string(what) + ": rows must be arrays");
  Mat m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols) {
      throw Error(ErrorKind::kDimension, std::string(what) + ": ragged rows");
    }
    for (std::size_t k = 0; k < cols; ++k) m(i, k) = number(j[i][k], what);
  }
  return m;
}

Vec vector_from_json(const json& j, const char* what) {
  if (!j.is_array()) throw Error(ErrorKind::kInput, std::string(what) + ": expected an array");
  Vec v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(i) = number(j[i], what);
  return v;
}

json to_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

json to_json(const Vec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

DesignOptions ProblemFile::design_options() const {
  DesignOptions o;
  o.u_bar = u_bar;
  o.rho = rho;
  o.strict_margin = strict_margin;
  o.search = search;
  o.sdp = sdp;
  return o;
}

namespace {

PendulumParams parse_pendulum(const json& j) {
  PendulumParams p;
  if (!j.is_object()) throw Error(ErrorKind::kInput, "pendulum: expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const double v = number(it.value(), it.key().c_str());
    const std::string& k = it.key();
    if (k == "Rm") p.Rm = v;
    else if (k == "Km") p.Km = v;
    else if (k == "mr") p.mr = v;
    else if (k == "r") p.r = v;
    else if (k == "Jr") p.Jr = v;
    else if (k == "br") p.br = v;
    else if (k == "mp") p.mp = v;
    else if (k == "Lp") p.Lp = v;
    else if (k == "l") p.l = v;
    else if (k == "Jp") p.Jp = v;
    else if (k == "bp") p.bp = v;
    else if (k == "g") p.g = v;
    else if (k == "Jt") p.Jt = v;
    else throw Error(ErrorKind::kInput, "pendulum: unknown parameter '" + k + "'");
  }
  return p;
}

DisturbanceSpec parse_disturbance(const json& j) {
  DisturbanceSpec d;
  d.kind = value_or<std::string>(j, "kind", "zero");
  if (d.kind == "sinusoid") {
    if (!j.contains("amplitude")) throw Error(ErrorKind::kInput, "sinusoid: amplitude missing");
    d.amplitude = vector_from_json(j.at("amplitude"), "amplitude");
    d.frequency = value_or<double>(j, "frequency", 0.5);
  } else if (d.kind == "seeded-random-admissible") {
    if (!j.contains("seed")) throw Error(ErrorKind::kInput, "random disturbance: seed missing");
    d.seed = value_or<std::uint64_t>(j, "seed", 0);
    d.hold = value_or<double>(j, "hold", 0.1);
  } else if (d.kind != "zero") {
    throw Error(ErrorKind::kInput, "unknown disturbance kind '" + d.kind + "'");
  }
  return d;
}

}  // namespace

ProblemFile parse_problem(const json& j) {
  if (!j.is_object()) throw Error(ErrorKind::kInput, "problem file: expected an object");
  ProblemFile pf;
  if (j.contains("pendulum")) {
    if (j.contains("A") || j.contains("B")) {
      throw Error(ErrorKind::kInput, "problem file: give either A/B or pendulum, not both");
    }
    pf.pendulum = parse_pendulum(j.at("pendulum"));
    std::tie(pf.plant.A, pf.plant.B) = build_pendulum(*pf.pendulum);
  } else {
    if (!j.contains("A") || !j.contains("B")) {
      throw Error(ErrorKind::kInput, "problem file: A and B (or pendulum) required");
    }
    pf.plant.A = matrix_from_json(j.at("A"), "A");
    pf.plant.B = matrix_from_json(j.at("B"), "B");
  }
  if (!j.contains("D") || !j.contains("Q")) {
    throw Error(ErrorKind::kInput, "problem file: D and Q required");
  }
  pf.plant.D = matrix_from_json(j.at("D"), "D");
  pf.plant.Q = matrix_from_json(j.at("Q"), "Q");
  pf.plant.validate();

  pf.mu = value_or<double>(j, "mu", 0.0);
  pf.rho = value_or<double>(j, "rho", 1.0);
  pf.u_bar = optional_number(j, "u_bar");
  if (j.contains("K")) {
    pf.K = matrix_from_json(j.at("K"), "K");
    if (pf.K->rows() != pf.plant.m() || pf.K->cols() != pf.plant.n()) {
      throw Error(ErrorKind::kDimension, "problem file: K must be m x n");
    }
  }
  pf.seed = value_or<std::uint64_t>(j, "seed", 1);
  pf.strict_margin = value_or<double>(j, "strict_margin", pf.strict_margin);

  if (j.contains("solver")) {
    const json& s = j.at("solver");
    pf.search.beta_min = value_or<double>(s, "beta_min", pf.search.beta_min);
    pf.search.beta_max = value_or<double>(s, "beta_max", pf.search.beta_max);
    pf.search.budget = value_or<int>(s, "budget", pf.search.budget);
    pf.search.refine_steps = value_or<int>(s, "refine_steps", pf.search.refine_steps);
    pf.sdp.tol = value_or<double>(s, "tol", pf.sdp.tol);
    pf.sdp.max_iterations = value_or<int>(s, "max_iterations", pf.sdp.max_iterations);
    pf.sdp.radius = value_or<double>(s, "radius", pf.sdp.radius);
    pf.sdp.feasibility_tol = value_or<double>(s, "feasibility_tol", pf.sdp.feasibility_tol);
    pf.sdp.violation_tol = value_or<double>(s, "violation_tol", pf.sdp.violation_tol);
  }
  if (j.contains("simulation")) {
    const json& s = j.at("simulation");
    pf.simulation.T = value_or<double>(s, "T", pf.simulation.T);
    pf.simulation.dt = value_or<double>(s, "dt", pf.simulation.dt);
    if (s.contains("x0")) {
      pf.simulation.x0 = vector_from_json(s.at("x0"), "x0");
      if (pf.simulation.x0->size() != pf.plant.n()) {
        throw Error(ErrorKind::kDimension, "simulation: x0 must have n entries");
      }
    }
    if (s.contains("disturbance")) pf.simulation.disturbance = parse_disturbance(s.at("disturbance"));
  }
  if (pf.simulation.disturbance.kind == "sinusoid" &&
      pf.simulation.disturbance.amplitude.size() != pf.plant.p()) {
    throw Error(ErrorKind::kDimension, "sinusoid: amplitude must have p entries");
  }
  return pf;
}

ProblemFile read_problem(const std::string& path) { return parse_problem(read_json(path)); }

Disturbance make_disturbance(const SimulationSpec& spec, const LinearPlant& plant) {
  const DisturbanceSpec& d = spec.disturbance;
  if (d.kind == "sinusoid") return sinusoid(d.amplitude, d.frequency);
  if (d.kind == "seeded-random-admissible") {
    return random_admissible(plant.Q, d.seed, d.hold, spec.T);
  }
  return zero_disturbance(plant.p());
}

json controller_to_json(const HomogeneousController& c) {
  json j;
  j["K0"] = to_json(c.K0());
  j["K"] = to_json(c.K());
  j["P"] = to_json(c.P());
  j["Gd"] = to_json(c.dilation().generator());
  j["mu"] = c.mu();
  j["norm_floor"] = c.norm_floor();
  return j;
}

HomogeneousController controller_from_json(const json& j) {
  for (const char* key : {"K0", "K", "P", "Gd", "mu"}) {
    if (!j.contains(key)) throw Error(ErrorKind::kInput, std::string("controller: missing ") + key);
  }
  const double mu = number(j.at("mu"), "mu");
  return HomogeneousController(matrix_from_json(j.at("K0"), "K0"), matrix_from_json(j.at("K"), "K"),
                               matrix_from_json(j.at("P"), "P"),
                               Dilation(matrix_from_json(j.at("Gd"), "Gd"), mu),
                               value_or<double>(j, "norm_floor", 1e-9));
}

namespace {

json margin_value(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

double margin_from(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::numeric_limits<double>::quiet_NaN();
  return number(j.at(key), key);
}

}  // namespace

json certificate_to_json(const EllipsoidCertificate& cert, const LinearPlant& plant,
                         const Mat& K0) {
  json j;
  j["family"] = to_string(cert.family);
  j["X"] = to_json(cert.X);
  j["Y"] = to_json(cert.Y);
  j["beta"] = cert.beta;
  j["mu"] = cert.mu;
  j["Gd"] = to_json(cert.Gd);
  j["K0"] = to_json(K0);
  j["trace"] = cert.trace();
  j["u_bar"] = cert.u_bar ? json(*cert.u_bar) : json(nullptr);
  j["rho"] = cert.rho ? json(*cert.rho) : json(nullptr);
  j["margins"] = {{"lmi", margin_value(cert.margins.lmi)},
                  {"X", margin_value(cert.margins.x)},
                  {"GdX", margin_value(cert.margins.gd)},
                  {"bounded_control", margin_value(cert.margins.bounded)},
                  {"stabilizing", margin_value(cert.margins.stabilizing)}};
  j["plant"] = {{"A", to_json(plant.A)},
                {"B", to_json(plant.B)},
                {"D", to_json(plant.D)},
                {"Q", to_json(plant.Q)}};
  return j;
}

CertificateFile certificate_from_json(const json& j) {
  for (const char* key : {"family", "X", "Y", "beta", "Gd", "K0", "plant"}) {
    if (!j.contains(key)) {
      throw Error(ErrorKind::kInput, std::string("certificate: missing ") + key);
    }
  }
  CertificateFile f;
  f.cert.family = family_from_string(j.at("family").get<std::string>());
  f.cert.X = matrix_from_json(j.at("X"), "X");
  f.cert.Y = matrix_from_json(j.at("Y"), "Y");
  f.cert.beta = number(j.at("beta"), "beta");
  f.cert.mu = value_or<double>(j, "mu", 0.0);
  f.cert.Gd = matrix_from_json(j.at("Gd"), "Gd");
  f.cert.u_bar = optional_number(j, "u_bar");
  f.cert.rho = optional_number(j, "rho");
  if (j.contains("margins")) {
    const json& m = j.at("margins");
    f.cert.margins.lmi = margin_from(m, "lmi");
    f.cert.margins.x = margin_from(m, "X");
    f.cert.margins.gd = margin_from(m, "GdX");
    f.cert.margins.bounded = margin_from(m, "bounded_control");
    f.cert.margins.stabilizing = margin_from(m, "stabilizing");
  }
  f.K0 = matrix_from_json(j.at("K0"), "K0");
  const json& p = j.at("plant");
  for (const char* key : {"A", "B", "D", "Q"}) {
    if (!p.contains(key)) throw Error(ErrorKind::kInput, std::string("certificate plant: missing ") + key);
  }
  f.plant.A = matrix_from_json(p.at("A"), "A");
  f.plant.B = matrix_from_json(p.at("B"), "B");
  f.plant.D = matrix_from_json(p.at("D"), "D");
  f.plant.Q = matrix_from_json(p.at("Q"), "Q");
  f.plant.validate();
  return f;
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kInput, "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kInput, "cannot parse '" + path + "': " + e.what());
  }
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kInput, "cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

}  // namespace hominv::io
