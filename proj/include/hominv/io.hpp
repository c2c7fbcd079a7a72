#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "hominv/controller.hpp"
#include "hominv/ellipsoid.hpp"
#include "hominv/simulate.hpp"

namespace hominv::io {

using json = nlohmann::json;

struct DisturbanceSpec {
  std::string kind = "zero";  // zero | sinusoid | seeded-random-admissible
  Vec amplitude;
  double frequency = 0.5;
  std::uint64_t seed = 0;
  double hold = 0.1;
};

struct SimulationSpec {
  double T = 30.0;
  double dt = 1e-3;
  std::optional<Vec> x0;
  DisturbanceSpec disturbance;
};

// Problem file: plant (explicit A/B or a "pendulum" parameter object), D, Q,
// design scalars, solver and simulation settings.
struct ProblemFile {
  LinearPlant plant;
  std::optional<PendulumParams> pendulum;
  double mu = 0.0;
  double rho = 1.0;
  std::optional<double> u_bar;
  std::optional<Mat> K;
  std::uint64_t seed = 1;
  double strict_margin = 1e-9;
  sdp::BetaSearchSettings search;
  sdp::SdpSettings sdp;
  SimulationSpec simulation;

  DesignOptions design_options() const;
};

Mat matrix_from_json(const json& j, const char* what);
Vec vector_from_json(const json& j, const char* what);
json to_json(const Mat& m);
json to_json(const Vec& v);

ProblemFile parse_problem(const json& j);
ProblemFile read_problem(const std::string& path);

Disturbance make_disturbance(const SimulationSpec& spec, const LinearPlant& plant);

json controller_to_json(const HomogeneousController& c);
HomogeneousController controller_from_json(const json& j);

struct CertificateFile {
  EllipsoidCertificate cert;
  LinearPlant plant;
  Mat K0;
};

json certificate_to_json(const EllipsoidCertificate& cert, const LinearPlant& plant,
                         const Mat& K0);
CertificateFile certificate_from_json(const json& j);

/// Throws kInput when the file cannot be read or parsed.
json read_json(const std::string& path);
/// Two-space indented, trailing newline.
void write_json(const std::string& path, const json& j);

}  // namespace hominv::io
