#include "hominv/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <CLI11.hpp>

#include "hominv/io.hpp"

namespace hominv::cli {

namespace fs = std::filesystem;
using io::json;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInfeasible:
    case ErrorKind::kNoSolution:
    case ErrorKind::kDegenerateSolution:
    case ErrorKind::kNotMonotone:
    case ErrorKind::kInconsistentGenerator:
      return kInfeasibleExit;
    case ErrorKind::kDivergence:
      return kDivergenceExit;
    default:
      return kInputError;
  }
}

namespace {

template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error [" << to_string(e.kind()) << "]: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
}

fs::path prepare_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::kInput, "cannot create '" + dir + "': " + ec.message());
  return fs::path(dir);
}

json tolerances(const io::ProblemFile& pf) {
  return {{"sdp_tol", pf.sdp.tol},
          {"feasibility_tol", pf.sdp.feasibility_tol},
          {"violation_tol", pf.sdp.violation_tol},
          {"radius", pf.sdp.radius},
          {"strict_margin", pf.strict_margin},
          {"accept_tol", pf.design_options().accept_tol}};
}

json manifest(const std::string& command, json seeds, json tol) {
  return {{"tool", kToolName},
          {"version", kToolVersion},
          {"command", command},
          {"seeds", std::move(seeds)},
          {"tolerances", std::move(tol)}};
}

void describe(std::ostream& log, const EllipsoidCertificate& c) {
  log << std::setprecision(17);
  log << "family = " << to_string(c.family) << '\n';
  log << "mu = " << c.mu << '\n';
  log << "beta = " << c.beta << '\n';
  log << "trace = " << c.trace() << '\n';
  log << "margin.lmi = " << c.margins.lmi << '\n';
  log << "margin.X = " << c.margins.x << '\n';
  log << "margin.GdX = " << c.margins.gd << '\n';
  if (!std::isnan(c.margins.bounded)) log << "margin.bounded_control = " << c.margins.bounded << '\n';
  if (!std::isnan(c.margins.stabilizing)) log << "margin.stabilizing = " << c.margins.stabilizing << '\n';
  if (!c.diagnostics.empty()) log << "diagnostics = " << c.diagnostics << '\n';
}

}  // namespace

int cmd_design(const DesignArgs& args, const std::string& command, std::ostream& out,
               std::ostream& err) {
  return guarded(err, [&]() -> int {
    io::ProblemFile pf = io::read_problem(args.problem);
    if (args.mu) pf.mu = *args.mu;
    if (args.rho) pf.rho = *args.rho;
    const DesignOptions options = pf.design_options();
    const LinearPlant& plant = pf.plant;

    std::ostringstream log;
    log << std::setprecision(17);
    const GeneratorSolution gs = solve_generator(plant.A, plant.B, pf.seed);
    log << "mode = " << args.mode << '\n';
    log << "generator.residual = " << gs.residual << '\n';
    log << "generator.homogeneity_residual = " << gs.homogeneity_residual << '\n';
    log << "generator.n_tilde = " << gs.n_tilde << '\n';
    log << "generator.retries = " << gs.retries << '\n';

    EllipsoidCertificate cert;
    std::optional<HomogeneousController> controller;
    if (args.mode == "linear") {
      cert = min_trace_linear(plant, gs, options);
      controller = HomogeneousController::linear(gs.K0, cert.K(), cert.P());
    } else if (args.mode == "homogeneous") {
      const Dilation d = make_dilation(gs, pf.mu);
      cert = min_trace_homogeneous(plant, gs, d, options);
      controller.emplace(gs.K0, cert.K(), cert.P(), d);
    } else if (args.mode == "upgrade") {
      const EllipsoidCertificate lin = min_trace_linear(plant, gs, options);
      log << "linear.trace = " << lin.trace() << '\n';
      cert = upgrade_linear(lin, plant, gs, pf.mu);
      controller.emplace(gs.K0, cert.K(), cert.P(), make_dilation(gs, pf.mu));
    } else if (args.mode == "refit") {
      const Dilation d = make_dilation(gs, pf.mu);
      Mat K;
      if (pf.K) {
        K = *pf.K;
        log << "refit.gain = problem file\n";
      } else {
        const EllipsoidCertificate lin = min_trace_linear(plant, gs, options);
        K = lin.K();
        log << "refit.gain = linear optimum\n";
        log << "linear.trace = " << lin.trace() << '\n';
      }
      cert = refit_x_fixed_k(plant, gs, d, K, options);
      controller.emplace(gs.K0, cert.K(), cert.P(), d);
    } else {
      throw Error(ErrorKind::kInput, "unknown mode '" + args.mode + "'");
    }
    describe(log, cert);

    const fs::path dir = prepare_dir(args.out_dir);
    io::write_json((dir / "controller.json").string(), io::controller_to_json(*controller));
    io::write_json((dir / "certificate.json").string(),
                   io::certificate_to_json(cert, plant, gs.K0));
    std::ofstream((dir / "design.log").string()) << log.str();
    io::write_json((dir / "manifest.json").string(),
                   manifest(command, {{"generator", pf.seed}}, tolerances(pf)));
    out << log.str();
    return kOk;
  });
}

int cmd_simulate(const SimulateArgs& args, const std::string& command, std::ostream& out,
                 std::ostream& err) {
  return guarded(err, [&]() -> int {
    const io::ProblemFile pf = io::read_problem(args.problem);
    const HomogeneousController c = io::controller_from_json(io::read_json(args.controller));
    const LinearPlant& plant = pf.plant;
    if (c.n() != plant.n() || c.m() != plant.m()) {
      throw Error(ErrorKind::kDimension, "controller does not match the plant dimensions");
    }
    const Vec x0 = pf.simulation.x0.value_or(Vec::Zero(plant.n()));
    const Disturbance w = io::make_disturbance(pf.simulation, plant);
    const Trajectory tr = simulate(plant, c, w, pf.simulation.T, pf.simulation.dt, x0);

    const fs::path dir = prepare_dir(args.out_dir);
    {
      std::ofstream csv((dir / "trajectory.csv").string());
      write_csv(csv, tr);
    }
    std::ostringstream report;
    const auto [t0, t1] = steady_window(tr);
    write_metrics(report, metrics(tr, tr.t.front(), tr.t.back()), "full.");
    write_metrics(report, metrics(tr, t0, t1), "steady.");
    if (args.baseline) {
      const HomogeneousController lin = io::controller_from_json(io::read_json(*args.baseline));
      write_report(report, compare(plant, lin, c, w, pf.simulation.T, pf.simulation.dt, x0));
    }
    std::ofstream((dir / "metrics.txt").string()) << report.str();
    json seeds = json::object();
    if (pf.simulation.disturbance.kind == "seeded-random-admissible") {
      seeds["disturbance"] = pf.simulation.disturbance.seed;
    }
    io::write_json((dir / "manifest.json").string(),
                   manifest(command, std::move(seeds),
                            {{"dt", pf.simulation.dt},
                             {"T", pf.simulation.T},
                             {"norm_floor", c.norm_floor()},
                             {"norm_tol", c.norm().tol()}}));
    out << report.str();
    return kOk;
  });
}

int cmd_verify(const VerifyArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() -> int {
    if (args.samples <= 0) throw Error(ErrorKind::kInput, "verify: samples must be positive");
    const HomogeneousController c = io::controller_from_json(io::read_json(args.controller));
    const io::CertificateFile cf = io::certificate_from_json(io::read_json(args.certificate));
    const LinearPlant& plant = cf.plant;
    if (c.n() != plant.n() || c.m() != plant.m()) {
      throw Error(ErrorKind::kDimension, "controller does not match the certificate plant");
    }
    const EllipsoidCertificate& cert = cf.cert;
    const Mat A0 = plant.A + plant.B * cf.K0;
    const InvarianceMargins m = lmi_invariance(cert.X, cert.Y, cert.beta, plant, A0, cert.Gd);

    out << std::setprecision(17);
    out << "margin.lmi = " << m.lmi << '\n';
    out << "margin.X = " << m.x << '\n';
    out << "margin.GdX = " << m.gd << '\n';
    bool ok = m.worst() >= -args.tol;
    if (!ok) err << "certificate margins violated: worst = " << m.worst() << '\n';

    const BoundaryCheck mc = boundary_monte_carlo(c, plant, args.samples, args.seed, args.tol);
    out << "samples = " << mc.samples << '\n';
    out << "violations = " << mc.violations << '\n';
    out << "max_boundary_derivative = " << mc.max_value << '\n';
    if (mc.violations > 0) {
      ok = false;
      const Eigen::IOFormat row(Eigen::FullPrecision, Eigen::DontAlignCols, ", ", ", ", "", "", "[",
                                "]");
      err << std::setprecision(17) << "counterexample: x = " << mc.worst_x.transpose().format(row)
          << " w = " << mc.worst_w.transpose().format(row) << " x'Pf = " << mc.max_value << '\n';
    }
    out << (ok ? "verify: pass\n" : "verify: FAIL\n");
    return ok ? kOk : kVerificationFailure;
  });
}

int cmd_norm(const NormArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() -> int {
    const HomogeneousController c = io::controller_from_json(io::read_json(args.controller));
    if (static_cast<Eigen::Index>(args.x.size()) != c.n()) {
      throw Error(ErrorKind::kDimension, "norm: x must have n entries");
    }
    const Vec x = Eigen::Map<const Vec>(args.x.data(), c.n());
    const auto ev = c.norm().evaluate(x);
    out << std::setprecision(17) << "norm = " << ev.value << '\n';
    out << "iterations = " << ev.iterations << '\n';
    return kOk;
  });
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  std::string command;
  for (int i = 0; i < argc; ++i) {
    if (i > 0) command += ' ';
    command += argv[i];
  }

  CLI::App app{"Homogeneous invariant-ellipsoid controller synthesis"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  DesignArgs design;
  double mu = 0.0, rho = 1.0;
  auto* d = app.add_subcommand("design", "Synthesize a controller and its certificate");
  d->add_option("problem", design.problem, "Problem file (JSON)")->required();
  d->add_option("--mode", design.mode, "linear | homogeneous | upgrade | refit")
      ->check(CLI::IsMember({"linear", "homogeneous", "upgrade", "refit"}));
  d->add_option("--out", design.out_dir, "Output directory");
  auto* mu_opt = d->add_option("--mu", mu, "Override the homogeneity degree");
  auto* rho_opt = d->add_option("--rho", rho, "Override the refit decay parameter");

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Simulate a controller on the problem plant");
  s->add_option("problem", sim.problem, "Problem file (JSON)")->required();
  s->add_option("controller", sim.controller, "controller.json")->required();
  s->add_option("--out", sim.out_dir, "Output directory");
  std::string baseline;
  auto* baseline_opt = s->add_option("--baseline", baseline, "Linear controller.json to compare against");

  VerifyArgs ver;
  auto* v = app.add_subcommand("verify", "Re-verify a certificate and sample the boundary condition");
  v->add_option("controller", ver.controller, "controller.json")->required();
  v->add_option("certificate", ver.certificate, "certificate.json")->required();
  v->add_option("--samples", ver.samples, "Monte-Carlo samples");
  v->add_option("--seed", ver.seed, "Monte-Carlo seed");
  v->add_option("--tol", ver.tol, "Accepted violation");

  NormArgs norm;
  auto* nm = app.add_subcommand("norm", "Evaluate the homogeneous norm of a state");
  nm->add_option("controller", norm.controller, "controller.json")->required();
  nm->add_option("--x", norm.x, "State entries")->required()->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  if (d->parsed()) {
    if (mu_opt->count() > 0) design.mu = mu;
    if (rho_opt->count() > 0) design.rho = rho;
    return cmd_design(design, command, out, err);
  }
  if (s->parsed()) {
    if (baseline_opt->count() > 0) sim.baseline = baseline;
    return cmd_simulate(sim, command, out, err);
  }
  if (v->parsed()) return cmd_verify(ver, out, err);
  return cmd_norm(norm, out, err);
}

}  // namespace hominv::cli
