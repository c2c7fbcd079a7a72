#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "hominv/error.hpp"

namespace hominv::cli {

inline constexpr const char* kToolName = "hominv";
inline constexpr const char* kToolVersion = "1.0.0";

enum ExitCode : int {
  kOk = 0,
  kInputError = 1,
  kInfeasibleExit = 2,
  kDivergenceExit = 3,
  kVerificationFailure = 4,
};

int exit_code(ErrorKind kind);

struct DesignArgs {
  std::string problem;
  std::string mode = "linear";  // linear | homogeneous | upgrade | refit
  std::string out_dir = ".";
  std::optional<double> mu;
  std::optional<double> rho;
};

struct SimulateArgs {
  std::string problem;
  std::string controller;
  std::string out_dir = ".";
  std::optional<std::string> baseline;  // linear controller to compare against
};

struct VerifyArgs {
  std::string controller;
  std::string certificate;
  int samples = 10000;
  std::uint64_t seed = 1;
  double tol = 1e-7;
};

struct NormArgs {
  std::string controller;
  std::vector<double> x;
};

// Each command reports progress on `out`, failures on `err`, and returns the
// process exit code.
int cmd_design(const DesignArgs& args, const std::string& command, std::ostream& out,
               std::ostream& err);
int cmd_simulate(const SimulateArgs& args, const std::string& command, std::ostream& out,
                 std::ostream& err);
int cmd_verify(const VerifyArgs& args, std::ostream& out, std::ostream& err);
int cmd_norm(const NormArgs& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace hominv::cli
