#pragma once

#include <stdexcept>
#include <string>

namespace hominv {

enum class ErrorKind {
  kDimension,
  kNotControllable,
  kNotMonotone,
  kDegenerateInput,
  kNoSolution,
  kDegenerateSolution,
  kOutOfRange,
  kInconsistentGenerator,
  kInfeasible,
  kNotApplicable,
  kPrecondition,
  kDivergence,
  kInput,
};

const char* to_string(ErrorKind kind);

// Every failure raised by the library carries a kind so that callers (the CLI
// in particular) can map it onto an exit code without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace hominv
