#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gigacrowd {

// Every failure the library reports carries one of these kinds; the CLI maps
// each kind to a distinct exit code.
enum class ErrorKind {
  InvalidArgument,
  InvalidTrack,
  DegenerateBox,
  Parse,
  Validation,
  Consistency,
  UndefinedMetric,
  Configuration,
  TrainingData,
  ContractViolation,
  Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace gigacrowd
