#pragma once

#include <stdexcept>
#include <string>

namespace aomlab {

// Numeric values match the CLI exit codes for the first four entries.
enum class ErrorCode {
  ok = 0,
  config = 1,
  all_diverged = 2,
  io = 3,
  invalid_argument = 4,
  numeric = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace aomlab
