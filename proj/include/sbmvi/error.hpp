#pragma once

#include <stdexcept>
#include <string>

namespace sbmvi {

enum class ErrorCode {
  InvalidConfig = 1,
  InvalidInput = 2,
  DegenerateParameters = 3,
  Numeric = 4,
  Estimation = 5,
  Domain = 6,
  Io = 7,
};

const char* to_string(ErrorCode code) noexcept;

// All library failures are reported through this type; the C API maps
// code() onto its integer status values.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace sbmvi
